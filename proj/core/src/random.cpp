#include "looptree/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace looptree {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(mix64(mix64(master) ^ (a * 0xd1b54a32d192ed03ULL)) ^ (b * 0x8cb92ba72f3d8dd7ULL));
}

double RandomStream::uniform(double upper) noexcept
{
    double t = uniform() * upper;
    // Rounding can land exactly on the upper end for non-power-of-two bounds.
    while (t >= upper) t = uniform() * upper;
    return t;
}

std::uint64_t RandomStream::index(std::uint64_t n)
{
    if (n == 0) throw std::invalid_argument("RandomStream::index: empty range");
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

std::uint64_t RandomStream::poisson(double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("RandomStream::poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
}

std::uint64_t RandomStream::geometric(double p)
{
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("RandomStream::geometric: p must lie in (0, 1]");
    if (p == 1.0) return 0;
    // Inversion keeps the draw count at one uniform per call.
    const double u = 1.0 - uniform(); // (0, 1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (k >= static_cast<double>(std::numeric_limits<std::uint64_t>::max() / 2))
        return std::numeric_limits<std::uint64_t>::max() / 2;
    return static_cast<std::uint64_t>(k);
}

} // namespace looptree
