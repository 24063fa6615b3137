#pragma once

#include <cstdint>
#include <random>

namespace looptree {

/// SplitMix64 finaliser. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the stream identified by (master, a, b).
///
/// Streams are keyed by work-unit indices (chunk, tree, level), never by
/// worker id, so results do not depend on how work is scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Random stream used by every sampler in the library.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [0, upper).
    double uniform(double upper) noexcept;

    /// Uniform integer on [0, n).
    std::uint64_t index(std::uint64_t n);

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t poisson(double mean);

    /// Number of failures before the first success, success probability p.
    std::uint64_t geometric(double p);

    engine_type& engine() noexcept { return engine_; }

private:
    engine_type engine_;
};

} // namespace looptree
