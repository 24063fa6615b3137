#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "looptree/random.hpp"

namespace looptree {

/// Offspring law of a Galton-Watson tree.
///
/// Four shapes are supported: a point mass at d, Poisson(mu), the rescaled
/// law lambda * X of another distribution, and a finite pmf table. Values are
/// immutable; the scaled variant shares its base.
class OffspringDistribution {
public:
    enum class Kind { deterministic, poisson, scaled, empirical };

    static constexpr double default_tail_tolerance = 1e-12;

    static OffspringDistribution deterministic(std::uint64_t d);
    static OffspringDistribution poisson(double mu);
    static OffspringDistribution scaled(std::uint64_t lambda, const OffspringDistribution& base);
    static OffspringDistribution empirical(std::map<std::uint64_t, double> pmf,
                                           double tail_tolerance = default_tail_tolerance);

    Kind kind() const noexcept { return kind_; }
    double tail_tolerance() const noexcept { return tail_tolerance_; }
    OffspringDistribution with_tail_tolerance(double tol) const;

    double pmf(std::uint64_t k) const;
    double mean() const;

    /// Largest value with positive mass, or nullopt for unbounded support.
    std::optional<std::uint64_t> max_support() const;

    /// All (value, mass) pairs when the support is finite.
    std::vector<std::pair<std::uint64_t, double>> finite_support() const;

    std::uint64_t sample(RandomStream& rng) const;

    /// Compact human readable form, e.g. "poisson(3)" or "scaled(4,deterministic(1))".
    std::string describe() const;

    std::uint64_t degree() const;   ///< deterministic only
    double mu() const;              ///< poisson only
    std::uint64_t lambda() const;   ///< scaled only
    const OffspringDistribution& base() const; ///< scaled only
    const std::map<std::uint64_t, double>& table() const; ///< empirical only

private:
    OffspringDistribution() = default;

    Kind kind_ = Kind::deterministic;
    double tail_tolerance_ = default_tail_tolerance;
    std::uint64_t degree_ = 0;
    double mu_ = 0.0;
    std::uint64_t lambda_ = 1;
    std::shared_ptr<const OffspringDistribution> base_;
    std::map<std::uint64_t, double> table_;
    // Cached sampler for the empirical table.
    std::vector<std::uint64_t> values_;
    std::vector<double> cumulative_;
};

/// Integrand of a moment E[f(X)].
///
/// The two structured forms s^k and k*s^(k-1) have closed forms under the
/// Poisson law and are tagged so moment_functional can use them.
class MomentFunction {
public:
    enum class Form { power, derivative_power, generic };

    static MomentFunction power(double s);
    static MomentFunction derivative_power(double s);
    static MomentFunction generic(std::function<double(std::uint64_t)> f);

    Form form() const noexcept { return form_; }
    double base() const noexcept { return s_; }
    double operator()(std::uint64_t k) const;

private:
    Form form_ = Form::generic;
    double s_ = 0.0;
    std::function<double(std::uint64_t)> f_;
};

enum class MomentMethod {
    automatic, ///< closed form where one exists, exact or truncated sum otherwise
    series     ///< always sum the pmf series
};

/// E[f(X)].
///
/// Finite supports are summed exactly. Unbounded supports are summed until
/// the remaining pmf mass is below the distribution's tail tolerance and the
/// terms have become negligible; throws std::runtime_error if that does not
/// happen within the iteration cap.
double moment_functional(const OffspringDistribution& dist, const MomentFunction& f,
                         MomentMethod method = MomentMethod::automatic);

/// P(pred(X)).
double probability(const OffspringDistribution& dist,
                   const std::function<bool(std::uint64_t)>& pred);

} // namespace looptree
