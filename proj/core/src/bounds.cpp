#include "looptree/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace looptree {

namespace {

void check_bound_params(double theta, double beta)
{
    if (!(theta >= 1.0) || !std::isfinite(theta))
        throw std::invalid_argument("theta must be a finite value >= 1");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be a finite value >= 0");
}

void check_bound_params(const ModelParams& p)
{
    check_bound_params(p.theta, p.beta);
}

// log of single_edge_factor, accurate for small beta theta.
double log_single_edge_factor(double theta, double beta)
{
    const double x = beta * theta;
    return -std::log1p(expm1_minus_x(x) / (theta * theta + x));
}

} // namespace

double expm1_minus_x(double x) noexcept
{
    if (std::abs(x) < 1e-2) {
        // Taylor series; nine terms reach full double precision for |x| < 1e-2.
        double term = x * x / 2.0;
        double sum = term;
        for (int k = 3; k <= 11; ++k) {
            term *= x / k;
            sum += term;
        }
        return sum;
    }
    return std::expm1(x) - x;
}

double link_gain(double theta, double beta)
{
    check_bound_params(theta, beta);
    return std::expm1(beta * theta) / (theta * theta);
}

double single_edge_factor(double theta, double beta)
{
    check_bound_params(theta, beta);
    return std::exp(log_single_edge_factor(theta, beta));
}

PartitionBounds partition_bounds(std::uint64_t d, const ModelParams& params, std::span<const double> subtree_factors)
{
    check_bound_params(params);
    if (subtree_factors.size() != d)
        throw std::invalid_argument("partition_bounds: expected " + std::to_string(d) + " subtree factors, got " +
                                    std::to_string(subtree_factors.size()));
    double log_prod = 0.0;
    for (double f : subtree_factors) {
        if (!(f > 0.0)) throw std::invalid_argument("partition_bounds: subtree factors must be positive");
        log_prod += std::log(f);
    }
    const double theta = params.theta;
    const double beta = params.beta;
    const double dd = static_cast<double>(d);
    PartitionBounds out;
    out.log_lower = std::log(theta) - beta * dd + beta * dd / theta + log_prod;
    out.log_upper = std::log(theta) - beta * dd + dd * std::log1p(link_gain(theta, beta)) + log_prod;
    out.lower = std::exp(out.log_lower);
    out.upper = std::exp(out.log_upper);
    return out;
}

RootPatternBounds prob_A_bounds(std::uint64_t d, const ModelParams& params)
{
    check_bound_params(params);
    const double dd = static_cast<double>(d);
    RootPatternBounds out;
    out.empty_upper = std::exp(-params.beta * dd / params.theta);
    out.at_most_one_lower = std::exp(dd * log_single_edge_factor(params.theta, params.beta));
    return out;
}

double empty_root_moment(const OffspringDistribution& dist, const ModelParams& params, MomentMethod method)
{
    check_bound_params(params);
    return moment_functional(dist, MomentFunction::power(std::exp(-params.beta / params.theta)), method);
}

double long_loop_difference(const OffspringDistribution& dist, const ModelParams& params, double zeta,
                            MomentMethod method)
{
    check_bound_params(params);
    const double x = params.beta / params.theta;
    const double r = single_edge_factor(params.theta, params.beta);
    const double t = std::exp(-x) * (1.0 + x * zeta);
    return moment_functional(dist, MomentFunction::power(r), method) -
           moment_functional(dist, MomentFunction::power(t), method);
}

double q_tilde(const OffspringDistribution& dist, const ModelParams& params, MomentMethod method)
{
    check_bound_params(params);
    const double g = link_gain(params.theta, params.beta);
    if (g == 0.0) return 0.0;
    const double decay = std::exp(-params.beta / params.theta);
    const double t = decay * (1.0 + g);
    return g * decay * moment_functional(dist, MomentFunction::derivative_power(t), method);
}

RecursionTrace zeta_recursion_lower(const OffspringDistribution& dist, const ModelParams& params, double epsilon,
                                    std::uint32_t m_max)
{
    check_bound_params(params);
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("zeta recursion: epsilon must lie in (0, 1)");
    if (m_max < 1) throw std::invalid_argument("zeta recursion: m_max must be at least 1");

    RecursionTrace trace;
    trace.epsilon = epsilon;
    const double qt = q_tilde(dist, params);
    double zeta = std::clamp(empty_root_moment(dist, params), 0.0, 1.0);
    for (std::uint32_t m = 1; m <= m_max; ++m) {
        if (m > 1) zeta = std::clamp(1.0 - long_loop_difference(dist, params, zeta), 0.0, 1.0);
        trace.zeta_upper.push_back(zeta);
        trace.long_loop_lower.push_back(1.0 - zeta);
        trace.sigma_upper.push_back(m == 1 ? 1.0 : std::min(1.0, std::pow(qt, static_cast<double>(m - 1))));
        if (!trace.first_violation && 1.0 - zeta < epsilon) trace.first_violation = m;
    }
    trace.invariant_maintained = !trace.first_violation.has_value();
    return trace;
}

ConditionReport check_theorem2(const OffspringDistribution& dist, const ModelParams& params,
                               std::optional<double> epsilon)
{
    check_bound_params(params);
    ConditionReport r;
    r.distribution = dist.describe();
    r.theta = params.theta;
    r.beta = params.beta;
    r.epsilon = epsilon;
    if (epsilon) {
        const double eps = *epsilon;
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("check: epsilon must lie in (0, 1)");
        r.empty_moment = empty_root_moment(dist, params);
        r.empty_moment_rhs = 1.0 - eps;
        r.difference = long_loop_difference(dist, params, 1.0 - eps);
        r.difference_rhs = eps;
        r.part1_first = *r.empty_moment <= *r.empty_moment_rhs;
        r.part1_second = *r.difference >= eps;
        r.part1 = *r.part1_first && *r.part1_second;
    }
    r.q_tilde = q_tilde(dist, params);
    r.part2 = r.q_tilde < 1.0;
    return r;
}

namespace {

void put(std::ostringstream& os, bool& first, const std::string& key, const std::string& raw)
{
    os << (first ? "" : ",") << '"' << key << "\":" << raw;
    first = false;
}

std::string json_number(double x)
{
    return std::isfinite(x) ? format_double(x) : "null";
}

std::string json_string(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string ConditionReport::to_json() const
{
    std::ostringstream os;
    bool first = true;
    os << '{';
    put(os, first, "distribution", json_string(distribution));
    put(os, first, "theta", json_number(theta));
    put(os, first, "beta", json_number(beta));
    if (epsilon) put(os, first, "epsilon", json_number(*epsilon));
    if (empty_moment) put(os, first, "empty_moment", json_number(*empty_moment));
    if (empty_moment_rhs) put(os, first, "empty_moment_rhs", json_number(*empty_moment_rhs));
    if (difference) put(os, first, "difference", json_number(*difference));
    if (difference_rhs) put(os, first, "difference_rhs", json_number(*difference_rhs));
    if (part1_first) put(os, first, "part1_first", *part1_first ? "true" : "false");
    if (part1_second) put(os, first, "part1_second", *part1_second ? "true" : "false");
    if (part1) put(os, first, "part1", *part1 ? "true" : "false");
    put(os, first, "q_tilde", json_number(q_tilde));
    put(os, first, "part2", part2 ? "true" : "false");
    if (c_d) put(os, first, "c_d", json_number(*c_d));
    if (d0) put(os, first, "d0", std::to_string(*d0));
    if (lambda0) put(os, first, "lambda0", std::to_string(*lambda0));
    if (!zeta_m.empty()) {
        std::string list = "[";
        for (std::size_t i = 0; i < zeta_m.size(); ++i) list += (i ? "," : "") + json_number(zeta_m[i]);
        put(os, first, "zeta_m", list + "]");
    }
    os << '}';
    return os.str();
}

std::optional<double> find_epsilon(const OffspringDistribution& dist, const ModelParams& params)
{
    check_bound_params(params);
    const double empty = empty_root_moment(dist, params);
    auto margin = [&](double eps) {
        const double first = (1.0 - eps) - empty;
        const double second = long_loop_difference(dist, params, 1.0 - eps) - eps;
        return std::min(first, second);
    };

    constexpr int grid = 1000;
    constexpr double top = 0.5;
    int best = 1;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= grid; ++i) {
        const double m = margin(top * i / grid);
        if (m > best_margin) {
            best_margin = m;
            best = i;
        }
    }

    // The margin is concave in epsilon, so a golden section search around the
    // best grid point finds its maximum.
    double lo = top * (best - 1) / grid;
    double hi = top * std::min(best + 1, grid) / grid;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = margin(x1);
    double f2 = margin(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = margin(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = margin(x1);
        }
    }
    double eps = top * best / grid;
    double m = best_margin;
    const double refined = f1 > f2 ? x1 : x2;
    const double refined_margin = std::max(f1, f2);
    if (refined > 0.0 && refined_margin > m) {
        eps = refined;
        m = refined_margin;
    }
    if (!(m >= 0.0)) return std::nullopt;
    const auto report = check_theorem2(dist, params, eps);
    if (!report.part1.value_or(false)) return std::nullopt;
    return eps;
}

double critical_beta_subcritical(const OffspringDistribution& dist, double theta)
{
    check_bound_params(theta, 0.0);
    ModelParams p;
    p.theta = theta;
    auto q_at = [&](double beta) {
        p.beta = beta;
        return q_tilde(dist, p);
    };

    double below = 0.0;
    double above = 1e-9;
    while (!(q_at(above) >= 1.0)) {
        below = above;
        above *= 1.05;
        if (above > 1e4)
            throw std::runtime_error("critical beta: q_tilde stays below 1 for beta up to 1e4 on " + dist.describe());
    }
    double beta_star = above;
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (below + above);
        const double q = q_at(mid);
        beta_star = mid;
        if (std::abs(q - 1.0) <= 1e-9 || mid == below || mid == above) break;
        (q < 1.0 ? below : above) = mid;
    }

    constexpr int checks = 1000;
    double prev = 0.0;
    for (int i = 1; i <= checks; ++i) {
        const double beta = beta_star * i / checks;
        const double q = q_at(beta);
        if (q < prev || (i < checks && q >= 1.0))
            throw std::runtime_error("critical beta: q_tilde is not increasing below the root for " +
                                     dist.describe());
        prev = q;
    }
    return beta_star;
}

double c_d(double q, double theta, std::uint64_t d)
{
    check_bound_params(theta, 0.0);
    if (d == 0) throw std::invalid_argument("c_d: d must be positive");
    const double dd = static_cast<double>(d);
    const double x = q * theta / dd;
    const double scale = dd / (theta * theta);
    return scale * std::expm1(x) * std::exp(scale * expm1_minus_x(x));
}

D0Result corollary3_d0(double q, double theta, std::uint64_t cap)
{
    check_bound_params(theta, 0.0);
    if (!(q > 0.0 && q < theta)) throw std::invalid_argument("d0 search: q must satisfy 0 < q < theta");
    std::uint64_t d = 1;
    while (d <= cap) {
        if (!(c_d(q, theta, d) < 1.0)) {
            ++d;
            continue;
        }
        std::uint64_t bad = 0;
        for (std::uint64_t k = d + 1; k <= 4 * d; ++k) {
            if (!(c_d(q, theta, k) < 1.0)) {
                bad = k;
                break;
            }
        }
        if (bad == 0) break;
        d = bad + 1;
    }
    if (d > cap) throw std::runtime_error("d0 search exceeded cap " + std::to_string(cap));

    D0Result out;
    out.d0 = d;
    out.c_d0 = c_d(q, theta, d);
    ModelParams p;
    p.theta = theta;
    p.beta = q / static_cast<double>(d);
    out.q_tilde_at_d0 = q_tilde(OffspringDistribution::deterministic(d), p);
    out.dominated = out.q_tilde_at_d0 <= out.c_d0 * (1.0 + 1e-12);
    return out;
}

Lambda0Result corollary3_lambda0(const OffspringDistribution& base, double a, double b, double c1, double c2,
                                 double theta, std::uint64_t cap)
{
    check_bound_params(theta, 0.0);
    if (!(a > theta)) throw std::invalid_argument("lambda0 search: a must exceed theta");
    if (!(b >= a)) throw std::invalid_argument("lambda0 search: b must be at least a");
    if (!(c1 > 0.0 && c2 >= c1)) throw std::invalid_argument("lambda0 search: need c2 >= c1 > 0");
    const double mean = base.mean();
    if (!(mean > 0.0)) throw std::invalid_argument("lambda0 search: P[X > 0] must be positive");
    const double prob_b = probability(base, [&](std::uint64_t k) {
        const double ratio = static_cast<double>(k) / mean;
        return ratio >= c1 && ratio <= c2;
    });
    if (!(prob_b > 0.0)) throw std::invalid_argument("lambda0 search: P(c1 <= X/E[X] <= c2) is zero");

    const double k = a / theta;
    const double kappa = a / (theta * c1 * prob_b);
    const double start = 1.0 - moment_functional(base, MomentFunction::generic([&](std::uint64_t x) {
                                                      return std::exp(-kappa * static_cast<double>(x) / mean);
                                                  }));
    double eps = prob_b * std::log(k) / k;
    if (start <= eps) eps = start * (1.0 - 1e-9); // keeps the first condition strict after rounding
    const double y = eps / prob_b;
    if (!(eps > 0.0) || !(std::exp(-k * y) < 1.0 - y))
        throw std::runtime_error("lambda0 search: no valid epsilon for these inputs");

    Lambda0Result out;
    out.epsilon = eps;
    out.prob_b = prob_b;
    out.threshold_rhs = y + std::exp(-k * y);
    const double log_rhs = std::log(out.threshold_rhs);
    auto log_lhs = [&](std::uint64_t lambda) {
        const double dbar = static_cast<double>(lambda) * mean;
        const double z = b * theta / (c1 * prob_b * dbar);
        return -dbar * c2 * std::log1p(expm1_minus_x(z) / (theta * theta));
    };

    std::uint64_t lambda = 1;
    while (lambda <= cap) {
        if (!(log_lhs(lambda) >= log_rhs)) {
            ++lambda;
            continue;
        }
        std::uint64_t bad = 0;
        for (std::uint64_t l = lambda + 1; l <= 4 * lambda; ++l) {
            if (!(log_lhs(l) >= log_rhs)) {
                bad = l;
                break;
            }
        }
        if (bad == 0) break;
        lambda = bad + 1;
    }
    if (lambda > cap) throw std::runtime_error("lambda0 search exceeded cap " + std::to_string(cap));
    out.lambda0 = lambda;
    out.threshold_lhs = std::exp(log_lhs(lambda));

    const auto scaled = OffspringDistribution::scaled(lambda, base);
    const double unit = 1.0 / (static_cast<double>(lambda) * mean * c1 * prob_b);
    out.verified = true;
    ModelParams p;
    p.theta = theta;
    for (int i = 0; i < 5; ++i) {
        p.beta = unit * (a + (b - a) * i / 4.0);
        out.beta_grid.push_back(p.beta);
        auto report = check_theorem2(scaled, p, eps);
        report.lambda0 = lambda;
        out.verified = out.verified && report.part1.value_or(false);
        out.reports.push_back(std::move(report));
    }
    return out;
}

double best_c1(const OffspringDistribution& base, double c2, std::uint32_t points)
{
    if (!(c2 > 0.0) || points == 0) throw std::invalid_argument("best_c1: need c2 > 0 and at least one point");
    const double mean = base.mean();
    if (!(mean > 0.0)) throw std::invalid_argument("best_c1: E[X] must be positive");
    double best = c2;
    double best_value = -1.0;
    for (std::uint32_t i = 1; i <= points; ++i) {
        const double c1 = c2 * i / points;
        const double mass = probability(base, [&](std::uint64_t k) {
            const double ratio = static_cast<double>(k) / mean;
            return ratio >= c1 && ratio <= c2;
        });
        if (c1 * mass > best_value) {
            best_value = c1 * mass;
            best = c1;
        }
    }
    return best;
}

} // namespace looptree
