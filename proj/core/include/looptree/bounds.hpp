#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "looptree/links.hpp"
#include "looptree/offspring.hpp"

namespace looptree {

// The functions below accept beta = 0 (the no-link limit); they require
// theta >= 1 and beta >= 0 and throw std::invalid_argument otherwise.

/// e^x - 1 - x without cancellation for small x.
double expm1_minus_x(double x) noexcept;

/// (e^{beta theta} - 1) / theta^2.
double link_gain(double theta, double beta);

/// (theta^2 + beta theta) / (theta^2 + e^{beta theta} - 1), the per-edge lower
/// bound factor for P^theta(A).
double single_edge_factor(double theta, double beta);

struct PartitionBounds {
    double lower = 0.0;
    double upper = 0.0;
    double log_lower = 0.0;
    double log_upper = 0.0;
};

/// Bounds on E[theta^L] of a tree whose root has d children, given the
/// partition functions of the d subtrees:
///   theta e^{-beta d + beta d / theta} prod f_j
///   theta e^{-beta d} (1 + (e^{beta theta} - 1) / theta^2)^d prod f_j
PartitionBounds partition_bounds(std::uint64_t d, const ModelParams& params, std::span<const double> subtree_factors);

struct RootPatternBounds {
    double empty_upper = 1.0;  ///< P^theta(A_empty) <= e^{-beta d / theta}
    double at_most_one_lower = 1.0; ///< P^theta(A) >= single_edge_factor^d
};

RootPatternBounds prob_A_bounds(std::uint64_t d, const ModelParams& params);

/// Lower bounds on the quenched probability 1 - zeta^m that the root lies on
/// no loop failing to reach generation m, from the recursion
///   1 - zeta^m >= E[r^X - (e^{-beta/theta} (1 + (beta/theta) zeta^{m-1}))^X],
/// started at zeta^1 <= E[e^{-beta X / theta}]; and the decay bounds
/// sigma^m <= q_tilde^{m-1}. Index 0 holds m = 1.
struct RecursionTrace {
    std::vector<double> long_loop_lower; ///< lower bound on 1 - zeta^m, clamped to [0, 1]
    std::vector<double> zeta_upper;      ///< 1 - long_loop_lower
    std::vector<double> sigma_upper;     ///< min(1, q_tilde^{m-1})
    double epsilon = 0.0;
    /// long_loop_lower[m] >= epsilon for every m.
    bool invariant_maintained = false;
    /// First m (1-based) at which the invariant broke, if any.
    std::optional<std::uint32_t> first_violation;
};

RecursionTrace zeta_recursion_lower(const OffspringDistribution& dist, const ModelParams& params, double epsilon,
                                    std::uint32_t m_max);

/// q_tilde = E[X e^{-X beta/theta} (1 + g)^{X-1}] g with g = link_gain.
double q_tilde(const OffspringDistribution& dist, const ModelParams& params,
               MomentMethod method = MomentMethod::automatic);

/// E[e^{-beta X / theta}].
double empty_root_moment(const OffspringDistribution& dist, const ModelParams& params,
                         MomentMethod method = MomentMethod::automatic);

/// E[r^X - (e^{-beta/theta} (1 + (beta/theta) zeta))^X] with r = single_edge_factor.
double long_loop_difference(const OffspringDistribution& dist, const ModelParams& params, double zeta,
                            MomentMethod method = MomentMethod::automatic);

/// Evaluated sides and verdicts of the long-loop and no-long-loop conditions.
struct ConditionReport {
    std::string distribution;
    double theta = 1.0;
    double beta = 0.0;
    std::optional<double> epsilon;

    // Long loops: E[e^{-beta X/theta}] <= 1 - epsilon and difference >= epsilon.
    std::optional<double> empty_moment;      ///< lhs of the first condition
    std::optional<double> empty_moment_rhs;  ///< 1 - epsilon
    std::optional<double> difference;        ///< lhs of the second condition
    std::optional<double> difference_rhs;    ///< epsilon
    std::optional<bool> part1_first;
    std::optional<bool> part1_second;
    std::optional<bool> part1;

    // No long loops: q_tilde < 1.
    double q_tilde = 0.0;
    bool part2 = false;

    // Filled by the searches.
    std::optional<double> c_d;
    std::optional<std::uint64_t> d0;
    std::optional<std::uint64_t> lambda0;
    std::vector<double> zeta_m;

    /// Single JSON object, keys named after the quantities.
    std::string to_json() const;
};

/// Evaluates every condition. Without epsilon only the no-long-loop part is filled.
ConditionReport check_theorem2(const OffspringDistribution& dist, const ModelParams& params,
                               std::optional<double> epsilon);

/// An epsilon in (0, 1/2] satisfying both long-loop conditions, if any.
///
/// Scans 1000 grid points, then refines around the best one with a golden
/// section search. Returns the point with the largest smaller margin of the
/// two conditions.
std::optional<double> find_epsilon(const OffspringDistribution& dist, const ModelParams& params);

/// Smallest beta with q_tilde(beta) = 1, to |q_tilde - 1| <= 1e-9.
///
/// Scans a geometric grid from 1e-9 for the first crossing, bisects, and
/// checks q_tilde is increasing on a grid below the root. Throws
/// std::runtime_error if no crossing is found below beta = 1e4 or the
/// monotonicity check fails.
double critical_beta_subcritical(const OffspringDistribution& dist, double theta);

/// c_d = (d/theta^2)(e^{q theta/d} - 1) exp((d/theta^2)(e^{q theta/d} - q theta/d - 1)).
double c_d(double q, double theta, std::uint64_t d);

struct D0Result {
    std::uint64_t d0 = 0;
    double c_d0 = 0.0;
    double q_tilde_at_d0 = 0.0;  ///< q_tilde(deterministic(d0), beta = q/d0)
    bool dominated = false;      ///< q_tilde_at_d0 <= c_d0
};

/// Least d with c_{d'} < 1 for all d' in [d, 4d]. Throws std::runtime_error
/// past `cap`.
D0Result corollary3_d0(double q, double theta, std::uint64_t cap = 1'000'000);

struct Lambda0Result {
    std::uint64_t lambda0 = 0;
    double epsilon = 0.0;
    double prob_b = 0.0;           ///< P(c1 <= X / E[X] <= c2)
    double threshold_rhs = 0.0;    ///< epsilon/P(B) + exp(-(a/theta) epsilon/P(B))
    double threshold_lhs = 0.0;    ///< value of the lambda display at lambda0
    std::vector<double> beta_grid; ///< betas used for re-verification
    std::vector<ConditionReport> reports;
    bool verified = false;         ///< long-loop conditions hold at every grid beta
};

/// Least lambda such that the rescaled law lambda * X satisfies the long-loop
/// conditions on the whole window beta in [a, b] / (E[lambda X] c1 P(B)).
///
/// epsilon is min(P(B) (theta/a) ln(a/theta), E[1 - exp(-(a/(theta c1 P(B))) X/E[X])]);
/// the first term minimises the right-hand side of the lambda threshold.
/// The search is over integers up to `cap` with guard window [lambda, 4 lambda].
Lambda0Result corollary3_lambda0(const OffspringDistribution& base, double a, double b, double c1, double c2,
                                 double theta, std::uint64_t cap = 1'000'000);

/// Grid helper for choosing c1 at fixed c2: the c1 among `points` evenly
/// spaced values in (0, c2] maximising c1 P(c1 <= X/E[X] <= c2).
double best_c1(const OffspringDistribution& base, double c2, std::uint32_t points = 200);

} // namespace looptree
