#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "looptree/links.hpp"
#include "looptree/loops.hpp"
#include "looptree/tree.hpp"

namespace looptree {

enum class EstimatorMethod { importance, mcmc, cluster, quenched };

std::string to_string(EstimatorMethod method);

/// Estimate of P^theta(B) = E[1_B theta^L] / E[theta^L].
///
/// numerator_sum and denominator_sum are expressed relative to
/// exp(log_scale). value is the ratio clamped to [0, 1]; raw_value is the
/// unclamped ratio.
struct RatioEstimate {
    double value = 0.0;
    double raw_value = 0.0;
    double numerator_sum = 0.0;
    double denominator_sum = 0.0;
    double log_scale = 0.0;
    std::uint64_t n_samples = 0;
    double std_error = 0.0;
    std::optional<double> bootstrap_std_error;
    double effective_sample_size = 0.0;
    bool ess_warning = false;
    EstimatorMethod method = EstimatorMethod::importance;
};

/// What an event predicate gets to look at.
struct EventContext {
    const Tree& tree;
    const LinkConfig& config;
    const LoopPartition& partition;
};

/// Named predicate over a sampled configuration.
struct Event {
    std::string name;
    std::function<bool(const EventContext&)> test;

    static Event reach(std::uint32_t m);                 ///< E^{r->m}
    static Event fail(VertexId x, std::uint32_t m);      ///< B^{x-/->m}
    static Event root_edges_at_most_one();               ///< A
    static Event root_edges_empty();                     ///< A_empty
    static Event always();
};

/// Self-normalised importance sums accumulated in log space.
///
/// Weights are stored relative to the largest log-weight seen so far; when a
/// larger one arrives the existing sums are rescaled. Merging is associative
/// for a fixed merge order.
class WeightedSums {
public:
    static constexpr std::size_t max_events = 64;

    explicit WeightedSums(std::size_t n_events = 0);

    void add(double log_weight, std::uint64_t event_bits);
    void merge(const WeightedSums& other);

    std::size_t event_count() const noexcept { return sum_we_.size(); }
    std::uint64_t count() const noexcept { return n_; }
    double anchor() const noexcept { return anchor_; }

    /// Ratio estimate for event i, delta-method standard error.
    RatioEstimate ratio(std::size_t event, EstimatorMethod method) const;

    /// log of the mean weight, (1/n) sum w.
    double log_mean_weight() const;
    /// Standard error of the mean weight divided by the mean weight.
    double relative_std_error() const;
    double effective_sample_size() const;

private:
    void rescale_to(double new_anchor);

    double anchor_ = -std::numeric_limits<double>::infinity();
    std::uint64_t n_ = 0;
    double sum_w_ = 0.0;
    double sum_w2_ = 0.0;
    std::vector<double> sum_we_;
    std::vector<double> sum_w2e_;
};

/// One stored importance draw, kept for bootstrap resampling.
struct WeightedDraw {
    double log_weight;
    std::uint64_t event_bits;
};

/// Bootstrap standard errors of the self-normalised ratio for each event.
std::vector<double> bootstrap_std_errors(const std::vector<WeightedDraw>& draws, std::size_t n_events,
                                         std::uint32_t resamples, std::uint64_t seed);

/// Runs `work(unit)` for unit in [0, units) on `workers` threads and returns
/// the results in unit order.
template <class Result>
std::vector<Result> run_units(std::uint64_t units, unsigned workers, const std::function<Result(std::uint64_t)>& work);

} // namespace looptree

#include "looptree/detail/run_units.hpp"
