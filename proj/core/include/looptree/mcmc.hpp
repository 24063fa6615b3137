#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "looptree/estimate.hpp"
#include "looptree/links.hpp"
#include "looptree/random.hpp"
#include "looptree/tree.hpp"

namespace looptree {

struct McmcSchedule {
    std::uint64_t steps = 1'000'000;
    std::uint64_t burn_in = 100'000;
    std::uint64_t thin = 10;
    /// Cached L is recomputed from scratch every this many steps.
    std::uint64_t check_interval = 10'000;
    std::uint32_t batches = 50;
    /// Keep the time of one uniformly chosen link per recorded state.
    bool record_link_times = false;

    void validate() const;
};

/// Chain state: configuration, cached loop count and counters.
struct McmcState {
    LinkConfig config;
    std::size_t loops = 0;
    double log_weight = 0.0; ///< loops * log(theta)
    std::uint64_t steps = 0;
    std::uint64_t insert_proposed = 0;
    std::uint64_t insert_accepted = 0;
    std::uint64_t delete_proposed = 0;
    std::uint64_t delete_accepted = 0;
};

struct McmcResult {
    std::vector<RatioEstimate> estimates;
    std::uint64_t recorded = 0;
    /// Mean links per edge over recorded states, batch-means standard error.
    double mean_links_per_edge = 0.0;
    double mean_links_std_error = 0.0;
    std::vector<double> link_times;
    McmcState final_state;
};

/// Grand-canonical Metropolis chain targeting theta^L against the Poisson
/// link law. Half the proposals insert a uniform link (uniform edge, uniform
/// time, cross with probability u), half delete a uniform existing link.
/// Event frequencies over thinned post-burn-in states are returned with
/// batch-means standard errors.
McmcResult run_mcmc(const Tree& tree, const ModelParams& params, std::span<const Event> events,
                    const McmcSchedule& schedule, RandomStream& rng);

/// Single-event convenience form.
RatioEstimate mcmc_sampler(const Tree& tree, const ModelParams& params, std::uint64_t n_steps, std::uint64_t burn_in,
                           std::uint64_t thin, RandomStream& rng, const Event& event);

} // namespace looptree
