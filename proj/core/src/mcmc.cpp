#include "looptree/mcmc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "looptree/loops.hpp"

namespace looptree {

void McmcSchedule::validate() const
{
    if (steps <= burn_in)
        throw std::invalid_argument("mcmc: steps (" + std::to_string(steps) + ") must exceed burn_in (" +
                                    std::to_string(burn_in) + ")");
    if (thin == 0) throw std::invalid_argument("mcmc: thin must be at least 1");
    if (check_interval == 0) throw std::invalid_argument("mcmc: check_interval must be at least 1");
    if (batches < 2) throw std::invalid_argument("mcmc: at least 2 batches are required");
}

namespace {

// Batch-means standard error of the mean of xs.
double batch_means_error(const std::vector<double>& xs, std::uint32_t batches)
{
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const std::size_t b = std::min<std::size_t>(batches, n);
    const std::size_t len = n / b;
    double grand = 0.0;
    std::vector<double> means(b, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < len; ++j) means[i] += xs[i * len + j];
        means[i] /= static_cast<double>(len);
        grand += means[i];
    }
    grand /= static_cast<double>(b);
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

} // namespace

McmcResult run_mcmc(const Tree& tree, const ModelParams& params, std::span<const Event> events,
                    const McmcSchedule& schedule, RandomStream& rng)
{
    params.validate();
    schedule.validate();
    if (events.size() > WeightedSums::max_events) throw std::invalid_argument("at most 64 events per run");

    const std::size_t edges = tree.edge_count();
    const double log_theta = std::log(params.theta);
    const double rate = params.beta * static_cast<double>(edges); // beta |E|

    LoopBuilder builder;
    McmcState state;
    state.config = LinkConfig(edges);
    state.loops = builder.build(tree, state.config).loop_count();
    state.log_weight = static_cast<double>(state.loops) * log_theta;

    std::vector<std::vector<double>> hits(events.size());
    std::vector<double> link_means;
    McmcResult result;

    for (std::uint64_t step = 0; step < schedule.steps; ++step) {
        const bool insert = rng.bernoulli(0.5);
        if (insert) {
            ++state.insert_proposed;
            if (edges > 0) {
                const auto e = static_cast<EdgeId>(rng.index(edges));
                const Link link{rng.uniform(params.beta), rng.bernoulli(params.u) ? LinkKind::cross : LinkKind::bar};
                LinkConfig proposal = state.config;
                if (proposal.insert_in_place(e, link)) {
                    const std::size_t loops = builder.build(tree, proposal).loop_count();
                    const double delta = static_cast<double>(loops) - static_cast<double>(state.loops);
                    const double log_a = delta * log_theta + std::log(rate) -
                                         std::log(static_cast<double>(state.config.total_links() + 1));
                    if (log_a >= 0.0 || rng.uniform() < std::exp(log_a)) {
                        state.config = std::move(proposal);
                        state.loops = loops;
                        ++state.insert_accepted;
                    }
                }
            }
        } else {
            ++state.delete_proposed;
            const std::size_t total = state.config.total_links();
            if (total > 0) {
                const std::size_t idx = rng.index(total);
                LinkConfig proposal = state.config;
                proposal.erase_in_place(idx);
                const std::size_t loops = builder.build(tree, proposal).loop_count();
                const double delta = static_cast<double>(loops) - static_cast<double>(state.loops);
                const double log_a = delta * log_theta + std::log(static_cast<double>(total)) - std::log(rate);
                if (log_a >= 0.0 || rng.uniform() < std::exp(log_a)) {
                    state.config = std::move(proposal);
                    state.loops = loops;
                    ++state.delete_accepted;
                }
            }
        }
        state.log_weight = static_cast<double>(state.loops) * log_theta;
        ++state.steps;

        if (state.steps % schedule.check_interval == 0) {
            const std::size_t fresh = builder.build(tree, state.config).loop_count();
            if (fresh != state.loops)
                throw std::logic_error("mcmc: cached loop count " + std::to_string(state.loops) +
                                       " differs from recomputed " + std::to_string(fresh) + " at step " +
                                       std::to_string(state.steps));
        }

        if (step >= schedule.burn_in && (step - schedule.burn_in) % schedule.thin == 0) {
            const LoopPartition& partition = builder.build(tree, state.config);
            const EventContext ctx{tree, state.config, partition};
            for (std::size_t e = 0; e < events.size(); ++e) hits[e].push_back(events[e].test(ctx) ? 1.0 : 0.0);
            if (edges > 0)
                link_means.push_back(static_cast<double>(state.config.total_links()) / static_cast<double>(edges));
            if (schedule.record_link_times && state.config.total_links() > 0) {
                const auto all = state.config.all();
                result.link_times.push_back(all[rng.index(all.size())].time);
            }
            ++result.recorded;
        }
    }

    for (std::size_t e = 0; e < events.size(); ++e) {
        RatioEstimate r;
        r.method = EstimatorMethod::mcmc;
        r.n_samples = result.recorded;
        double sum = 0.0;
        for (double h : hits[e]) sum += h;
        r.numerator_sum = sum;
        r.denominator_sum = static_cast<double>(result.recorded);
        r.raw_value = sum / r.denominator_sum;
        r.value = r.raw_value;
        r.std_error = batch_means_error(hits[e], schedule.batches);
        r.effective_sample_size = static_cast<double>(result.recorded);
        result.estimates.push_back(r);
    }
    if (!link_means.empty()) {
        double sum = 0.0;
        for (double x : link_means) sum += x;
        result.mean_links_per_edge = sum / static_cast<double>(link_means.size());
        result.mean_links_std_error = batch_means_error(link_means, schedule.batches);
    }
    result.final_state = std::move(state);
    return result;
}

RatioEstimate mcmc_sampler(const Tree& tree, const ModelParams& params, std::uint64_t n_steps, std::uint64_t burn_in,
                           std::uint64_t thin, RandomStream& rng, const Event& event)
{
    McmcSchedule schedule;
    schedule.steps = n_steps;
    schedule.burn_in = burn_in;
    schedule.thin = thin;
    return run_mcmc(tree, params, std::span<const Event>(&event, 1), schedule, rng).estimates.front();
}

} // namespace looptree
