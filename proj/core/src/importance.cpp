#include "looptree/importance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "looptree/loops.hpp"

namespace looptree {

namespace {

struct ChunkResult {
    WeightedSums sums;
    std::vector<WeightedDraw> draws;
};

ChunkResult run_chunk(const Tree& tree, const ModelParams& params, const EdgeProposal& proposal,
                      std::span<const Event> events, std::uint64_t seed, std::uint64_t chunk, std::uint64_t count,
                      bool keep_draws)
{
    ChunkResult out{WeightedSums(events.size()), {}};
    if (keep_draws) out.draws.reserve(count);
    RandomStream rng(derive_seed(seed, chunk));
    LoopBuilder builder;
    LinkConfig config(tree.edge_count());
    const double log_theta = std::log(params.theta);
    const double log_norm = static_cast<double>(tree.edge_count()) * proposal.log_normalizer();
    for (std::uint64_t i = 0; i < count; ++i) {
        const double log_psi = proposal.sample(config, rng);
        const LoopPartition& partition = builder.build(tree, config);
        const double log_w = static_cast<double>(partition.loop_count()) * log_theta + log_norm - log_psi;
        const EventContext ctx{tree, config, partition};
        std::uint64_t bits = 0;
        for (std::size_t e = 0; e < events.size(); ++e)
            if (events[e].test(ctx)) bits |= std::uint64_t{1} << e;
        out.sums.add(log_w, bits);
        if (keep_draws) out.draws.push_back({log_w, bits});
    }
    return out;
}

void check_samples(std::uint64_t n)
{
    if (n < 2) throw std::invalid_argument("samples must be at least 2, got " + std::to_string(n));
}

} // namespace

std::vector<RatioEstimate> estimate_weighted_probs(const Tree& tree, const ModelParams& params,
                                                   std::span<const Event> events, const ImportanceOptions& options)
{
    params.validate();
    check_samples(options.samples);
    if (events.empty()) throw std::invalid_argument("at least one event is required");
    if (events.size() > WeightedSums::max_events) throw std::invalid_argument("at most 64 events per run");
    if (options.chunk_size == 0) throw std::invalid_argument("chunk_size must be positive");

    const EdgeProposal proposal(params, options.proposal);
    const std::uint64_t chunk = options.chunk_size;
    const std::uint64_t units = (options.samples + chunk - 1) / chunk;
    const bool keep = options.bootstrap_resamples > 0;
    auto parts = run_units<ChunkResult>(units, options.workers, [&](std::uint64_t unit) {
        const std::uint64_t begin = unit * chunk;
        const std::uint64_t count = std::min(chunk, options.samples - begin);
        return run_chunk(tree, params, proposal, events, options.seed, unit, count, keep);
    });

    WeightedSums total(events.size());
    std::vector<WeightedDraw> draws;
    for (auto& p : parts) {
        total.merge(p.sums);
        if (keep) draws.insert(draws.end(), p.draws.begin(), p.draws.end());
    }
    std::vector<double> boot;
    if (keep) boot = bootstrap_std_errors(draws, events.size(), options.bootstrap_resamples, options.seed);

    std::vector<RatioEstimate> out;
    out.reserve(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        out.push_back(total.ratio(e, EstimatorMethod::importance));
        if (keep) out.back().bootstrap_std_error = boot[e];
    }
    return out;
}

RatioEstimate estimate_weighted_prob(const Event& event, const Tree& tree, const ModelParams& params,
                                     std::uint64_t n_samples, RandomStream& rng, std::uint32_t bootstrap_resamples)
{
    ImportanceOptions options;
    options.samples = n_samples;
    options.seed = rng.engine()();
    options.bootstrap_resamples = bootstrap_resamples;
    return estimate_weighted_probs(tree, params, std::span<const Event>(&event, 1), options).front();
}

double PartitionEstimate::value() const
{
    return mean * std::exp(log_anchor);
}

double PartitionEstimate::value_std_error() const
{
    return std_error * std::exp(log_anchor);
}

double PartitionEstimate::log_value() const
{
    return log_anchor + std::log(mean);
}

PartitionEstimate estimate_partition_function(const Tree& tree, const ModelParams& params,
                                              const ImportanceOptions& options)
{
    params.validate();
    check_samples(options.samples);
    if (options.chunk_size == 0) throw std::invalid_argument("chunk_size must be positive");
    const EdgeProposal proposal(params, options.proposal);
    const std::uint64_t chunk = options.chunk_size;
    const std::uint64_t units = (options.samples + chunk - 1) / chunk;
    auto parts = run_units<ChunkResult>(units, options.workers, [&](std::uint64_t unit) {
        const std::uint64_t begin = unit * chunk;
        const std::uint64_t count = std::min(chunk, options.samples - begin);
        return run_chunk(tree, params, proposal, {}, options.seed, unit, count, false);
    });
    WeightedSums total(0);
    for (auto& p : parts) total.merge(p.sums);

    PartitionEstimate out;
    out.n_samples = total.count();
    out.log_anchor = total.anchor();
    out.mean = std::exp(total.log_mean_weight() - total.anchor());
    out.std_error = out.mean * total.relative_std_error();
    if (!std::isfinite(out.log_anchor) || !std::isfinite(out.mean) || !(out.mean > 0.0))
        throw std::runtime_error("partition function overflowed on a tree with " +
                                 std::to_string(tree.vertex_count()) + " vertices");
    if (total.relative_std_error() == 0.0) out.std_error = 0.0;
    return out;
}

PartitionEstimate estimate_partition_function(const Tree& tree, const ModelParams& params, std::uint64_t n_samples,
                                              RandomStream& rng)
{
    ImportanceOptions options;
    options.samples = n_samples;
    options.seed = rng.engine()();
    return estimate_partition_function(tree, params, options);
}

} // namespace looptree
