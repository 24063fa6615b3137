#include "looptree/cluster.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace looptree {

ClusterSampler::ClusterSampler(std::uint32_t d, const ModelParams& params, ProposalKind proposal,
                               std::uint64_t budget)
    : d_(d), params_(params), proposal_(params, proposal), budget_(budget)
{
    if (d == 0) throw std::invalid_argument("cluster sampler: d must be at least 1");
}

double ClusterSampler::draw(std::uint32_t depth, std::span<const double> log_g, RandomStream& rng)
{
    parents_.assign(1, no_vertex);
    gen_.assign(1, 0);
    links_.clear();
    double log_psi = 0.0;
    double log_levels = 0.0;
    for (std::size_t v = 0; v < parents_.size(); ++v) {
        const std::uint32_t g = gen_[v];
        if (v > 0) log_levels += log_g[depth - g];
        if (g == depth) continue;
        proposal_.for_each_occupied(d_, rng, [&](std::uint64_t) {
            if (parents_.size() >= budget_)
                throw std::length_error("root cluster exceeded " + std::to_string(budget_) + " vertices");
            const auto child = static_cast<VertexId>(parents_.size());
            parents_.push_back(static_cast<VertexId>(v));
            gen_.push_back(g + 1);
            log_psi += proposal_.sample_occupied(Tree::edge_of(child), rng, links_);
        });
    }
    cluster_ = Tree::from_parents(parents_);
    config_ = LinkConfig::from_links(cluster_.edge_count(), links_);
    const auto& partition = builder_.build(cluster_, config_);
    return static_cast<double>(partition.loop_count()) * std::log(params_.theta) - log_psi + log_levels;
}

namespace {

struct ClusterChunk {
    WeightedSums sums;
    double vertices = 0.0;
};

template <class Score>
std::vector<ClusterChunk> run_level(std::uint32_t d, std::uint32_t depth, const ModelParams& params,
                                    const ClusterOptions& options, std::uint64_t samples, std::uint64_t stream,
                                    std::span<const double> log_g, std::size_t n_events, const Score& score)
{
    const std::uint64_t chunk = options.chunk_size;
    const std::uint64_t units = (samples + chunk - 1) / chunk;
    return run_units<ClusterChunk>(units, options.workers, [&](std::uint64_t unit) {
        ClusterChunk out{WeightedSums(n_events)};
        ClusterSampler sampler(d, params, options.proposal, options.cluster_budget);
        RandomStream rng(derive_seed(options.seed, stream, unit));
        const std::uint64_t count = std::min(chunk, samples - unit * chunk);
        for (std::uint64_t i = 0; i < count; ++i) {
            const double log_w = sampler.draw(depth, log_g, rng);
            out.sums.add(log_w, score(sampler));
            out.vertices += static_cast<double>(sampler.cluster().vertex_count());
        }
        return out;
    });
}

} // namespace

ClusterResult estimate_regular_cluster(std::uint32_t d, std::uint32_t n, const ModelParams& params,
                                       std::span<const Event> events, const ClusterOptions& options)
{
    params.validate();
    if (d == 0) throw std::invalid_argument("cluster estimator: d must be at least 1");
    if (options.samples < 2) throw std::invalid_argument("cluster estimator: samples must be at least 2");
    if (n > 0 && options.level_samples < 2)
        throw std::invalid_argument("cluster estimator: level_samples must be at least 2");
    if (options.chunk_size == 0) throw std::invalid_argument("chunk_size must be positive");
    if (events.size() > WeightedSums::max_events) throw std::invalid_argument("at most 64 events per run");

    ClusterResult result;
    result.log_level_factor.assign(1, -std::log(params.theta));
    result.level_relative_error.assign(1, 0.0);

    for (std::uint32_t k = 1; k < n; ++k) {
        auto parts = run_level(d, k, params, options, options.level_samples, 1 + k, result.log_level_factor, 0,
                               [](const ClusterSampler&) { return std::uint64_t{0}; });
        WeightedSums level(0);
        for (auto& p : parts) level.merge(p.sums);
        // g_k absorbs the likelihood-ratio constant of the d edges explored below
        // a vertex, so the depth-k identity is simply g_k * E[w] = 1.
        result.log_level_factor.push_back(-level.log_mean_weight());
        result.level_relative_error.push_back(level.relative_std_error());
    }

    auto parts = run_level(d, n, params, options, options.samples, 0, result.log_level_factor, events.size(),
                           [&](const ClusterSampler& s) {
                               const EventContext ctx{s.cluster(), s.config(), s.partition()};
                               std::uint64_t bits = 0;
                               for (std::size_t e = 0; e < events.size(); ++e)
                                   if (events[e].test(ctx)) bits |= std::uint64_t{1} << e;
                               return bits;
                           });
    WeightedSums total(events.size());
    double vertices = 0.0;
    for (auto& p : parts) {
        total.merge(p.sums);
        vertices += p.vertices;
    }
    result.mean_cluster_size = vertices / static_cast<double>(total.count());
    for (std::size_t e = 0; e < events.size(); ++e) result.estimates.push_back(total.ratio(e, EstimatorMethod::cluster));
    return result;
}

} // namespace looptree
