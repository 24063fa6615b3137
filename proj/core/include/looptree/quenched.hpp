#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "looptree/edge_proposal.hpp"
#include "looptree/estimate.hpp"
#include "looptree/offspring.hpp"

namespace looptree {

struct QuenchedOptions {
    std::uint64_t n_trees = 200;
    std::uint64_t samples_per_tree = 1000;
    ProposalKind proposal = ProposalKind::tilted;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    std::uint64_t vertex_budget = default_vertex_budget;
};

struct QuenchedResult {
    /// One estimate per requested m, in input order.
    std::vector<RatioEstimate> estimates;
    /// per_tree[t][i]: estimate of event i on tree t.
    std::vector<std::vector<double>> per_tree;
    std::vector<std::size_t> tree_sizes;
    double min_effective_sample_size = 0.0;
};

/// Quenched probabilities E_GW[P^theta(E^{r->m})] for every m in `ms`.
///
/// Tree t is drawn from stream derive_seed(seed, 0, t) and its inner
/// importance estimate uses derive_seed(seed, 1, t); the work is parallel over
/// trees. The standard error is the spread of the per-tree estimates over
/// sqrt(n_trees), which already carries both the between-tree and the
/// within-tree noise.
QuenchedResult estimate_quenched(const OffspringDistribution& dist, std::uint32_t n, std::span<const std::uint32_t> ms,
                                 const ModelParams& params, const QuenchedOptions& options);

/// Single-m form drawing its seed from `rng`.
RatioEstimate estimate_quenched(const OffspringDistribution& dist, std::uint32_t n, std::uint32_t m,
                                const ModelParams& params, std::uint64_t n_trees, std::uint64_t n_samples_per_tree,
                                RandomStream& rng);

} // namespace looptree
