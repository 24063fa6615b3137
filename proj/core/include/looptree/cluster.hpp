#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "looptree/edge_proposal.hpp"
#include "looptree/estimate.hpp"
#include "looptree/links.hpp"

namespace looptree {

struct ClusterOptions {
    std::uint64_t samples = 100000;
    /// Samples used to calibrate each level factor g_k.
    std::uint64_t level_samples = 100000;
    ProposalKind proposal = ProposalKind::tilted;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    std::uint64_t chunk_size = 4096;
    /// Largest root cluster accepted before failing.
    std::uint64_t cluster_budget = 1'000'000;
};

struct ClusterResult {
    std::vector<RatioEstimate> estimates;
    /// log g_k for k = 0 .. n-1.
    std::vector<double> log_level_factor;
    /// Relative standard error of each calibrated g_k (0 for k = 0).
    std::vector<double> level_relative_error;
    double mean_cluster_size = 0.0;
};

/// P^theta on the d-ary tree of depth n for events decided by the root
/// cluster, without materialising the tree.
///
/// The root cluster is the set of vertices joined to the root by edges
/// carrying links. Loops through the root live inside it, and the rest of the
/// tree factorises into independent full subtrees hanging off empty edges. A
/// draw explores the cluster only; the subtrees are accounted for by level
/// factors g_k, which are calibrated level by level from the identity
/// E[weight] = 1 on the depth-k tree.
///
/// Events are evaluated with EventContext::tree set to the cluster (vertices
/// relabelled in breadth-first order, generations preserved), so they must
/// only look at the root's loops and root edges: reach, fail at the root,
/// A and A_empty qualify.
ClusterResult estimate_regular_cluster(std::uint32_t d, std::uint32_t n, const ModelParams& params,
                                       std::span<const Event> events, const ClusterOptions& options);

/// One draw of the root cluster. Exposed for benchmarks and tests.
class ClusterSampler {
public:
    ClusterSampler(std::uint32_t d, const ModelParams& params, ProposalKind proposal, std::uint64_t budget);

    /// Draws the cluster of a depth-`depth` tree and returns
    /// L_C log(theta) - sum log psi + sum over non-root cluster vertices of log g.
    double draw(std::uint32_t depth, std::span<const double> log_g, RandomStream& rng);

    const Tree& cluster() const noexcept { return cluster_; }
    const LinkConfig& config() const noexcept { return config_; }
    const LoopPartition& partition() const noexcept { return builder_.partition(); }
    /// log of the likelihood-ratio constant per explored edge.
    double log_edge_normalizer() const noexcept { return proposal_.log_normalizer(); }

private:
    std::uint32_t d_;
    ModelParams params_;
    EdgeProposal proposal_;
    std::uint64_t budget_;
    std::vector<VertexId> parents_;
    std::vector<std::uint32_t> gen_;
    std::vector<PlacedLink> links_;
    Tree cluster_;
    LinkConfig config_;
    LoopBuilder builder_;
};

} // namespace looptree
