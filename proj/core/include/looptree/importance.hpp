#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "looptree/edge_proposal.hpp"
#include "looptree/estimate.hpp"
#include "looptree/links.hpp"
#include "looptree/random.hpp"
#include "looptree/tree.hpp"

namespace looptree {

struct ImportanceOptions {
    std::uint64_t samples = 10000;
    ProposalKind proposal = ProposalKind::reference;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    /// 0 disables the bootstrap cross-check.
    std::uint32_t bootstrap_resamples = 0;
    /// Samples per work unit. Each unit owns the stream derive_seed(seed, unit).
    std::uint64_t chunk_size = 4096;
};

/// Paired self-normalised estimates of P^theta for several events.
///
/// Every draw is scored against all events, so monotone families of events
/// give exactly monotone estimates. Output is independent of `workers`.
std::vector<RatioEstimate> estimate_weighted_probs(const Tree& tree, const ModelParams& params,
                                                   std::span<const Event> events, const ImportanceOptions& options);

/// Single-event form drawing its seed from `rng`. Plain reference sampling;
/// with theta = 1 the result is the empirical frequency of the event.
RatioEstimate estimate_weighted_prob(const Event& event, const Tree& tree, const ModelParams& params,
                                     std::uint64_t n_samples, RandomStream& rng,
                                     std::uint32_t bootstrap_resamples = 200);

/// Monte Carlo estimate of E[theta^L], held as mean * exp(log_anchor).
struct PartitionEstimate {
    double log_anchor = 0.0;
    double mean = 0.0;      ///< scaled by exp(-log_anchor)
    double std_error = 0.0; ///< scaled by exp(-log_anchor)
    std::uint64_t n_samples = 0;

    double value() const;
    double value_std_error() const;
    double log_value() const;
};

PartitionEstimate estimate_partition_function(const Tree& tree, const ModelParams& params,
                                              const ImportanceOptions& options);

PartitionEstimate estimate_partition_function(const Tree& tree, const ModelParams& params, std::uint64_t n_samples,
                                              RandomStream& rng);

} // namespace looptree
