#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "looptree/links.hpp"
#include "looptree/random.hpp"

namespace looptree {

enum class ProposalKind {
    reference, ///< the Poisson link law itself
    tilted     ///< per-edge law reweighted by theta^(loops of the isolated edge - 2)
};

/// Per-edge sampling law for link configurations.
///
/// Edges are independent under both kinds. The tilted law multiplies the
/// reference probability of an edge pattern omega_e by psi(omega_e) =
/// theta^(L_iso(omega_e) - 2), where L_iso counts the loops of the edge taken
/// alone; patterns with more than `exact_table_limit` links use theta^-1.
/// The likelihood ratio of a whole configuration against the reference law is
///
///     log(rho / q) = E * log_normalizer() - sum over occupied edges of log psi.
///
/// Under the tilted law a forest of single links has constant weight
/// theta^L * rho / q, which is what keeps importance weights tame on large trees.
class EdgeProposal {
public:
    static constexpr std::uint32_t exact_table_limit = 12;

    EdgeProposal(const ModelParams& params, ProposalKind kind);

    ProposalKind kind() const noexcept { return kind_; }
    /// Probability that an edge carries at least one link.
    double occupancy() const noexcept { return occupancy_; }
    /// log of the per-edge normalising constant c (0 for the reference law).
    double log_normalizer() const noexcept { return log_norm_; }

    /// Draws the links of one occupied edge and appends them (time sorted).
    /// Returns log psi of the drawn pattern.
    double sample_occupied(EdgeId e, RandomStream& rng, std::vector<PlacedLink>& out) const;

    /// Replaces `config` with a fresh draw over all its edges. Returns the sum
    /// of log psi over occupied edges.
    double sample(LinkConfig& config, RandomStream& rng) const;

    /// Visits occupied edges among [0, count) in increasing order using
    /// geometric skips; `visit(index)` is called once per occupied edge.
    template <class Visit>
    void for_each_occupied(std::uint64_t count, RandomStream& rng, Visit&& visit) const
    {
        if (occupancy_ <= 0.0) return;
        std::uint64_t pos = rng.geometric(occupancy_);
        while (pos < count) {
            visit(pos);
            pos += 1 + rng.geometric(occupancy_);
        }
    }

    /// Loops of a single edge with the given kind sequence (bit i set = link i is a bar).
    static std::uint32_t isolated_edge_loops(std::uint32_t links, std::uint64_t bar_mask);

    /// log psi for an edge carrying `kinds` in time order.
    double log_tilt(std::span<const PlacedLink> edge_links) const;

private:
    std::uint32_t sample_count(RandomStream& rng) const;

    ProposalKind kind_;
    ModelParams params_;
    double occupancy_ = 0.0;
    double log_norm_ = 0.0;
    // Distribution of the link count given occupancy: entries 1..limit, then the tail bucket.
    std::vector<double> count_cdf_;
    double tail_mass_ = 0.0; // reference Poisson mass above the limit
    // Per count k <= limit: cumulative weights over the 2^k kind masks, and log psi per mask.
    std::vector<std::vector<double>> mask_cdf_;
    std::vector<std::vector<double>> mask_log_tilt_;
};

} // namespace looptree
