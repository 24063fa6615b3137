#include "looptree/edge_proposal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "looptree/loops.hpp"

namespace looptree {

namespace {

double poisson_pmf(double mean, std::uint32_t k)
{
    return std::exp(static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
}

void draw_sorted_times(std::size_t k, double beta, RandomStream& rng, std::vector<double>& times)
{
    times.resize(k);
    for (;;) {
        for (auto& t : times) t = rng.uniform(beta);
        std::sort(times.begin(), times.end());
        if (std::adjacent_find(times.begin(), times.end()) == times.end()) return;
        // Exact ties are resampled so every edge stays strictly ordered.
    }
}

} // namespace

std::uint32_t EdgeProposal::isolated_edge_loops(std::uint32_t links, std::uint64_t bar_mask)
{
    if (links == 0) return 2;
    static const Tree edge = Tree::from_parents({no_vertex, 0});
    std::vector<PlacedLink> placed;
    for (std::uint32_t i = 0; i < links; ++i)
        placed.push_back({0, static_cast<double>(i + 1), ((bar_mask >> i) & 1U) ? LinkKind::bar : LinkKind::cross});
    LoopBuilder builder;
    return static_cast<std::uint32_t>(builder.build(edge, LinkConfig::from_links(1, std::move(placed))).loop_count());
}

EdgeProposal::EdgeProposal(const ModelParams& params, ProposalKind kind) : kind_(kind), params_(params)
{
    params.validate();
    const double beta = params.beta;
    const double log_theta = std::log(params.theta);
    const double p0 = std::exp(-beta);

    // Weight of each count k >= 1 under q (before normalisation).
    std::vector<double> count_weight(exact_table_limit + 1, 0.0);
    double head_mass = 0.0;
    mask_cdf_.assign(exact_table_limit + 1, {});
    mask_log_tilt_.assign(exact_table_limit + 1, {});
    for (std::uint32_t k = 1; k <= exact_table_limit; ++k) {
        const double pk = poisson_pmf(beta, k);
        head_mass += pk;
        if (kind_ == ProposalKind::reference) {
            count_weight[k] = pk;
            continue;
        }
        const std::uint64_t masks = std::uint64_t{1} << k;
        auto& cdf = mask_cdf_[k];
        auto& tilt = mask_log_tilt_[k];
        cdf.resize(masks);
        tilt.resize(masks);
        double acc = 0.0;
        for (std::uint64_t mask = 0; mask < masks; ++mask) {
            const auto bars = static_cast<double>(__builtin_popcountll(mask));
            const double prior = std::pow(params.u, static_cast<double>(k) - bars) * std::pow(1.0 - params.u, bars);
            const double lt = (static_cast<double>(isolated_edge_loops(k, mask)) - 2.0) * log_theta;
            tilt[mask] = lt;
            acc += prior * std::exp(lt);
            cdf[mask] = acc;
        }
        count_weight[k] = pk * acc;
    }
    tail_mass_ = std::max(0.0, -std::expm1(-beta) - head_mass);
    const double tail_weight = kind_ == ProposalKind::reference ? tail_mass_ : tail_mass_ / params.theta;

    double occupied_weight = tail_weight;
    for (std::uint32_t k = 1; k <= exact_table_limit; ++k) occupied_weight += count_weight[k];
    if (kind_ == ProposalKind::reference) occupied_weight = -std::expm1(-beta);

    const double norm = p0 + occupied_weight;
    log_norm_ = kind_ == ProposalKind::reference ? 0.0 : std::log(norm);
    occupancy_ = occupied_weight / norm;

    count_cdf_.assign(exact_table_limit + 1, 0.0);
    double acc = 0.0;
    for (std::uint32_t k = 1; k <= exact_table_limit; ++k) {
        acc += count_weight[k];
        count_cdf_[k - 1] = acc / occupied_weight;
    }
    count_cdf_[exact_table_limit] = 1.0;
}

std::uint32_t EdgeProposal::sample_count(RandomStream& rng) const
{
    const double u = rng.uniform();
    auto it = std::upper_bound(count_cdf_.begin(), count_cdf_.end(), u);
    const auto bucket = static_cast<std::uint32_t>(it - count_cdf_.begin());
    if (bucket < exact_table_limit) return bucket + 1;
    // Tail: invert the reference Poisson law restricted to k > limit.
    const double beta = params_.beta;
    double target = rng.uniform() * tail_mass_;
    std::uint32_t k = exact_table_limit + 1;
    for (;; ++k) {
        const double pk = poisson_pmf(beta, k);
        if (target < pk || pk == 0.0 || k > exact_table_limit + 100000) return k;
        target -= pk;
    }
}

double EdgeProposal::sample_occupied(EdgeId e, RandomStream& rng, std::vector<PlacedLink>& out) const
{
    const std::uint32_t k = sample_count(rng);
    thread_local std::vector<double> times;
    draw_sorted_times(k, params_.beta, rng, times);

    double log_tilt = 0.0;
    if (kind_ == ProposalKind::tilted && k <= exact_table_limit) {
        const auto& cdf = mask_cdf_[k];
        const double target = rng.uniform() * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.end()) --it;
        const auto mask = static_cast<std::uint64_t>(it - cdf.begin());
        for (std::uint32_t i = 0; i < k; ++i)
            out.push_back({e, times[i], ((mask >> i) & 1U) ? LinkKind::bar : LinkKind::cross});
        log_tilt = mask_log_tilt_[k][mask];
    } else {
        for (std::uint32_t i = 0; i < k; ++i)
            out.push_back({e, times[i], rng.bernoulli(params_.u) ? LinkKind::cross : LinkKind::bar});
        if (kind_ == ProposalKind::tilted) log_tilt = -std::log(params_.theta);
    }
    return log_tilt;
}

double EdgeProposal::sample(LinkConfig& config, RandomStream& rng) const
{
    config.links_.clear();
    double log_tilt = 0.0;
    for_each_occupied(config.edge_count(), rng, [&](std::uint64_t e) {
        log_tilt += sample_occupied(static_cast<EdgeId>(e), rng, config.links_);
    });
    return log_tilt;
}

double EdgeProposal::log_tilt(std::span<const PlacedLink> edge_links) const
{
    if (kind_ == ProposalKind::reference || edge_links.empty()) return 0.0;
    const auto k = static_cast<std::uint32_t>(edge_links.size());
    if (k > exact_table_limit) return -std::log(params_.theta);
    std::uint64_t mask = 0;
    for (std::uint32_t i = 0; i < k; ++i)
        if (edge_links[i].kind == LinkKind::bar) mask |= std::uint64_t{1} << i;
    return mask_log_tilt_[k][mask];
}

} // namespace looptree
