#include "looptree/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "looptree/random.hpp"

namespace looptree {

std::string to_string(EstimatorMethod method)
{
    switch (method) {
    case EstimatorMethod::importance: return "importance";
    case EstimatorMethod::mcmc: return "mcmc";
    case EstimatorMethod::cluster: return "cluster";
    case EstimatorMethod::quenched: return "quenched";
    }
    return "?";
}

Event Event::reach(std::uint32_t m)
{
    return {"reach(" + std::to_string(m) + ")",
            [m](const EventContext& c) { return event_reach(c.partition, c.tree, m); }};
}

Event Event::fail(VertexId x, std::uint32_t m)
{
    return {"fail(" + std::to_string(x) + "," + std::to_string(m) + ")",
            [x, m](const EventContext& c) { return event_fail(c.partition, c.tree, x, m); }};
}

Event Event::root_edges_at_most_one()
{
    return {"A", [](const EventContext& c) {
                for (VertexId child : c.tree.children(c.tree.root()))
                    if (c.config.link_count(Tree::edge_of(child)) > 1) return false;
                return true;
            }};
}

Event Event::root_edges_empty()
{
    return {"A_empty", [](const EventContext& c) {
                for (VertexId child : c.tree.children(c.tree.root()))
                    if (c.config.link_count(Tree::edge_of(child)) > 0) return false;
                return true;
            }};
}

Event Event::always()
{
    return {"always", [](const EventContext&) { return true; }};
}

WeightedSums::WeightedSums(std::size_t n_events) : sum_we_(n_events, 0.0), sum_w2e_(n_events, 0.0)
{
    if (n_events > max_events) throw std::invalid_argument("WeightedSums: at most 64 events are supported");
}

void WeightedSums::rescale_to(double new_anchor)
{
    if (n_ > 0) {
        const double f = std::exp(anchor_ - new_anchor);
        const double f2 = f * f;
        sum_w_ *= f;
        sum_w2_ *= f2;
        for (auto& s : sum_we_) s *= f;
        for (auto& s : sum_w2e_) s *= f2;
    }
    anchor_ = new_anchor;
}

void WeightedSums::add(double log_weight, std::uint64_t event_bits)
{
    if (!std::isfinite(log_weight)) throw std::runtime_error("importance weight is not finite");
    if (log_weight > anchor_) rescale_to(log_weight);
    const double w = std::exp(log_weight - anchor_);
    const double w2 = w * w;
    ++n_;
    sum_w_ += w;
    sum_w2_ += w2;
    for (std::size_t i = 0; i < sum_we_.size(); ++i) {
        if ((event_bits >> i) & 1U) {
            sum_we_[i] += w;
            sum_w2e_[i] += w2;
        }
    }
}

void WeightedSums::merge(const WeightedSums& other)
{
    if (other.sum_we_.size() != sum_we_.size()) throw std::invalid_argument("WeightedSums::merge: event count mismatch");
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    if (other.anchor_ > anchor_) rescale_to(other.anchor_);
    const double f = std::exp(other.anchor_ - anchor_);
    const double f2 = f * f;
    n_ += other.n_;
    sum_w_ += other.sum_w_ * f;
    sum_w2_ += other.sum_w2_ * f2;
    for (std::size_t i = 0; i < sum_we_.size(); ++i) {
        sum_we_[i] += other.sum_we_[i] * f;
        sum_w2e_[i] += other.sum_w2e_[i] * f2;
    }
}

RatioEstimate WeightedSums::ratio(std::size_t event, EstimatorMethod method) const
{
    if (event >= sum_we_.size()) throw std::out_of_range("WeightedSums::ratio: no such event");
    if (n_ == 0 || !(sum_w_ > 0.0)) throw std::runtime_error("ratio estimate requested with no positive weight");
    RatioEstimate r;
    r.method = method;
    r.n_samples = n_;
    r.log_scale = anchor_;
    r.numerator_sum = sum_we_[event];
    r.denominator_sum = sum_w_;
    r.raw_value = sum_we_[event] / sum_w_;
    r.value = std::clamp(r.raw_value, 0.0, 1.0);
    const double R = r.raw_value;
    const double spread = std::max(0.0, sum_w2e_[event] * (1.0 - 2.0 * R) + R * R * sum_w2_);
    r.std_error = std::sqrt(spread) / sum_w_;
    r.effective_sample_size = effective_sample_size();
    r.ess_warning = r.effective_sample_size < 0.01 * static_cast<double>(n_);
    return r;
}

double WeightedSums::log_mean_weight() const
{
    if (n_ == 0) throw std::runtime_error("log_mean_weight: no samples");
    return anchor_ + std::log(sum_w_ / static_cast<double>(n_));
}

double WeightedSums::relative_std_error() const
{
    if (n_ < 2) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(n_);
    const double mean = sum_w_ / n;
    const double var = std::max(0.0, (sum_w2_ / n - mean * mean) * n / (n - 1.0));
    return std::sqrt(var / n) / mean;
}

double WeightedSums::effective_sample_size() const
{
    return sum_w2_ > 0.0 ? sum_w_ * sum_w_ / sum_w2_ : 0.0;
}

std::vector<double> bootstrap_std_errors(const std::vector<WeightedDraw>& draws, std::size_t n_events,
                                         std::uint32_t resamples, std::uint64_t seed)
{
    std::vector<double> out(n_events, 0.0);
    if (draws.size() < 2 || resamples < 2) return out;
    double anchor = draws.front().log_weight;
    for (const auto& d : draws) anchor = std::max(anchor, d.log_weight);
    std::vector<double> weight(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) weight[i] = std::exp(draws[i].log_weight - anchor);

    RandomStream rng(derive_seed(seed, 0xb0075a4dULL));
    std::vector<double> sum(n_events), sum_sq(n_events);
    std::vector<double> num(n_events);
    const std::uint64_t n = draws.size();
    for (std::uint32_t b = 0; b < resamples; ++b) {
        std::fill(num.begin(), num.end(), 0.0);
        double den = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint64_t k = rng.engine()() % n;
            const double w = weight[k];
            den += w;
            const std::uint64_t bits = draws[k].event_bits;
            for (std::size_t e = 0; e < n_events; ++e)
                if ((bits >> e) & 1U) num[e] += w;
        }
        for (std::size_t e = 0; e < n_events; ++e) {
            const double r = den > 0.0 ? num[e] / den : 0.0;
            sum[e] += r;
            sum_sq[e] += r * r;
        }
    }
    const double B = resamples;
    for (std::size_t e = 0; e < n_events; ++e) {
        const double mean = sum[e] / B;
        out[e] = std::sqrt(std::max(0.0, (sum_sq[e] / B - mean * mean) * B / (B - 1.0)));
    }
    return out;
}

} // namespace looptree
