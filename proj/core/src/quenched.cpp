#include "looptree/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "looptree/importance.hpp"

namespace looptree {

namespace {

struct TreeOutcome {
    std::vector<double> values;
    std::size_t size = 0;
    double ess = 0.0;
};

} // namespace

QuenchedResult estimate_quenched(const OffspringDistribution& dist, std::uint32_t n, std::span<const std::uint32_t> ms,
                                 const ModelParams& params, const QuenchedOptions& options)
{
    params.validate();
    if (ms.empty()) throw std::invalid_argument("quenched: at least one m is required");
    for (std::uint32_t m : ms)
        if (m > n)
            throw std::invalid_argument("quenched: m = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
    if (options.n_trees < 2) throw std::invalid_argument("quenched: n_trees must be at least 2");
    if (options.samples_per_tree < 2) throw std::invalid_argument("quenched: samples_per_tree must be at least 2");

    std::vector<Event> events;
    for (std::uint32_t m : ms) events.push_back(Event::reach(m));

    auto outcomes = run_units<TreeOutcome>(options.n_trees, options.workers, [&](std::uint64_t t) {
        RandomStream tree_rng(derive_seed(options.seed, 0, t));
        const Tree tree = sample_gw_tree(dist, n, tree_rng, options.vertex_budget);
        ImportanceOptions inner;
        inner.samples = options.samples_per_tree;
        inner.proposal = options.proposal;
        inner.seed = derive_seed(options.seed, 1, t);
        inner.chunk_size = options.samples_per_tree;
        const auto estimates = estimate_weighted_probs(tree, params, events, inner);
        TreeOutcome out;
        out.size = tree.vertex_count();
        out.ess = estimates.front().effective_sample_size;
        for (const auto& e : estimates) out.values.push_back(e.value);
        return out;
    });

    QuenchedResult result;
    result.min_effective_sample_size = std::numeric_limits<double>::infinity();
    const double trees = static_cast<double>(options.n_trees);
    for (auto& o : outcomes) {
        result.per_tree.push_back(o.values);
        result.tree_sizes.push_back(o.size);
        result.min_effective_sample_size = std::min(result.min_effective_sample_size, o.ess);
    }
    for (std::size_t i = 0; i < ms.size(); ++i) {
        double sum = 0.0;
        for (const auto& o : outcomes) sum += o.values[i];
        const double mean = sum / trees;
        double ss = 0.0;
        for (const auto& o : outcomes) ss += (o.values[i] - mean) * (o.values[i] - mean);
        RatioEstimate r;
        r.method = EstimatorMethod::quenched;
        r.numerator_sum = sum;
        r.denominator_sum = trees;
        r.raw_value = mean;
        r.value = std::clamp(mean, 0.0, 1.0);
        r.n_samples = options.n_trees * options.samples_per_tree;
        r.std_error = std::sqrt(ss / (trees - 1.0) / trees);
        r.effective_sample_size = result.min_effective_sample_size;
        r.ess_warning = result.min_effective_sample_size < 0.01 * static_cast<double>(options.samples_per_tree);
        result.estimates.push_back(r);
    }
    return result;
}

RatioEstimate estimate_quenched(const OffspringDistribution& dist, std::uint32_t n, std::uint32_t m,
                                const ModelParams& params, std::uint64_t n_trees, std::uint64_t n_samples_per_tree,
                                RandomStream& rng)
{
    QuenchedOptions options;
    options.n_trees = n_trees;
    options.samples_per_tree = n_samples_per_tree;
    options.seed = rng.engine()();
    return estimate_quenched(dist, n, std::span<const std::uint32_t>(&m, 1), params, options).estimates.front();
}

} // namespace looptree
