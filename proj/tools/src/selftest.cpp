#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "looptree/bounds.hpp"
#include "looptree/cli/commands.hpp"
#include "looptree/measure.hpp"

namespace looptree::cli {

namespace {

struct Suite {
    std::string name;
    std::function<std::string()> run; // empty string on success
};

std::string trees_suite()
{
    if (regular_tree(2, 2).vertex_count() != 7) return "regular_tree(2,2) size";
    if (regular_tree(3, 3).vertex_count() != 40) return "regular_tree(3,3) size";
    RandomStream rng(1);
    if (!(sample_gw_tree(OffspringDistribution::deterministic(3), 3, rng) == regular_tree(3, 3)))
        return "deterministic GW differs from regular tree";
    for (int i = 0; i < 200; ++i) sample_gw_tree(OffspringDistribution::poisson(2.0), 4, rng).check_invariants();
    return {};
}

std::string links_suite()
{
    const Tree tree = regular_tree(2, 3);
    RandomStream rng(2);
    for (int i = 0; i < 500; ++i) {
        const auto config = sample_links(tree, ModelParams{1.0, 1.5, 0.5}, rng);
        config.check_invariants();
        std::istringstream in(to_text(config));
        if (!(read_links(in, tree.edge_count()) == config)) return "text round trip";
        if (!config.empty()) {
            const auto first = config.all().front();
            const auto removed = config.remove_link(first.edge, 0);
            if (!(removed.insert_link(first.edge, {first.time, first.kind}) == config)) return "remove/insert";
        }
    }
    return {};
}

std::string loops_suite()
{
    const Tree edge = Tree::from_parents({no_vertex, 0});
    auto pair = [&](LinkKind a, LinkKind b) {
        return build_loops(edge, LinkConfig::from_links(1, {{0, 0.25, a}, {0, 0.75, b}})).loop_count();
    };
    if (pair(LinkKind::cross, LinkKind::cross) != 2 || pair(LinkKind::bar, LinkKind::bar) != 2 ||
        pair(LinkKind::cross, LinkKind::bar) != 1)
        return "two-link single edge table";
    RandomStream rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Tree tree = sample_gw_tree(OffspringDistribution::poisson(2.0), 3, rng);
        const auto config = sample_links(tree, ModelParams{1.0, 0.8, 0.5}, rng);
        if (!check_prop1(tree, config).holds) return "loop count sandwich violated";
        if (tree.edge_count() == 0) continue;
        const auto e = static_cast<EdgeId>(rng.index(tree.edge_count()));
        const auto grown = config.insert_link(e, {rng.uniform(0.8), LinkKind::cross});
        const long long diff = static_cast<long long>(build_loops(tree, grown).loop_count()) -
                               static_cast<long long>(build_loops(tree, config).loop_count());
        if (diff < -1 || diff > 1) return "single insertion changed L by more than one";
    }
    return {};
}

std::string measure_suite()
{
    const Tree star = regular_tree(3, 1);
    ImportanceOptions o;
    o.samples = 2000;
    o.seed = 4;
    if (estimate_partition_function(star, ModelParams{1.0, 0.5, 0.5}, o).value() != 1.0)
        return "theta = 1 partition function";
    const Event always = Event::always();
    const auto r = estimate_weighted_probs(star, ModelParams{2.0, 0.5, 0.5}, std::span(&always, 1), o).front();
    if (r.value != 1.0 || r.std_error != 0.0) return "always event";
    return {};
}

std::string bounds_suite()
{
    for (double theta = 1.0; theta <= 4.0; theta += 0.5)
        for (double beta = 0.0; beta <= 2.0; beta += 0.25)
            for (std::uint64_t d = 0; d <= 10; ++d) {
                const std::vector<double> f(d, theta);
                const auto pb = partition_bounds(d, ModelParams{theta, beta, 0.5}, f);
                if (pb.lower > pb.upper * (1.0 + 1e-12)) return "partition bound ordering";
            }
    const auto poisson = OffspringDistribution::poisson(3.0);
    const ModelParams p{2.0, 0.3, 0.5};
    const double closed = q_tilde(poisson, p);
    const double series = q_tilde(poisson, p, MomentMethod::series);
    if (std::abs(closed - series) > 1e-10 * std::abs(closed)) return "q_tilde closed form vs series";
    if (std::abs(c_d(1.0, 2.0, 10000) - 0.5) > 0.01) return "c_d limit";
    return {};
}

std::string determinism_suite()
{
    ExperimentConfig c;
    c.d = 2;
    c.n = 3;
    c.theta = 2.0;
    c.betas = {0.5};
    c.ms = {0, 1, 2, 3};
    c.samples = 3000;
    c.seed = 42;
    std::ostringstream one;
    cmd_simulate(c, one);
    c.workers = 3;
    std::ostringstream three;
    cmd_simulate(c, three);
    if (one.str() != three.str()) return "output depends on worker count";
    return {};
}

} // namespace

bool cmd_selftest(std::ostream& out)
{
    const std::vector<Suite> suites{{"trees", trees_suite},   {"links", links_suite},   {"loops", loops_suite},
                                    {"measure", measure_suite}, {"bounds", bounds_suite},
                                    {"determinism", determinism_suite}};
    bool ok = true;
    for (const auto& s : suites) {
        std::string problem;
        try {
            problem = s.run();
        } catch (const std::exception& e) {
            problem = std::string("exception: ") + e.what();
        }
        if (problem.empty()) {
            out << "PASS " << s.name << '\n';
        } else {
            ok = false;
            out << "FAIL " << s.name << ": " << problem << '\n';
        }
    }
    return ok;
}

} // namespace looptree::cli
