#include <doctest.h>

#include <cmath>
#include <sstream>

#include "looptree/edge_proposal.hpp"
#include "looptree/links.hpp"

using namespace looptree;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& xs)
{
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(xs.size() - 1);
    return m;
}

const Tree& single_edge()
{
    static const Tree t = Tree::from_parents({no_vertex, 0});
    return t;
}

} // namespace

TEST_SUITE("links")
{
    TEST_CASE("parameter validation")
    {
        CHECK_THROWS_AS((ModelParams{0.5, 1.0, 0.5}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((ModelParams{1.0, 0.0, 0.5}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((ModelParams{1.0, 1.0, 1.5}.validate()), std::invalid_argument);
        CHECK_NOTHROW((ModelParams{1.0, 1.0, 1.0}.validate()));
    }

    TEST_CASE("tiny beta leaves every edge empty")
    {
        const Tree t = regular_tree(2, 3);
        RandomStream rng(1);
        int empty = 0;
        for (int i = 0; i < 10000; ++i) empty += sample_links(t, ModelParams{1.0, 1e-9, 0.5}, rng).empty();
        CHECK(empty / 10000.0 >= 1.0 - 1e-6);
    }

    TEST_CASE("link count is Poisson(beta) for every u")
    {
        const double beta = 2.0;
        const int draws = 100000;
        for (double u : {0.0, 0.25, 0.5, 1.0}) {
            CAPTURE(u);
            RandomStream rng(static_cast<std::uint64_t>(100 * u) + 3);
            std::vector<double> counts;
            double crosses = 0.0, total = 0.0;
            for (int i = 0; i < draws; ++i) {
                const auto c = sample_links(single_edge(), ModelParams{1.0, beta, u}, rng);
                counts.push_back(static_cast<double>(c.total_links()));
                for (const auto& l : c.all()) {
                    total += 1.0;
                    crosses += l.kind == LinkKind::cross;
                }
            }
            const auto m = moments(counts);
            CHECK(std::abs(m.mean - beta) <= 3.0 * std::sqrt(beta / draws));
            // Var of the sample variance for Poisson(beta): (beta + 2 beta^2) / n.
            CHECK(std::abs(m.var - beta) <= 3.0 * std::sqrt((beta + 2.0 * beta * beta) / draws));
            const double frac = crosses / total;
            const double se = std::sqrt(std::max(u * (1.0 - u), 1e-12) / total);
            CHECK(std::abs(frac - u) <= 3.0 * se + 1e-12);
        }
    }

    TEST_CASE("u = 1 draws no bars")
    {
        RandomStream rng(4);
        for (int i = 0; i < 5000; ++i)
            for (const auto& l : sample_links(single_edge(), ModelParams{1.0, 2.0, 1.0}, rng).all())
                CHECK(l.kind == LinkKind::cross);
    }

    TEST_CASE("times are sorted, distinct and inside [0, beta)")
    {
        const Tree t = regular_tree(3, 2);
        RandomStream rng(5);
        for (int i = 0; i < 2000; ++i) {
            const auto c = sample_links(t, ModelParams{1.0, 3.0, 0.5}, rng);
            c.check_invariants();
            for (const auto& l : c.all()) CHECK((l.time >= 0.0 && l.time < 3.0));
        }
    }

    TEST_CASE("root edge profile")
    {
        const Tree star = regular_tree(3, 1);
        const LinkConfig empty(3);
        const auto p0 = root_edge_profile(star, empty);
        CHECK(p0 == std::vector<std::uint32_t>{0, 0, 0});
        CHECK(root_events::all_empty(p0));
        CHECK(root_events::all_at_most_one(p0));

        const auto one = LinkConfig::from_links(3, {{1, 0.2, LinkKind::cross}});
        const auto p1 = root_edge_profile(star, one);
        CHECK(p1 == std::vector<std::uint32_t>{0, 1, 0});
        CHECK(root_events::all_at_most_one(p1));
        CHECK_FALSE(root_events::all_empty(p1));
        CHECK(root_events::exactly_one_on(p1, 0b010));
        CHECK_FALSE(root_events::exactly_one_on(p1, 0b011));
        CHECK(root_events::occupied_exactly(p1, 0b010));

        const auto two = LinkConfig::from_links(3, {{1, 0.2, LinkKind::cross}, {1, 0.4, LinkKind::bar}});
        const auto p2 = root_edge_profile(star, two);
        CHECK_FALSE(root_events::all_at_most_one(p2));
        CHECK_FALSE(root_events::exactly_one_on(p2, 0b010));
        CHECK(root_events::occupied_exactly(p2, 0b010));
    }

    TEST_CASE("unweighted probability of no root links")
    {
        const Tree star = regular_tree(3, 1);
        RandomStream rng(6);
        const int draws = 1000000;
        int hits = 0;
        for (int i = 0; i < draws; ++i) hits += sample_links(star, ModelParams{1.0, 0.5, 0.5}, rng).empty();
        const double p = std::exp(-1.5);
        CHECK(std::abs(hits / static_cast<double>(draws) - p) <= 3.0 * std::sqrt(p * (1.0 - p) / draws));
    }

    TEST_CASE("insert and remove")
    {
        const auto base = LinkConfig::from_links(2, {{0, 0.1, LinkKind::cross}, {0, 0.5, LinkKind::bar}});
        const auto grown = base.insert_link(0, {0.3, LinkKind::cross});
        REQUIRE(grown.link_count(0) == 3);
        CHECK(grown.on_edge(0)[0].time == 0.1);
        CHECK(grown.on_edge(0)[1].time == 0.3);
        CHECK(grown.on_edge(0)[2].time == 0.5);
        CHECK(base.link_count(0) == 2);
        CHECK(grown.remove_link(0, 1) == base);
        CHECK_THROWS_AS(base.insert_link(0, {0.5, LinkKind::cross}), std::invalid_argument);
        CHECK_THROWS(base.remove_link(1, 0));
        CHECK_THROWS(base.insert_link(2, {0.2, LinkKind::cross}));
    }

    TEST_CASE("random insert/remove sequences keep every edge sorted")
    {
        RandomStream rng(7);
        LinkConfig c(4);
        for (int step = 0; step < 20000; ++step) {
            const auto e = static_cast<EdgeId>(rng.index(4));
            const LinkConfig before = c;
            if (rng.bernoulli(0.55) || c.link_count(e) == 0) {
                c = c.insert_link(e, {rng.uniform(1.0), rng.bernoulli(0.5) ? LinkKind::cross : LinkKind::bar});
                CHECK(before.total_links() + 1 == c.total_links());
            } else {
                c = c.remove_link(e, rng.index(c.link_count(e)));
                CHECK(before.total_links() == c.total_links() + 1);
            }
            c.check_invariants();
        }
    }

    TEST_CASE("text round trip is exact")
    {
        const Tree t = regular_tree(2, 3);
        RandomStream rng(8);
        for (int i = 0; i < 200; ++i) {
            const auto c = sample_links(t, ModelParams{1.0, 1.7, 0.4}, rng);
            std::istringstream in(to_text(c));
            CHECK(read_links(in, t.edge_count()) == c);
        }
        CHECK(to_text(LinkConfig::from_links(1, {{0, 0.25, LinkKind::bar}})) == "0 0.25 B\n");
    }

    TEST_CASE("isolated edge loop table")
    {
        CHECK(EdgeProposal::isolated_edge_loops(0, 0) == 2);
        CHECK(EdgeProposal::isolated_edge_loops(1, 0) == 1);
        CHECK(EdgeProposal::isolated_edge_loops(1, 1) == 1);
        CHECK(EdgeProposal::isolated_edge_loops(2, 0b00) == 2);
        CHECK(EdgeProposal::isolated_edge_loops(2, 0b11) == 2);
        CHECK(EdgeProposal::isolated_edge_loops(2, 0b01) == 1);
        CHECK(EdgeProposal::isolated_edge_loops(2, 0b10) == 1);
        // k bars on one edge close k loops.
        for (std::uint32_t k = 1; k <= 6; ++k)
            CHECK(EdgeProposal::isolated_edge_loops(k, (std::uint64_t{1} << k) - 1) == k);
    }

    TEST_CASE("tilted proposal reweights back to the Poisson law")
    {
        // With weights rho/q = c / psi, weighted count and kind frequencies must
        // match the reference law.
        for (double beta : {0.3, 2.0, 9.0}) {
            CAPTURE(beta);
            const ModelParams p{2.0, beta, 0.3};
            const EdgeProposal q(p, ProposalKind::tilted);
            RandomStream rng(9);
            const int draws = 200000;
            double w_sum = 0.0, w2_sum = 0.0;
            std::vector<double> wk(4, 0.0);
            double w_cross = 0.0, w_links = 0.0;
            LinkConfig c(1);
            for (int i = 0; i < draws; ++i) {
                const double log_psi = q.sample(c, rng);
                const double w = std::exp(q.log_normalizer() - log_psi);
                w_sum += w;
                w2_sum += w * w;
                const auto k = c.total_links();
                if (k < 4) wk[k] += w;
                for (const auto& l : c.all()) {
                    w_links += w;
                    w_cross += w * (l.kind == LinkKind::cross);
                }
            }
            const double mean = w_sum / draws;
            const double se = std::sqrt((w2_sum / draws - mean * mean) / draws);
            CHECK(std::abs(mean - 1.0) <= 3.0 * se + 1e-12);
            double pk = std::exp(-beta);
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(wk[k] / w_sum == doctest::Approx(pk).epsilon(0.05).scale(1.0));
                pk *= beta / static_cast<double>(k + 1);
            }
            CHECK(w_cross / w_links == doctest::Approx(0.3).epsilon(0.03));
        }
    }
}
