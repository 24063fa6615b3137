#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "looptree/links.hpp"
#include "looptree/loops.hpp"
#include "looptree/offspring.hpp"
#include "support/trajectory.hpp"

using namespace looptree;

namespace {

const Tree& single_edge()
{
    static const Tree t = Tree::from_parents({no_vertex, 0});
    return t;
}

LinkConfig edge_links(std::initializer_list<PlacedLink> links, std::size_t edges = 1)
{
    return LinkConfig::from_links(edges, std::vector<PlacedLink>(links));
}

std::size_t count(const Tree& t, const LinkConfig& c) { return build_loops(t, c).loop_count(); }

} // namespace

TEST_SUITE("loops")
{
    TEST_CASE("empty configuration gives one loop per vertex")
    {
        for (const Tree& t : {regular_tree(2, 2), regular_tree(3, 2), regular_tree(1, 4), regular_tree(5, 0)}) {
            const auto p = build_loops(t, LinkConfig(t.edge_count()));
            CHECK(p.loop_count() == t.vertex_count());
            for (VertexId v = 0; v < static_cast<VertexId>(t.vertex_count()); ++v) {
                const auto ls = p.loops_through(v);
                REQUIRE(ls.size() == 1);
                CHECK(p.max_generation(ls[0], t) == t.generation(v));
            }
        }
        CHECK(count(regular_tree(2, 2), LinkConfig(6)) == 7);
    }

    TEST_CASE("single edge tables")
    {
        CHECK(count(single_edge(), edge_links({{0, 0.4, LinkKind::cross}})) == 1);
        CHECK(count(single_edge(), edge_links({{0, 0.4, LinkKind::bar}})) == 1);
        RandomStream rng(11);
        for (int i = 0; i < 1000; ++i) {
            double a = rng.uniform(1.0), b = rng.uniform(1.0);
            if (a == b) continue;
            CHECK(count(single_edge(), edge_links({{0, a, LinkKind::cross}, {0, b, LinkKind::cross}})) == 2);
            CHECK(count(single_edge(), edge_links({{0, a, LinkKind::bar}, {0, b, LinkKind::bar}})) == 2);
            CHECK(count(single_edge(), edge_links({{0, a, LinkKind::cross}, {0, b, LinkKind::bar}})) == 1);
            CHECK(count(single_edge(), edge_links({{0, a, LinkKind::bar}, {0, b, LinkKind::cross}})) == 1);
        }
    }

    TEST_CASE("merges on the binary tree of depth two")
    {
        const Tree t = regular_tree(2, 2);
        CHECK(count(t, edge_links({{2, 0.3, LinkKind::cross}}, 6)) == 6);
        CHECK(count(t, edge_links({{2, 0.3, LinkKind::cross}, {4, 0.7, LinkKind::bar}}, 6)) == 5);
        CHECK(count(t, edge_links({{0, 0.3, LinkKind::cross}, {2, 0.7, LinkKind::bar}}, 6)) == 5);
    }

    TEST_CASE("reach and fail")
    {
        const Tree t = regular_tree(2, 2);
        const auto empty = build_loops(t, LinkConfig(6));
        CHECK(event_reach(empty, t, 0));
        CHECK_FALSE(event_reach(empty, t, 1));
        CHECK(event_fail(empty, t, 0, 1));
        for (VertexId x = 0; x < 7; ++x) CHECK_FALSE(event_fail(empty, t, x, 0));

        const auto merged = build_loops(single_edge(), edge_links({{0, 0.2, LinkKind::cross}}));
        CHECK(event_reach(merged, single_edge(), 1));
        CHECK_FALSE(event_fail(merged, single_edge(), 0, 1));

        // Root edge and grandchild edge linked: the root loop reaches generation 2.
        const auto deep = build_loops(t, edge_links({{0, 0.2, LinkKind::cross}, {2, 0.6, LinkKind::cross}}, 6));
        CHECK(event_reach(deep, t, 2));
        // Root edge link alone cannot reach generation 2.
        const auto shallow = build_loops(t, edge_links({{0, 0.2, LinkKind::cross}, {4, 0.6, LinkKind::cross}}, 6));
        CHECK(event_reach(shallow, t, 1));
        CHECK_FALSE(event_reach(shallow, t, 2));
    }

    TEST_CASE("single vertex degenerate case")
    {
        const Tree t = regular_tree(3, 0);
        const auto p = build_loops(t, LinkConfig(0));
        CHECK(p.loop_count() == 1);
        for (std::uint32_t m = 1; m <= 4; ++m) {
            CHECK_FALSE(event_reach(p, t, m));
            CHECK(event_fail(p, t, 0, m));
        }
    }

    TEST_CASE("reach is monotone in m on random samples")
    {
        const Tree t = regular_tree(3, 3);
        RandomStream rng(12);
        for (int i = 0; i < 2000; ++i) {
            const auto p = build_loops(t, sample_links(t, ModelParams{1.0, 0.8, 0.5}, rng));
            for (std::uint32_t m = 0; m < 3; ++m)
                if (event_reach(p, t, m + 1)) CHECK(event_reach(p, t, m));
            CHECK(p.loop_count() >= 1);
            CHECK(p.loop_count() <= p.arc_count());
        }
    }

    TEST_CASE("subtree loop counts")
    {
        const Tree star = regular_tree(3, 1);
        RandomStream rng(13);
        for (int i = 0; i < 100; ++i)
            CHECK(subtree_loop_counts(star, sample_links(star, ModelParams{1.0, 1.0, 0.5}, rng)) ==
                  std::vector<std::size_t>{1, 1, 1});

        const Tree t = regular_tree(2, 2);
        CHECK(subtree_loop_counts(t, edge_links({{0, 0.1, LinkKind::bar}, {1, 0.2, LinkKind::cross}}, 6)) ==
              std::vector<std::size_t>{3, 3});

        const Tree big = regular_tree(3, 3);
        for (int i = 0; i < 500; ++i) {
            const auto c = sample_links(big, ModelParams{1.0, 0.7, 0.5}, rng);
            const auto counts = subtree_loop_counts(big, c);
            const auto kids = big.children(0);
            REQUIRE(counts.size() == kids.size());
            for (std::size_t j = 0; j < kids.size(); ++j) {
                std::vector<VertexId> mapping;
                const Tree sub = big.subtree(kids[j], &mapping);
                std::vector<EdgeId> old_to_new(big.edge_count(), -1);
                for (std::size_t k = 1; k < mapping.size(); ++k)
                    old_to_new[static_cast<std::size_t>(Tree::edge_of(mapping[k]))] =
                        Tree::edge_of(static_cast<VertexId>(k));
                std::vector<PlacedLink> links;
                for (const auto& l : c.all())
                    if (old_to_new[static_cast<std::size_t>(l.edge)] >= 0)
                        links.push_back({old_to_new[static_cast<std::size_t>(l.edge)], l.time, l.kind});
                CHECK(counts[j] == count(sub, LinkConfig::from_links(sub.edge_count(), links)));
            }
        }
    }

    TEST_CASE("loop count sandwich from the root edges")
    {
        const auto e = check_prop1(regular_tree(2, 2), LinkConfig(6));
        CHECK(e.holds);
        CHECK(e.lower_slack == 0);
        CHECK(e.upper_slack == 0);

        const auto one_each =
            check_prop1(regular_tree(3, 2), edge_links({{0, 0.1, LinkKind::cross}, {1, 0.5, LinkKind::bar},
                                                        {2, 0.9, LinkKind::cross}, {5, 0.3, LinkKind::bar}}, 12));
        CHECK(one_each.holds);
        CHECK(one_each.equality_case);
        CHECK(one_each.delta == -3);
        CHECK(one_each.equality_holds);

        RandomStream rng(14);
        const auto poisson3 = OffspringDistribution::poisson(3.0);
        for (int i = 0; i < 3000; ++i) {
            const Tree t = i % 2 ? sample_gw_tree(poisson3, 3, rng) : regular_tree(2 + i % 3 / 2, 3);
            const auto c = sample_links(t, ModelParams{1.0, i % 3 ? 1.0 : 0.3, 0.5 * (i % 3)}, rng);
            const auto r = check_prop1(t, c);
            CHECK(r.holds);
            CHECK(r.equality_holds);
        }
    }

    TEST_CASE("a single inserted link changes the count by at most one")
    {
        const Tree t = regular_tree(3, 2);
        RandomStream rng(15);
        for (int i = 0; i < 3000; ++i) {
            const auto c = sample_links(t, ModelParams{1.0, 0.6, 0.5}, rng);
            const auto before = build_loops(t, c);
            const auto e = static_cast<EdgeId>(rng.index(t.edge_count()));
            const double time = rng.uniform(0.6);
            const auto grown = c.insert_link(e, {time, rng.bernoulli(0.5) ? LinkKind::cross : LinkKind::bar});
            const auto delta = static_cast<long long>(count(t, grown)) - static_cast<long long>(before.loop_count());
            CHECK((delta >= -1 && delta <= 1));
            const auto child = Tree::child_of(e);
            const auto parent = t.parent(child);
            if (before.loop_at(parent, time) != before.loop_at(child, time)) CHECK(delta == -1);
        }
    }

    TEST_CASE("permuting the root's children leaves counts and reach unchanged")
    {
        // regular_tree(2, 2) with the two root children swapped; grandchildren keep their ids
        // but change parent.
        const Tree t = regular_tree(2, 2);
        const std::vector<VertexId> perm{0, 2, 1, 3, 4, 5, 6};
        const Tree swapped = Tree::from_parents({no_vertex, 0, 0, 2, 2, 1, 1});
        RandomStream rng(16);
        for (int i = 0; i < 1000; ++i) {
            const auto c = sample_links(t, ModelParams{1.0, 1.0, 0.5}, rng);
            std::vector<PlacedLink> moved;
            for (const auto& l : c.all())
                moved.push_back({Tree::edge_of(perm[static_cast<std::size_t>(Tree::child_of(l.edge))]), l.time, l.kind});
            const auto c2 = LinkConfig::from_links(6, moved);
            const auto p1 = build_loops(t, c), p2 = build_loops(swapped, c2);
            CHECK(p1.loop_count() == p2.loop_count());
            for (std::uint32_t m = 0; m <= 2; ++m) CHECK(event_reach(p1, t, m) == event_reach(p2, swapped, m));
        }
    }

    TEST_CASE("union-find agrees with trajectory tracing on random configurations")
    {
        RandomStream rng(17);
        const auto poisson2 = OffspringDistribution::poisson(2.0);
        for (int i = 0; i < 1500; ++i) {
            const Tree t = sample_gw_tree(poisson2, 3, rng);
            const auto c = sample_links(t, ModelParams{1.0, 1.5, 0.5}, rng);
            const auto traced = testing::trace_loops(t, c);
            CHECK(testing::same_partition(t, c, traced));
        }
    }

    TEST_CASE("debug listing")
    {
        const auto c = edge_links({{0, 0.25, LinkKind::cross}});
        const auto p = build_loops(single_edge(), c);
        std::ostringstream os;
        write_loops(os, single_edge(), p, 1.0);
        CHECK(os.str() == "0 0 0.25 0.25\n0 1 0.25 0.25\n");

        std::ostringstream empty;
        const Tree t = regular_tree(1, 1);
        write_loops(empty, t, build_loops(t, LinkConfig(1)), 2.0);
        CHECK(empty.str() == "0 0 0 2\n1 1 0 2\n");
    }

    TEST_CASE("mismatched edge count is rejected")
    {
        CHECK_THROWS_AS(build_loops(regular_tree(2, 2), LinkConfig(3)), std::invalid_argument);
    }
}
