#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "looptree/offspring.hpp"
#include "looptree/random.hpp"

namespace looptree {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr VertexId no_vertex = -1;
inline constexpr std::uint64_t default_vertex_budget = 10'000'000;

/// Rooted finite tree stored as index arrays.
///
/// Vertex 0 is the root and every parent id is smaller than its child's id.
/// The edge joining v to its parent has id v - 1, so edge ids are dense in
/// [0, vertex_count - 1) and stable under copying.
class Tree {
public:
    /// Builds from a parent array (parents[0] == -1, parents[v] < v otherwise).
    static Tree from_parents(std::vector<VertexId> parents);

    std::size_t vertex_count() const noexcept { return parent_.size(); }
    std::size_t edge_count() const noexcept { return parent_.size() - 1; }
    VertexId root() const noexcept { return 0; }

    VertexId parent(VertexId v) const { return parent_[static_cast<std::size_t>(v)]; }
    std::uint32_t generation(VertexId v) const { return generation_[static_cast<std::size_t>(v)]; }
    std::span<const VertexId> children(VertexId v) const;
    std::uint32_t depth() const noexcept { return depth_; }

    /// Index j of the root child x_j whose subtree contains v; -1 for the root.
    std::int32_t branch(VertexId v) const { return branch_[static_cast<std::size_t>(v)]; }
    /// Number of vertices in the subtree rooted at v.
    std::uint32_t subtree_size(VertexId v) const { return subtree_size_[static_cast<std::size_t>(v)]; }

    static EdgeId edge_of(VertexId child) noexcept { return child - 1; }
    static VertexId child_of(EdgeId e) noexcept { return e + 1; }
    VertexId parent_of(EdgeId e) const { return parent(child_of(e)); }

    /// Edge ids of the root's incident edges, in child order.
    std::vector<EdgeId> root_edges() const;

    /// The subtree rooted at v, relabelled so v becomes 0. `mapping[i]` is the
    /// original id of new vertex i.
    Tree subtree(VertexId v, std::vector<VertexId>* mapping = nullptr) const;

    const std::vector<VertexId>& parents() const noexcept { return parent_; }

    /// Validates the structural invariants; throws std::logic_error on failure.
    void check_invariants() const;

    friend bool operator==(const Tree& a, const Tree& b) { return a.parent_ == b.parent_; }

private:
    std::vector<VertexId> parent_;
    std::vector<std::uint32_t> generation_;
    std::vector<std::uint32_t> child_offset_;
    std::vector<VertexId> child_list_;
    std::vector<std::int32_t> branch_;
    std::vector<std::uint32_t> subtree_size_;
    std::uint32_t depth_ = 0;
};

/// Tree in which every vertex above generation n has exactly d children.
Tree regular_tree(std::uint32_t d, std::uint32_t n, std::uint64_t vertex_budget = default_vertex_budget);

/// Number of vertices of regular_tree(d, n), or 0 if it exceeds `cap`.
std::uint64_t regular_tree_size(std::uint32_t d, std::uint32_t n, std::uint64_t cap);

/// Galton-Watson tree cut at generation n, vertices in breadth-first order.
Tree sample_gw_tree(const OffspringDistribution& dist, std::uint32_t n, RandomStream& rng,
                    std::uint64_t vertex_budget = default_vertex_budget);

/// Line format "id parent generation", root parent written as -1.
void write_tree(std::ostream& os, const Tree& tree);
std::string to_text(const Tree& tree);
Tree read_tree(std::istream& is);

} // namespace looptree
