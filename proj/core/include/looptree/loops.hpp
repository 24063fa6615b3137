#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "looptree/links.hpp"
#include "looptree/tree.hpp"

namespace looptree {

using LoopId = std::uint32_t;

/// Decomposition of V x [0, beta)_per into loops.
///
/// Each vertex circle is cut at the times of its incident links; arc i of a
/// vertex runs from its i-th event time to the next one, the last arc wrapping
/// through beta. Only vertices touched by a link are stored explicitly. An
/// untouched vertex is one full-circle arc forming its own loop, with id
/// (touched loop count) + (its rank among untouched vertices).
class LoopPartition {
public:
    struct Arc {
        double start = 0.0;
        double end = 0.0;
        LoopId loop = 0;
        bool full_circle = false;
    };

    std::size_t loop_count() const noexcept { return touched_loop_count_ + untouched_count(); }
    std::size_t vertex_count() const noexcept { return vertex_count_; }
    std::size_t touched_vertex_count() const noexcept { return touched_.size(); }
    std::size_t untouched_count() const noexcept { return vertex_count_ - touched_.size(); }
    /// Loops visiting at least one link.
    std::size_t touched_loop_count() const noexcept { return touched_loop_count_; }
    std::size_t arc_count() const noexcept { return arc_loop_.size() + untouched_count(); }

    bool is_touched(VertexId v) const;
    std::vector<Arc> arcs_of(VertexId v) const;

    /// Loop through (v, t). At a link time the arc starting there is used.
    LoopId loop_at(VertexId v, double t) const;
    std::vector<LoopId> loops_through(VertexId v) const;

    std::uint32_t max_generation(LoopId loop, const Tree& tree) const;
    std::span<const LoopId> root_loops() const noexcept { return root_loops_; }
    bool contains_root(LoopId loop) const;

    /// Largest generation reached by a loop through the root.
    std::uint32_t root_reach() const noexcept { return root_reach_; }

    /// Vertex on which an untouched loop lives.
    VertexId untouched_vertex(LoopId loop) const;

private:
    friend class LoopBuilder;
    friend std::vector<std::size_t> subtree_loop_counts(const Tree& tree, const LinkConfig& config);

    std::size_t slot_of(VertexId v) const; // index into touched_, or npos
    LoopId untouched_id(VertexId v) const;

    std::size_t vertex_count_ = 0;
    std::vector<VertexId> touched_;
    std::vector<std::uint32_t> offset_; // touched_.size() + 1 entries
    std::vector<double> time_;          // event times, per touched vertex ascending
    std::vector<LoopId> arc_loop_;      // arc j begins at event j
    std::vector<std::uint32_t> loop_max_gen_; // touched loops only
    std::vector<LoopId> root_loops_;
    std::size_t touched_loop_count_ = 0;
    std::uint32_t root_reach_ = 0;
};

/// Reusable workspace for building loop partitions.
///
/// Cost is O(N log N) in the number of links; no per-vertex work is done for
/// vertices without links, which keeps sparse configurations on large trees
/// cheap.
class LoopBuilder {
public:
    const LoopPartition& build(const Tree& tree, const LinkConfig& config);
    const LoopPartition& partition() const noexcept { return result_; }

private:
    struct Event {
        VertexId vertex;
        double time;
        std::uint32_t link;
        std::uint32_t side; // 0 = parent end, 1 = child end
    };

    LoopId find(LoopId a);
    void unite(LoopId a, LoopId b);

    std::vector<Event> events_;
    std::vector<std::uint32_t> event_pos_;
    std::vector<std::uint32_t> arc_vertex_slot_;
    std::vector<LoopId> uf_parent_;
    std::vector<LoopId> label_;
    LoopPartition result_;
};

/// Loop partition of the tree under the given links.
LoopPartition build_loops(const Tree& tree, const LinkConfig& config);

inline std::size_t loop_count(const LoopPartition& partition) noexcept { return partition.loop_count(); }

/// E^{r->m}: a loop through the root reaches generation m.
bool event_reach(const LoopPartition& partition, const Tree& tree, std::uint32_t m);

/// B^{x-/->m}: some loop through x stays above generation m.
bool event_fail(const LoopPartition& partition, const Tree& tree, VertexId x, std::uint32_t m);

/// Loop counts L_{T_j} of the subtrees below the root's children, computed
/// with the root edges removed.
std::vector<std::size_t> subtree_loop_counts(const Tree& tree, const LinkConfig& config);

struct Prop1Check {
    bool holds = false;
    long long delta = 0;       ///< L - (sum L_{T_j} + 1)
    long long lower = 0;       ///< -sum N
    long long upper = 0;       ///< sum (|N - 1| - 1)
    long long lower_slack = 0; ///< delta - lower
    long long upper_slack = 0; ///< upper - delta
    bool equality_case = false;  ///< every root edge carries 0 or 1 links
    bool equality_holds = true;  ///< delta == lower whenever equality_case
};

/// Loop count sandwich in terms of the root-edge link counts.
Prop1Check check_prop1(const Tree& tree, const LinkConfig& config);

/// Debug listing, one line per arc: "loop_id vertex arc_start arc_end".
/// Full circles are written as "0 beta".
void write_loops(std::ostream& os, const Tree& tree, const LoopPartition& partition, double beta);

} // namespace looptree
