#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "looptree/links.hpp"
#include "looptree/tree.hpp"

namespace looptree::testing {

/// Loops found by walking the space-time cylinder literally: move along a
/// vertex in the current time direction, jump across every link met, keep
/// the direction after a cross and reverse it after a bar.
struct TracedLoops {
    std::size_t count = 0;
    /// Loop index of the arc of v starting at time t (untouched vertices use t = 0).
    std::map<std::pair<VertexId, double>, std::size_t> arc_loop;
    std::vector<std::uint32_t> max_generation;
    std::vector<bool> through_root;
};

TracedLoops trace_loops(const Tree& tree, const LinkConfig& config);

/// True iff the union-find partition groups arcs exactly as the traced loops
/// do (up to relabelling) and agrees on loop count, per-loop maximum
/// generation and root membership.
bool same_partition(const Tree& tree, const LinkConfig& config, const TracedLoops& traced);

} // namespace looptree::testing
