#include "looptree/loops.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace looptree {

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
}

std::size_t LoopPartition::slot_of(VertexId v) const
{
    auto it = std::lower_bound(touched_.begin(), touched_.end(), v);
    if (it == touched_.end() || *it != v) return npos;
    return static_cast<std::size_t>(it - touched_.begin());
}

LoopId LoopPartition::untouched_id(VertexId v) const
{
    const auto below = static_cast<std::size_t>(std::lower_bound(touched_.begin(), touched_.end(), v) - touched_.begin());
    return static_cast<LoopId>(touched_loop_count_ + static_cast<std::size_t>(v) - below);
}

VertexId LoopPartition::untouched_vertex(LoopId loop) const
{
    if (loop < touched_loop_count_ || loop >= loop_count())
        throw std::out_of_range("untouched_vertex: loop " + std::to_string(loop) + " is not an untouched loop");
    const std::size_t rank = loop - touched_loop_count_;
    // Vertex v has rank v - #{touched < v}; touched_[i] - i counts untouched vertices below touched_[i].
    std::size_t lo = 0, hi = touched_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (static_cast<std::size_t>(touched_[mid]) - mid <= rank) lo = mid + 1;
        else hi = mid;
    }
    return static_cast<VertexId>(rank + lo);
}

bool LoopPartition::is_touched(VertexId v) const { return slot_of(v) != npos; }

std::vector<LoopPartition::Arc> LoopPartition::arcs_of(VertexId v) const
{
    if (v < 0 || static_cast<std::size_t>(v) >= vertex_count_) throw std::out_of_range("arcs_of: vertex out of range");
    const std::size_t s = slot_of(v);
    if (s == npos) return {Arc{0.0, 0.0, untouched_id(v), true}};
    std::vector<Arc> out;
    const std::uint32_t b = offset_[s], e = offset_[s + 1];
    for (std::uint32_t j = b; j < e; ++j) {
        const double next = time_[j + 1 < e ? j + 1 : b];
        out.push_back(Arc{time_[j], next, arc_loop_[j], e - b == 1});
    }
    return out;
}

LoopId LoopPartition::loop_at(VertexId v, double t) const
{
    if (v < 0 || static_cast<std::size_t>(v) >= vertex_count_) throw std::out_of_range("loop_at: vertex out of range");
    const std::size_t s = slot_of(v);
    if (s == npos) return untouched_id(v);
    const auto first = time_.begin() + offset_[s];
    const auto last = time_.begin() + offset_[s + 1];
    auto it = std::upper_bound(first, last, t);
    // Before the first event the wrapping arc (last one) is in effect.
    const std::size_t j = it == first ? offset_[s + 1] - 1 : static_cast<std::size_t>(it - time_.begin()) - 1;
    return arc_loop_[j];
}

std::vector<LoopId> LoopPartition::loops_through(VertexId v) const
{
    std::vector<LoopId> out;
    for (const auto& a : arcs_of(v)) out.push_back(a.loop);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint32_t LoopPartition::max_generation(LoopId loop, const Tree& tree) const
{
    if (loop < touched_loop_count_) return loop_max_gen_[loop];
    return tree.generation(untouched_vertex(loop));
}

bool LoopPartition::contains_root(LoopId loop) const
{
    return std::find(root_loops_.begin(), root_loops_.end(), loop) != root_loops_.end();
}

LoopId LoopBuilder::find(LoopId a)
{
    while (uf_parent_[a] != a) {
        uf_parent_[a] = uf_parent_[uf_parent_[a]];
        a = uf_parent_[a];
    }
    return a;
}

void LoopBuilder::unite(LoopId a, LoopId b)
{
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    uf_parent_[a] = b;
}

const LoopPartition& LoopBuilder::build(const Tree& tree, const LinkConfig& config)
{
    if (config.edge_count() != tree.edge_count())
        throw std::invalid_argument("build_loops: configuration has " + std::to_string(config.edge_count()) +
                                    " edges, tree has " + std::to_string(tree.edge_count()));
    const auto links = config.all();
    const std::size_t n_links = links.size();

    events_.clear();
    events_.reserve(2 * n_links);
    for (std::size_t i = 0; i < n_links; ++i) {
        const EdgeId e = links[i].edge;
        if (e < 0 || static_cast<std::size_t>(e) >= tree.edge_count())
            throw std::invalid_argument("build_loops: link on unknown edge " + std::to_string(e));
        const auto li = static_cast<std::uint32_t>(i);
        events_.push_back({tree.parent_of(e), links[i].time, li, 0});
        events_.push_back({Tree::child_of(e), links[i].time, li, 1});
    }
    std::sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
        if (a.vertex != b.vertex) return a.vertex < b.vertex;
        if (a.time != b.time) return a.time < b.time;
        return a.link < b.link;
    });

    LoopPartition& r = result_;
    r.vertex_count_ = tree.vertex_count();
    r.touched_.clear();
    r.offset_.clear();
    r.time_.resize(events_.size());
    event_pos_.resize(2 * n_links);
    arc_vertex_slot_.resize(events_.size());
    for (std::size_t j = 0; j < events_.size(); ++j) {
        const Event& ev = events_[j];
        if (r.touched_.empty() || r.touched_.back() != ev.vertex) {
            r.touched_.push_back(ev.vertex);
            r.offset_.push_back(static_cast<std::uint32_t>(j));
        }
        r.time_[j] = ev.time;
        event_pos_[2 * ev.link + ev.side] = static_cast<std::uint32_t>(j);
        arc_vertex_slot_[j] = static_cast<std::uint32_t>(r.touched_.size() - 1);
    }
    r.offset_.push_back(static_cast<std::uint32_t>(events_.size()));

    const std::size_t n_arcs = events_.size();
    uf_parent_.resize(n_arcs);
    std::iota(uf_parent_.begin(), uf_parent_.end(), LoopId{0});

    auto arc_ending_at = [&](std::uint32_t j) {
        const std::uint32_t slot = arc_vertex_slot_[j];
        return j == r.offset_[slot] ? r.offset_[slot + 1] - 1 : j - 1;
    };

    for (std::size_t i = 0; i < n_links; ++i) {
        const std::uint32_t jx = event_pos_[2 * i];
        const std::uint32_t jy = event_pos_[2 * i + 1];
        const std::uint32_t x_end = arc_ending_at(jx), x_begin = jx;
        const std::uint32_t y_end = arc_ending_at(jy), y_begin = jy;
        if (links[i].kind == LinkKind::cross) {
            // Same time direction: x running up continues up on y.
            unite(x_end, y_begin);
            unite(y_end, x_begin);
        } else {
            // Reversal: x running up comes back down on y.
            unite(x_end, y_end);
            unite(x_begin, y_begin);
        }
    }

    label_.assign(n_arcs, std::numeric_limits<LoopId>::max());
    r.arc_loop_.resize(n_arcs);
    r.loop_max_gen_.clear();
    LoopId next = 0;
    for (std::size_t j = 0; j < n_arcs; ++j) {
        const LoopId root = find(static_cast<LoopId>(j));
        if (label_[root] == std::numeric_limits<LoopId>::max()) {
            label_[root] = next++;
            r.loop_max_gen_.push_back(0);
        }
        const LoopId lab = label_[root];
        r.arc_loop_[j] = lab;
        const std::uint32_t g = tree.generation(r.touched_[arc_vertex_slot_[j]]);
        r.loop_max_gen_[lab] = std::max(r.loop_max_gen_[lab], g);
    }
    r.touched_loop_count_ = next;

    r.root_loops_.clear();
    r.root_reach_ = 0;
    if (!r.touched_.empty() && r.touched_.front() == tree.root()) {
        for (std::uint32_t j = r.offset_[0]; j < r.offset_[1]; ++j) r.root_loops_.push_back(r.arc_loop_[j]);
        std::sort(r.root_loops_.begin(), r.root_loops_.end());
        r.root_loops_.erase(std::unique(r.root_loops_.begin(), r.root_loops_.end()), r.root_loops_.end());
        for (LoopId l : r.root_loops_) r.root_reach_ = std::max(r.root_reach_, r.loop_max_gen_[l]);
    } else {
        r.root_loops_.push_back(r.untouched_id(tree.root()));
    }
    return r;
}

LoopPartition build_loops(const Tree& tree, const LinkConfig& config)
{
    LoopBuilder builder;
    return builder.build(tree, config);
}

bool event_reach(const LoopPartition& partition, const Tree& tree, std::uint32_t m)
{
    (void)tree;
    return partition.root_reach() >= m;
}

bool event_fail(const LoopPartition& partition, const Tree& tree, VertexId x, std::uint32_t m)
{
    for (LoopId l : partition.loops_through(x))
        if (partition.max_generation(l, tree) < m) return true;
    return false;
}

std::vector<std::size_t> subtree_loop_counts(const Tree& tree, const LinkConfig& config)
{
    const auto root_children = tree.children(tree.root());
    std::vector<std::size_t> counts(root_children.size(), 0);
    if (root_children.empty()) return counts;

    const auto root_edges = tree.root_edges();
    const LinkConfig inner = config.without_edges(root_edges);
    const LoopPartition p = build_loops(tree, inner);

    // Each loop of the split configuration lies inside one subtree (or is the
    // root's own circle). Attribute touched loops through any of their arcs.
    std::vector<std::size_t> touched_in_branch(root_children.size(), 0);
    std::vector<char> seen(p.touched_loop_count(), 0);
    for (std::size_t s = 0; s < p.touched_vertex_count(); ++s) {
        const VertexId v = p.touched_[s];
        const std::int32_t j = tree.branch(v);
        if (j < 0) continue;
        ++touched_in_branch[static_cast<std::size_t>(j)];
        for (std::uint32_t a = p.offset_[s]; a < p.offset_[s + 1]; ++a) {
            const LoopId l = p.arc_loop_[a];
            if (!seen[l]) {
                seen[l] = 1;
                ++counts[static_cast<std::size_t>(j)];
            }
        }
    }
    for (std::size_t j = 0; j < root_children.size(); ++j)
        counts[j] += tree.subtree_size(root_children[j]) - touched_in_branch[j];
    return counts;
}

Prop1Check check_prop1(const Tree& tree, const LinkConfig& config)
{
    Prop1Check c;
    const auto profile = root_edge_profile(tree, config);
    const auto sub = subtree_loop_counts(tree, config);
    const auto total = static_cast<long long>(build_loops(tree, config).loop_count());
    long long sum_sub = 0;
    for (auto s : sub) sum_sub += static_cast<long long>(s);
    c.delta = total - (sum_sub + 1);
    c.equality_case = true;
    for (auto n : profile) {
        const auto nn = static_cast<long long>(n);
        c.lower -= nn;
        c.upper += (nn >= 1 ? nn - 1 : 1) - 1;
        c.equality_case &= (n <= 1);
    }
    c.lower_slack = c.delta - c.lower;
    c.upper_slack = c.upper - c.delta;
    c.holds = c.lower_slack >= 0 && c.upper_slack >= 0;
    c.equality_holds = !c.equality_case || c.delta == c.lower;
    return c;
}

void write_loops(std::ostream& os, const Tree& tree, const LoopPartition& partition, double beta)
{
    const std::string beta_text = format_double(beta);
    for (std::size_t v = 0; v < tree.vertex_count(); ++v) {
        for (const auto& arc : partition.arcs_of(static_cast<VertexId>(v))) {
            os << arc.loop << ' ' << v << ' ';
            if (arc.full_circle && !partition.is_touched(static_cast<VertexId>(v))) os << "0 " << beta_text << '\n';
            else os << format_double(arc.start) << ' ' << format_double(arc.end) << '\n';
        }
    }
}

} // namespace looptree
