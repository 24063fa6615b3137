#include "looptree/tree.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace looptree {

Tree Tree::from_parents(std::vector<VertexId> parents)
{
    if (parents.empty()) throw std::invalid_argument("Tree: at least one vertex is required");
    if (parents.size() > static_cast<std::size_t>(std::numeric_limits<VertexId>::max()))
        throw std::invalid_argument("Tree: too many vertices for 32-bit ids");
    if (parents[0] != no_vertex) throw std::invalid_argument("Tree: vertex 0 must be the root (parent -1)");

    const std::size_t n = parents.size();
    Tree t;
    t.generation_.assign(n, 0);
    t.branch_.assign(n, -1);
    t.subtree_size_.assign(n, 1);
    std::vector<std::uint32_t> count(n, 0);
    for (std::size_t v = 1; v < n; ++v) {
        const VertexId p = parents[v];
        if (p < 0 || static_cast<std::size_t>(p) >= v)
            throw std::invalid_argument("Tree: parent of vertex " + std::to_string(v) + " must precede it");
        t.generation_[v] = t.generation_[static_cast<std::size_t>(p)] + 1;
        t.depth_ = std::max(t.depth_, t.generation_[v]);
        ++count[static_cast<std::size_t>(p)];
    }
    t.child_offset_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) t.child_offset_[v + 1] = t.child_offset_[v] + count[v];
    t.child_list_.resize(n - 1);
    std::vector<std::uint32_t> fill(t.child_offset_.begin(), t.child_offset_.end() - 1);
    for (std::size_t v = 1; v < n; ++v) {
        const auto p = static_cast<std::size_t>(parents[v]);
        t.child_list_[fill[p]++] = static_cast<VertexId>(v);
    }
    auto root_children = std::span<const VertexId>(t.child_list_).subspan(t.child_offset_[0], count[0]);
    for (std::size_t j = 0; j < root_children.size(); ++j)
        t.branch_[static_cast<std::size_t>(root_children[j])] = static_cast<std::int32_t>(j);
    for (std::size_t v = 1; v < n; ++v) {
        const auto p = static_cast<std::size_t>(parents[v]);
        if (p != 0) t.branch_[v] = t.branch_[p];
    }
    for (std::size_t v = n; v-- > 1;)
        t.subtree_size_[static_cast<std::size_t>(parents[v])] += t.subtree_size_[v];
    t.parent_ = std::move(parents);
    return t;
}

std::span<const VertexId> Tree::children(VertexId v) const
{
    const auto i = static_cast<std::size_t>(v);
    return std::span<const VertexId>(child_list_).subspan(child_offset_[i], child_offset_[i + 1] - child_offset_[i]);
}

std::vector<EdgeId> Tree::root_edges() const
{
    std::vector<EdgeId> out;
    for (VertexId c : children(root())) out.push_back(edge_of(c));
    return out;
}

Tree Tree::subtree(VertexId v, std::vector<VertexId>* mapping) const
{
    std::vector<VertexId> order{v};
    std::vector<VertexId> parents{no_vertex};
    std::vector<VertexId> new_id(vertex_count(), no_vertex);
    new_id[static_cast<std::size_t>(v)] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (VertexId c : children(order[head])) {
            new_id[static_cast<std::size_t>(c)] = static_cast<VertexId>(order.size());
            order.push_back(c);
            parents.push_back(static_cast<VertexId>(head));
        }
    }
    if (mapping) *mapping = order;
    return from_parents(std::move(parents));
}

void Tree::check_invariants() const
{
    if (parent_.empty() || parent_[0] != no_vertex || generation_[0] != 0)
        throw std::logic_error("tree invariant: root must be vertex 0 at generation 0");
    std::size_t edges = 0;
    for (std::size_t v = 1; v < parent_.size(); ++v) {
        const VertexId p = parent_[v];
        if (p < 0 || static_cast<std::size_t>(p) >= v)
            throw std::logic_error("tree invariant: bad parent for vertex " + std::to_string(v));
        if (generation_[v] != generation_[static_cast<std::size_t>(p)] + 1)
            throw std::logic_error("tree invariant: generation mismatch at vertex " + std::to_string(v));
        bool listed = false;
        for (VertexId c : children(p)) listed |= (static_cast<std::size_t>(c) == v);
        if (!listed) throw std::logic_error("tree invariant: vertex " + std::to_string(v) + " missing from children");
        ++edges;
    }
    if (edges != child_list_.size()) throw std::logic_error("tree invariant: child lists and edges disagree");
}

std::uint64_t regular_tree_size(std::uint32_t d, std::uint32_t n, std::uint64_t cap)
{
    std::uint64_t level = 1;
    std::uint64_t total = 1;
    for (std::uint32_t g = 0; g < n; ++g) {
        if (d != 0 && level > cap / d) return 0;
        level *= d;
        if (total > cap - level) return 0;
        total += level;
    }
    return total <= cap ? total : 0;
}

Tree regular_tree(std::uint32_t d, std::uint32_t n, std::uint64_t vertex_budget)
{
    if (d == 0) throw std::invalid_argument("regular_tree: d must be >= 1");
    const std::uint64_t size = regular_tree_size(d, n, vertex_budget);
    if (size == 0) {
        std::ostringstream os;
        os << "regular_tree(d=" << d << ", n=" << n << "): vertex count exceeds budget " << vertex_budget;
        throw std::length_error(os.str());
    }
    std::vector<VertexId> parents;
    parents.reserve(size);
    parents.push_back(no_vertex);
    std::size_t level_begin = 0;
    for (std::uint32_t g = 0; g < n; ++g) {
        const std::size_t level_end = parents.size();
        for (std::size_t v = level_begin; v < level_end; ++v)
            for (std::uint32_t j = 0; j < d; ++j) parents.push_back(static_cast<VertexId>(v));
        level_begin = level_end;
    }
    return Tree::from_parents(std::move(parents));
}

Tree sample_gw_tree(const OffspringDistribution& dist, std::uint32_t n, RandomStream& rng, std::uint64_t vertex_budget)
{
    std::vector<VertexId> parents{no_vertex};
    std::size_t level_begin = 0;
    for (std::uint32_t g = 0; g < n; ++g) {
        const std::size_t level_end = parents.size();
        if (level_begin == level_end) break;
        for (std::size_t v = level_begin; v < level_end; ++v) {
            const std::uint64_t k = dist.sample(rng);
            if (parents.size() + k > vertex_budget) {
                std::ostringstream os;
                os << "sample_gw_tree(" << dist.describe() << ", n=" << n << "): vertex budget " << vertex_budget
                   << " exceeded";
                throw std::length_error(os.str());
            }
            parents.insert(parents.end(), k, static_cast<VertexId>(v));
        }
        level_begin = level_end;
    }
    return Tree::from_parents(std::move(parents));
}

void write_tree(std::ostream& os, const Tree& tree)
{
    for (std::size_t v = 0; v < tree.vertex_count(); ++v) {
        const auto id = static_cast<VertexId>(v);
        os << v << ' ' << tree.parent(id) << ' ' << tree.generation(id) << '\n';
    }
}

std::string to_text(const Tree& tree)
{
    std::ostringstream os;
    write_tree(os, tree);
    return os.str();
}

Tree read_tree(std::istream& is)
{
    std::vector<VertexId> parents;
    std::vector<std::uint32_t> generations;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long id = 0, parent = 0, gen = 0;
        if (!(ls >> id >> parent >> gen)) throw std::invalid_argument("read_tree: malformed line '" + line + "'");
        if (id != static_cast<long long>(parents.size()))
            throw std::invalid_argument("read_tree: vertex ids must be consecutive from 0");
        parents.push_back(static_cast<VertexId>(parent));
        generations.push_back(static_cast<std::uint32_t>(gen));
    }
    Tree t = Tree::from_parents(std::move(parents));
    for (std::size_t v = 0; v < t.vertex_count(); ++v)
        if (t.generation(static_cast<VertexId>(v)) != generations[v])
            throw std::invalid_argument("read_tree: generation column disagrees with parents at vertex " +
                                        std::to_string(v));
    return t;
}

} // namespace looptree
