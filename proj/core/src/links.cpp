#include "looptree/links.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "looptree/edge_proposal.hpp"

namespace looptree {

namespace {

bool edge_time_less(const PlacedLink& a, const PlacedLink& b) noexcept
{
    return a.edge != b.edge ? a.edge < b.edge : a.time < b.time;
}

} // namespace

void ModelParams::validate() const
{
    if (!(theta >= 1.0) || !std::isfinite(theta))
        throw std::invalid_argument("theta must be finite and >= 1, got " + format_double(theta));
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be finite and > 0, got " + format_double(beta));
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u must lie in [0, 1], got " + format_double(u));
}

char kind_letter(LinkKind kind) noexcept { return kind == LinkKind::cross ? 'X' : 'B'; }

LinkConfig LinkConfig::from_links(std::size_t edge_count, std::vector<PlacedLink> links)
{
    std::sort(links.begin(), links.end(), edge_time_less);
    LinkConfig out(edge_count);
    out.links_ = std::move(links);
    try {
        out.check_invariants();
    } catch (const std::logic_error& e) {
        throw std::invalid_argument(e.what());
    }
    return out;
}

std::span<const PlacedLink> LinkConfig::on_edge(EdgeId e) const
{
    auto lo = std::lower_bound(links_.begin(), links_.end(), e,
                               [](const PlacedLink& l, EdgeId id) { return l.edge < id; });
    auto hi = std::upper_bound(lo, links_.end(), e, [](EdgeId id, const PlacedLink& l) { return id < l.edge; });
    return {lo, hi};
}

bool LinkConfig::insert_in_place(EdgeId e, Link link)
{
    const PlacedLink placed{e, link.time, link.kind};
    auto it = std::lower_bound(links_.begin(), links_.end(), placed, edge_time_less);
    if (it != links_.end() && it->edge == e && it->time == link.time) return false;
    links_.insert(it, placed);
    return true;
}

void LinkConfig::erase_in_place(std::size_t flat_index)
{
    links_.erase(links_.begin() + static_cast<std::ptrdiff_t>(flat_index));
}

LinkConfig LinkConfig::insert_link(EdgeId e, Link link) const
{
    if (e < 0 || static_cast<std::size_t>(e) >= edge_count_)
        throw std::invalid_argument("insert_link: edge " + std::to_string(e) + " out of range");
    if (!std::isfinite(link.time) || link.time < 0.0)
        throw std::invalid_argument("insert_link: time must be finite and >= 0");
    LinkConfig out = *this;
    if (!out.insert_in_place(e, link))
        throw std::invalid_argument("insert_link: edge " + std::to_string(e) + " already has a link at time " +
                                    format_double(link.time));
    return out;
}

LinkConfig LinkConfig::remove_link(EdgeId e, std::size_t index) const
{
    const auto run = on_edge(e);
    if (index >= run.size())
        throw std::out_of_range("remove_link: edge " + std::to_string(e) + " has " + std::to_string(run.size()) +
                                " links, index " + std::to_string(index) + " is invalid");
    LinkConfig out = *this;
    out.erase_in_place(static_cast<std::size_t>(run.data() - links_.data()) + index);
    return out;
}

LinkConfig LinkConfig::without_edges(std::span<const EdgeId> edges) const
{
    LinkConfig out(edge_count_);
    out.links_.reserve(links_.size());
    for (const auto& l : links_)
        if (std::find(edges.begin(), edges.end(), l.edge) == edges.end()) out.links_.push_back(l);
    return out;
}

void LinkConfig::check_invariants() const
{
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const auto& l = links_[i];
        if (l.edge < 0 || static_cast<std::size_t>(l.edge) >= edge_count_)
            throw std::logic_error("link on edge " + std::to_string(l.edge) + " outside [0, " +
                                   std::to_string(edge_count_) + ")");
        if (!std::isfinite(l.time) || l.time < 0.0)
            throw std::logic_error("link time must be finite and >= 0");
        if (i > 0) {
            const auto& p = links_[i - 1];
            if (p.edge > l.edge || (p.edge == l.edge && !(p.time < l.time)))
                throw std::logic_error("links on edge " + std::to_string(l.edge) + " are not strictly increasing");
        }
    }
}

LinkConfig sample_links(const Tree& tree, const ModelParams& params, RandomStream& rng)
{
    params.validate();
    const EdgeProposal proposal(params, ProposalKind::reference);
    LinkConfig out(tree.edge_count());
    proposal.sample(out, rng);
    return out;
}

std::vector<std::uint32_t> root_edge_profile(const Tree& tree, const LinkConfig& config)
{
    std::vector<std::uint32_t> out;
    for (EdgeId e : tree.root_edges()) out.push_back(static_cast<std::uint32_t>(config.link_count(e)));
    return out;
}

namespace root_events {

bool all_at_most_one(std::span<const std::uint32_t> profile) noexcept
{
    return std::all_of(profile.begin(), profile.end(), [](std::uint32_t n) { return n <= 1; });
}

bool all_empty(std::span<const std::uint32_t> profile) noexcept
{
    return std::all_of(profile.begin(), profile.end(), [](std::uint32_t n) { return n == 0; });
}

bool exactly_one_on(std::span<const std::uint32_t> profile, std::uint64_t subset) noexcept
{
    for (std::size_t j = 0; j < profile.size(); ++j) {
        const bool in = j < 64 && ((subset >> j) & 1U);
        if (profile[j] != (in ? 1U : 0U)) return false;
    }
    return true;
}

bool occupied_exactly(std::span<const std::uint32_t> profile, std::uint64_t subset) noexcept
{
    for (std::size_t j = 0; j < profile.size(); ++j) {
        const bool in = j < 64 && ((subset >> j) & 1U);
        if (in != (profile[j] >= 1)) return false;
    }
    return true;
}

} // namespace root_events

std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_links(std::ostream& os, const LinkConfig& config)
{
    for (const auto& l : config.all()) os << l.edge << ' ' << format_double(l.time) << ' ' << kind_letter(l.kind) << '\n';
}

std::string to_text(const LinkConfig& config)
{
    std::ostringstream os;
    write_links(os, config);
    return os.str();
}

LinkConfig read_links(std::istream& is, std::size_t edge_count)
{
    std::vector<PlacedLink> links;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long edge = 0;
        std::string time_text, kind_text;
        if (!(ls >> edge >> time_text >> kind_text) || kind_text.size() != 1)
            throw std::invalid_argument("read_links: malformed line '" + line + "'");
        double t = 0.0;
        auto res = std::from_chars(time_text.data(), time_text.data() + time_text.size(), t);
        if (res.ec != std::errc{} || res.ptr != time_text.data() + time_text.size())
            throw std::invalid_argument("read_links: bad time '" + time_text + "'");
        LinkKind kind;
        if (kind_text[0] == 'X') kind = LinkKind::cross;
        else if (kind_text[0] == 'B') kind = LinkKind::bar;
        else throw std::invalid_argument("read_links: kind must be X or B, got '" + kind_text + "'");
        links.push_back({static_cast<EdgeId>(edge), t, kind});
    }
    return LinkConfig::from_links(edge_count, std::move(links));
}

} // namespace looptree
