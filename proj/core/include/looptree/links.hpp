#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "looptree/random.hpp"
#include "looptree/tree.hpp"

namespace looptree {

/// Model parameters: loop weight theta, interval length beta, cross fraction u.
struct ModelParams {
    double theta = 1.0;
    double beta = 1.0;
    double u = 0.5;

    /// Throws std::invalid_argument unless theta >= 1, beta > 0, 0 <= u <= 1.
    void validate() const;
};

enum class LinkKind : std::uint8_t { cross, bar };

char kind_letter(LinkKind kind) noexcept;

struct Link {
    double time = 0.0;
    LinkKind kind = LinkKind::cross;
};

/// A link together with the edge carrying it.
struct PlacedLink {
    EdgeId edge = 0;
    double time = 0.0;
    LinkKind kind = LinkKind::cross;

    friend bool operator==(const PlacedLink&, const PlacedLink&) = default;
};

/// Link configuration on the edges of a tree.
///
/// All links are kept in one vector ordered by (edge, time); the links of a
/// single edge form a contiguous, strictly time-increasing run. Mutators
/// return new values and leave the receiver untouched.
class LinkConfig {
public:
    LinkConfig() = default;
    explicit LinkConfig(std::size_t edge_count) : edge_count_(edge_count) {}

    /// Sorts and validates an arbitrary list of links.
    static LinkConfig from_links(std::size_t edge_count, std::vector<PlacedLink> links);

    std::size_t edge_count() const noexcept { return edge_count_; }
    std::size_t total_links() const noexcept { return links_.size(); }
    bool empty() const noexcept { return links_.empty(); }

    std::span<const PlacedLink> all() const noexcept { return links_; }
    std::span<const PlacedLink> on_edge(EdgeId e) const;
    std::size_t link_count(EdgeId e) const { return on_edge(e).size(); }

    /// Sorted insertion; throws if the edge already holds a link at `link.time`.
    LinkConfig insert_link(EdgeId e, Link link) const;
    /// Removes the index-th link (in time order) of edge e.
    LinkConfig remove_link(EdgeId e, std::size_t index) const;
    /// Copy without any link on the listed edges.
    LinkConfig without_edges(std::span<const EdgeId> edges) const;

    /// In-place forms used by the Markov chain. Return false instead of
    /// throwing on a time collision.
    bool insert_in_place(EdgeId e, Link link);
    void erase_in_place(std::size_t flat_index);

    /// Throws std::logic_error if ordering or range invariants are broken.
    void check_invariants() const;

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;

private:
    friend class EdgeProposal;

    std::size_t edge_count_ = 0;
    std::vector<PlacedLink> links_;
};

/// Independent Poisson crosses (rate u) and bars (rate 1-u) on every edge
/// over [0, beta).
LinkConfig sample_links(const Tree& tree, const ModelParams& params, RandomStream& rng);

/// Link counts on the root edges, (N^{r,x_1}, ..., N^{r,x_d}).
std::vector<std::uint32_t> root_edge_profile(const Tree& tree, const LinkConfig& config);

/// Root-edge pattern events.
namespace root_events {
bool all_at_most_one(std::span<const std::uint32_t> profile) noexcept; ///< A
bool all_empty(std::span<const std::uint32_t> profile) noexcept;       ///< A_empty
/// A_J: exactly one link on edges in J (bitmask over child index), none elsewhere.
bool exactly_one_on(std::span<const std::uint32_t> profile, std::uint64_t subset) noexcept;
/// Hat A_J: at least one link on edges in J, none elsewhere.
bool occupied_exactly(std::span<const std::uint32_t> profile, std::uint64_t subset) noexcept;
} // namespace root_events

/// Line format "edge_id time kind", kind X (cross) or B (bar). Times use the
/// shortest representation that round-trips.
void write_links(std::ostream& os, const LinkConfig& config);
std::string to_text(const LinkConfig& config);
LinkConfig read_links(std::istream& is, std::size_t edge_count);

/// Shortest round-trip decimal form of a double, locale independent.
std::string format_double(double x);

} // namespace looptree
