#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "looptree/edge_proposal.hpp"
#include "looptree/links.hpp"
#include "looptree/offspring.hpp"

namespace looptree::cli {

enum class TreeKind { regular, gw };
enum class Method { importance, mcmc, cluster };

/// One experiment, read from a flat JSON object and overridden by flags.
struct ExperimentConfig {
    TreeKind tree = TreeKind::regular;
    std::uint32_t d = 2;
    std::string offspring = "poisson"; ///< gw only: poisson, deterministic or empirical
    double mu = 1.0;
    std::vector<std::pair<std::uint64_t, double>> pmf; ///< empirical offspring table
    std::uint64_t lambda = 1;                            ///< gw only: rescaling factor
    std::uint32_t n = 3;

    double theta = 1.0;
    std::vector<double> betas{1.0}; ///< one entry for simulate, the grid for scan-beta
    double u = 0.5;

    std::vector<std::uint32_t> ms{1};

    Method method = Method::importance;
    ProposalKind proposal = ProposalKind::tilted;
    std::uint64_t samples = 10000;
    std::uint64_t level_samples = 0; ///< cluster only; 0 means `samples`
    std::uint64_t n_trees = 100;
    std::uint64_t steps = 1'000'000;
    std::uint64_t burn_in = 100'000;
    std::uint64_t thin = 10;

    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out; ///< empty means stdout

    // check only
    std::optional<double> epsilon;
    std::uint32_t m_max = 10;
    std::optional<double> q;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> c1;
    std::optional<double> c2;

    /// Field-level checks; throws std::invalid_argument naming the field.
    void validate() const;

    /// Offspring law of the tree (deterministic(d) for regular trees).
    OffspringDistribution distribution() const;

    /// Value written in the d_or_mu column: d for regular trees, E[X] otherwise.
    double d_or_mu() const;
};

/// Reads a config file; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

/// Applies a JSON object on top of `config`.
void apply_json(ExperimentConfig& config, const std::string& json_text);

std::string to_string(Method method);
Method parse_method(const std::string& text);
ProposalKind parse_proposal(const std::string& text);

} // namespace looptree::cli
