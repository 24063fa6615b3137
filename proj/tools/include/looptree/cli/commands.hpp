#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "looptree/cli/config.hpp"
#include "looptree/estimate.hpp"

namespace looptree::cli {

inline constexpr const char* csv_header = "beta,theta,u,d_or_mu,n,m,method,p_hat,std_error,n_samples,seed";

enum class OutputFormat { csv, json };

/// Paired estimates of P[E^{r->m}] for every configured m at one beta.
/// beta = 0 is answered exactly: no links, so only m = 0 is reached.
std::vector<RatioEstimate> estimate_levels(const ExperimentConfig& config, double beta);

/// Estimates for the first configured beta, one row per m.
void cmd_simulate(const ExperimentConfig& config, std::ostream& out, OutputFormat format = OutputFormat::csv);

/// simulate with the Markov chain; acceptance diagnostics go to `diagnostics` as one JSON line.
void cmd_mcmc(const ExperimentConfig& config, std::ostream& out, std::ostream& diagnostics);

/// One row per (beta, m), with analytic columns appended.
void cmd_scan_beta(const ExperimentConfig& config, std::ostream& out);

/// Condition report for the first configured beta, as one JSON object.
void cmd_check(const ExperimentConfig& config, std::ostream& out);

/// Runs the built-in invariant suites. Returns true iff all pass.
bool cmd_selftest(std::ostream& out);

} // namespace looptree::cli
