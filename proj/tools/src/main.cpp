#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "looptree/cli/commands.hpp"

using namespace looptree::cli;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    std::optional<double> beta;
    std::vector<double> betas;
    std::optional<double> theta;
    std::optional<double> u;
    std::optional<std::uint32_t> d;
    std::optional<double> mu;
    std::optional<std::uint32_t> n;
    std::vector<std::uint32_t> ms;
    std::optional<std::uint64_t> samples;
    std::string method;
    std::string proposal;
    std::string format = "csv";
    std::optional<double> epsilon;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--workers", workers, "Worker threads");
        cmd->add_option("--out", out, "Output path (default stdout)");
        cmd->add_option("--beta", beta, "Interval length beta");
        cmd->add_option("--betas", betas, "Beta grid")->delimiter(',');
        cmd->add_option("--theta", theta, "Loop weight theta");
        cmd->add_option("--u", u, "Cross fraction u");
        cmd->add_option("--d", d, "Children per vertex of the regular tree");
        cmd->add_option("--mu", mu, "Poisson offspring mean (switches to a GW tree)");
        cmd->add_option("--n", n, "Cut level");
        cmd->add_option("--m", ms, "Target generation(s)")->delimiter(',');
        cmd->add_option("--samples", samples, "Samples (per tree for GW trees)");
        cmd->add_option("--method", method, "importance, mcmc or cluster");
        cmd->add_option("--proposal", proposal, "reference or tilted");
        cmd->add_option("--epsilon", epsilon, "Epsilon for the long-loop conditions");
    }

    ExperimentConfig resolve() const
    {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        if (!out.empty()) c.out = out;
        if (beta) c.betas = {*beta};
        if (!betas.empty()) c.betas = betas;
        if (theta) c.theta = *theta;
        if (u) c.u = *u;
        if (d) {
            c.d = *d;
            c.tree = TreeKind::regular;
        }
        if (mu) {
            c.mu = *mu;
            c.tree = TreeKind::gw;
            c.offspring = "poisson";
        }
        if (n) c.n = *n;
        if (!ms.empty()) c.ms = ms;
        if (samples) c.samples = *samples;
        if (!method.empty()) c.method = parse_method(method);
        if (!proposal.empty()) c.proposal = parse_proposal(proposal);
        if (epsilon) c.epsilon = *epsilon;
        return c;
    }
};

template <class Fn>
int with_output(const ExperimentConfig& c, Fn&& fn)
{
    if (c.out.empty()) {
        fn(std::cout);
        return 0;
    }
    std::ofstream file(c.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + c.out + "'");
    fn(file);
    if (!file) throw std::runtime_error("failed writing '" + c.out + "'");
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random loop model on trees: simulation and bound checks"};
    app.require_subcommand(1);

    Overrides simulate_opts, scan_opts, check_opts, mcmc_opts;
    auto* simulate = app.add_subcommand("simulate", "Estimate P[E^{r->m}] for each m");
    simulate_opts.attach(simulate);
    simulate->add_option("--format", simulate_opts.format, "csv or json");
    auto* scan = app.add_subcommand("scan-beta", "Estimates and analytic columns over a beta grid");
    scan_opts.attach(scan);
    auto* check = app.add_subcommand("check", "Evaluate the long/no long loop conditions as JSON");
    check_opts.attach(check);
    auto* mcmc = app.add_subcommand("mcmc", "Estimate with the Metropolis chain");
    mcmc_opts.attach(mcmc);
    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (selftest->parsed()) return cmd_selftest(std::cout) ? 0 : 3;
        if (simulate->parsed()) {
            const auto c = simulate_opts.resolve();
            OutputFormat format;
            if (simulate_opts.format == "csv") format = OutputFormat::csv;
            else if (simulate_opts.format == "json") format = OutputFormat::json;
            else throw std::invalid_argument("--format must be csv or json");
            c.validate();
            return with_output(c, [&](std::ostream& os) { cmd_simulate(c, os, format); });
        }
        if (scan->parsed()) {
            const auto c = scan_opts.resolve();
            c.validate();
            return with_output(c, [&](std::ostream& os) { cmd_scan_beta(c, os); });
        }
        if (check->parsed()) {
            const auto c = check_opts.resolve();
            return with_output(c, [&](std::ostream& os) { cmd_check(c, os); });
        }
        if (mcmc->parsed()) {
            auto c = mcmc_opts.resolve();
            c.method = Method::mcmc;
            c.validate();
            return with_output(c, [&](std::ostream& os) { cmd_mcmc(c, os, std::cerr); });
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
