#include "looptree/cli/commands.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "looptree/bounds.hpp"
#include "looptree/measure.hpp"

namespace looptree::cli {

namespace {

ModelParams params_at(const ExperimentConfig& c, double beta)
{
    return ModelParams{c.theta, beta, c.u};
}

std::vector<Event> reach_events(const ExperimentConfig& c)
{
    std::vector<Event> events;
    for (std::uint32_t m : c.ms) events.push_back(Event::reach(m));
    return events;
}

EstimatorMethod estimator_of(const ExperimentConfig& c)
{
    if (c.method == Method::mcmc) return EstimatorMethod::mcmc;
    if (c.method == Method::cluster) return EstimatorMethod::cluster;
    return c.tree == TreeKind::gw ? EstimatorMethod::quenched : EstimatorMethod::importance;
}

McmcSchedule schedule_of(const ExperimentConfig& c)
{
    McmcSchedule s;
    s.steps = c.steps;
    s.burn_in = c.burn_in;
    s.thin = c.thin;
    return s;
}

Tree build_regular(const ExperimentConfig& c)
{
    try {
        return regular_tree(c.d, c.n);
    } catch (const std::length_error& e) {
        throw std::length_error(std::string(e.what()) + "; use method = cluster for large regular trees");
    }
}

std::vector<RatioEstimate> quenched_mcmc(const ExperimentConfig& c, const ModelParams& p,
                                         std::span<const Event> events)
{
    const auto dist = c.distribution();
    const auto schedule = schedule_of(c);
    auto per_tree = run_units<std::vector<double>>(c.n_trees, c.workers, [&](std::uint64_t t) {
        RandomStream tree_rng(derive_seed(*c.seed, 0, t));
        const Tree tree = sample_gw_tree(dist, c.n, tree_rng);
        RandomStream chain_rng(derive_seed(*c.seed, 1, t));
        const auto result = run_mcmc(tree, p, events, schedule, chain_rng);
        std::vector<double> values;
        for (const auto& e : result.estimates) values.push_back(e.value);
        return values;
    });
    std::vector<RatioEstimate> out;
    const double trees = static_cast<double>(c.n_trees);
    for (std::size_t i = 0; i < events.size(); ++i) {
        double sum = 0.0;
        for (const auto& v : per_tree) sum += v[i];
        const double mean = sum / trees;
        double ss = 0.0;
        for (const auto& v : per_tree) ss += (v[i] - mean) * (v[i] - mean);
        RatioEstimate r;
        r.method = EstimatorMethod::mcmc;
        r.value = r.raw_value = mean;
        r.numerator_sum = sum;
        r.denominator_sum = trees;
        r.n_samples = c.n_trees;
        r.std_error = std::sqrt(ss / (trees - 1.0) / trees);
        out.push_back(r);
    }
    return out;
}

void write_row(std::ostream& out, const ExperimentConfig& c, double beta, std::uint32_t m, const RatioEstimate& r)
{
    out << format_double(beta) << ',' << format_double(c.theta) << ',' << format_double(c.u) << ','
        << format_double(c.d_or_mu()) << ',' << c.n << ',' << m << ',' << to_string(r.method) << ','
        << format_double(r.value) << ',' << format_double(r.std_error) << ',' << r.n_samples << ',' << *c.seed;
}

} // namespace

std::vector<RatioEstimate> estimate_levels(const ExperimentConfig& c, double beta)
{
    c.validate();
    const auto events = reach_events(c);
    if (beta == 0.0) {
        std::vector<RatioEstimate> out;
        for (std::uint32_t m : c.ms) {
            RatioEstimate r;
            r.method = estimator_of(c);
            r.value = r.raw_value = m == 0 ? 1.0 : 0.0;
            r.n_samples = c.samples;
            r.numerator_sum = r.value * static_cast<double>(c.samples);
            r.denominator_sum = static_cast<double>(c.samples);
            out.push_back(r);
        }
        return out;
    }
    const ModelParams p = params_at(c, beta);
    p.validate();

    if (c.tree == TreeKind::gw) {
        if (c.method == Method::mcmc) return quenched_mcmc(c, p, events);
        QuenchedOptions o;
        o.n_trees = c.n_trees;
        o.samples_per_tree = c.samples;
        o.proposal = c.proposal;
        o.workers = c.workers;
        o.seed = *c.seed;
        return estimate_quenched(c.distribution(), c.n, c.ms, p, o).estimates;
    }
    switch (c.method) {
    case Method::importance: {
        ImportanceOptions o;
        o.samples = c.samples;
        o.proposal = c.proposal;
        o.workers = c.workers;
        o.seed = *c.seed;
        return estimate_weighted_probs(build_regular(c), p, events, o);
    }
    case Method::cluster: {
        ClusterOptions o;
        o.samples = c.samples;
        o.level_samples = c.level_samples == 0 ? c.samples : c.level_samples;
        o.workers = c.workers;
        o.seed = *c.seed;
        return estimate_regular_cluster(c.d, c.n, p, events, o).estimates;
    }
    case Method::mcmc: {
        RandomStream rng(derive_seed(*c.seed, 0));
        return run_mcmc(build_regular(c), p, events, schedule_of(c), rng).estimates;
    }
    }
    throw std::logic_error("unhandled method");
}

void cmd_simulate(const ExperimentConfig& c, std::ostream& out, OutputFormat format)
{
    c.validate();
    const double beta = c.betas.front();
    const auto estimates = estimate_levels(c, beta);
    if (format == OutputFormat::csv) {
        out << csv_header << '\n';
        for (std::size_t i = 0; i < c.ms.size(); ++i) {
            write_row(out, c, beta, c.ms[i], estimates[i]);
            out << '\n';
        }
        return;
    }
    for (std::size_t i = 0; i < c.ms.size(); ++i) {
        const auto& r = estimates[i];
        nlohmann::ordered_json j;
        j["beta"] = beta;
        j["theta"] = c.theta;
        j["u"] = c.u;
        j["d_or_mu"] = c.d_or_mu();
        j["n"] = c.n;
        j["m"] = c.ms[i];
        j["method"] = to_string(r.method);
        j["value"] = r.value;
        j["raw_value"] = r.raw_value;
        j["std_error"] = r.std_error;
        if (r.bootstrap_std_error) j["bootstrap_std_error"] = *r.bootstrap_std_error;
        j["n_samples"] = r.n_samples;
        j["effective_sample_size"] = r.effective_sample_size;
        j["ess_warning"] = r.ess_warning;
        j["seed"] = *c.seed;
        out << j.dump() << '\n';
    }
}

void cmd_mcmc(const ExperimentConfig& config, std::ostream& out, std::ostream& diagnostics)
{
    ExperimentConfig c = config;
    c.method = Method::mcmc;
    c.validate();
    const double beta = c.betas.front();
    if (c.tree == TreeKind::gw || beta == 0.0) {
        cmd_simulate(c, out);
        return;
    }
    const auto events = reach_events(c);
    RandomStream rng(derive_seed(*c.seed, 0));
    const auto result = run_mcmc(build_regular(c), params_at(c, beta), events, schedule_of(c), rng);
    out << csv_header << '\n';
    for (std::size_t i = 0; i < c.ms.size(); ++i) {
        write_row(out, c, beta, c.ms[i], result.estimates[i]);
        out << '\n';
    }
    const auto& s = result.final_state;
    nlohmann::ordered_json j;
    j["steps"] = s.steps;
    j["recorded"] = result.recorded;
    j["insert_proposed"] = s.insert_proposed;
    j["insert_accepted"] = s.insert_accepted;
    j["delete_proposed"] = s.delete_proposed;
    j["delete_accepted"] = s.delete_accepted;
    j["mean_links_per_edge"] = result.mean_links_per_edge;
    j["mean_links_std_error"] = result.mean_links_std_error;
    j["final_loops"] = s.loops;
    diagnostics << j.dump() << '\n';
}

void cmd_scan_beta(const ExperimentConfig& c, std::ostream& out)
{
    c.validate();
    const auto dist = c.distribution();
    out << csv_header << ",q_tilde,q_tilde_pow,a_empty_upper,a_lower,epsilon,part1,part2\n";
    for (double beta : c.betas) {
        const auto estimates = estimate_levels(c, beta);
        const ModelParams p = params_at(c, beta);
        const double qt = q_tilde(dist, p);
        const double empty_upper = empty_root_moment(dist, p);
        const double a_lower =
            moment_functional(dist, MomentFunction::power(single_edge_factor(c.theta, beta)));
        const auto eps = find_epsilon(dist, p);
        for (std::size_t i = 0; i < c.ms.size(); ++i) {
            const std::uint32_t m = c.ms[i];
            write_row(out, c, beta, m, estimates[i]);
            out << ',' << format_double(qt) << ',';
            if (m >= 1) out << format_double(std::pow(qt, static_cast<double>(m - 1)));
            out << ',' << format_double(empty_upper) << ',' << format_double(a_lower) << ',';
            if (eps) out << format_double(*eps);
            out << ',' << (eps ? "true" : "false") << ',' << (qt < 1.0 ? "true" : "false") << '\n';
        }
    }
}

void cmd_check(const ExperimentConfig& c, std::ostream& out)
{
    if (c.workers == 0) throw std::invalid_argument("config field 'workers': must be at least 1");
    if (!(c.theta >= 1.0)) throw std::invalid_argument("config field 'theta': must be >= 1");
    if (c.betas.empty() || !(c.betas.front() >= 0.0))
        throw std::invalid_argument("config field 'beta': must be >= 0");
    if (c.epsilon && !(*c.epsilon > 0.0 && *c.epsilon < 1.0))
        throw std::invalid_argument("config field 'epsilon': must lie in (0, 1)");
    const auto dist = c.distribution();
    const ModelParams p = params_at(c, c.betas.front());

    std::optional<double> eps = c.epsilon;
    const bool searched = !eps.has_value();
    if (!eps) eps = find_epsilon(dist, p);
    auto report = check_theorem2(dist, p, eps);

    nlohmann::ordered_json extra;
    extra["epsilon_searched"] = searched;
    if (eps) {
        const auto trace = zeta_recursion_lower(dist, p, *eps, c.m_max);
        report.zeta_m = trace.zeta_upper;
        extra["long_loop_lower"] = trace.long_loop_lower;
        extra["sigma_upper"] = trace.sigma_upper;
        extra["invariant_maintained"] = trace.invariant_maintained;
    }
    if (c.q) {
        if (c.tree == TreeKind::regular) report.c_d = c_d(*c.q, c.theta, c.d);
        const auto d0 = corollary3_d0(*c.q, c.theta);
        report.d0 = d0.d0;
        extra["c_d0"] = d0.c_d0;
        extra["q_tilde_at_d0"] = d0.q_tilde_at_d0;
        extra["d0_dominated"] = d0.dominated;
    }
    if (c.a || c.b || c.c1 || c.c2) {
        if (!(c.a && c.b && c.c1 && c.c2))
            throw std::invalid_argument("config fields 'a', 'b', 'c1', 'c2' must be given together");
        const auto l0 = corollary3_lambda0(dist, *c.a, *c.b, *c.c1, *c.c2, c.theta);
        report.lambda0 = l0.lambda0;
        extra["lambda0_epsilon"] = l0.epsilon;
        extra["prob_b"] = l0.prob_b;
        extra["lambda0_beta_grid"] = l0.beta_grid;
        extra["lambda0_verified"] = l0.verified;
    }
    auto j = nlohmann::ordered_json::parse(report.to_json());
    for (auto& [k, v] : extra.items()) j[k] = v;
    out << j.dump(2) << '\n';
}

} // namespace looptree::cli
