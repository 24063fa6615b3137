#include "looptree/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace looptree::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message)
{
    throw std::invalid_argument("config field '" + field + "': " + message);
}

template <class T>
T get_as(const json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        fail(key, "wrong type");
    }
}

std::uint64_t get_count(const json& j, const std::string& key)
{
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) fail(key, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

std::vector<double> get_doubles(const json& j, const std::string& key)
{
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) fail(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) fail(key, "expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<std::uint32_t> get_levels(const json& j, const std::string& key)
{
    if (j.is_number_integer()) return {static_cast<std::uint32_t>(get_count(j, key))};
    if (!j.is_array()) fail(key, "expected an integer or an array of integers");
    std::vector<std::uint32_t> out;
    for (const auto& x : j) out.push_back(static_cast<std::uint32_t>(get_count(x, key)));
    return out;
}

} // namespace

std::string to_string(Method method)
{
    switch (method) {
    case Method::importance: return "importance";
    case Method::mcmc: return "mcmc";
    case Method::cluster: return "cluster";
    }
    return "?";
}

Method parse_method(const std::string& text)
{
    if (text == "importance") return Method::importance;
    if (text == "mcmc") return Method::mcmc;
    if (text == "cluster") return Method::cluster;
    fail("method", "expected importance, mcmc or cluster, got '" + text + "'");
}

ProposalKind parse_proposal(const std::string& text)
{
    if (text == "reference") return ProposalKind::reference;
    if (text == "tilted") return ProposalKind::tilted;
    fail("proposal", "expected reference or tilted, got '" + text + "'");
}

void apply_json(ExperimentConfig& c, const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "tree") {
            const auto s = get_as<std::string>(v, key);
            if (s == "regular") c.tree = TreeKind::regular;
            else if (s == "gw") c.tree = TreeKind::gw;
            else fail(key, "expected regular or gw");
        } else if (key == "d") {
            c.d = static_cast<std::uint32_t>(get_count(v, key));
        } else if (key == "offspring") {
            c.offspring = get_as<std::string>(v, key);
        } else if (key == "mu") {
            c.mu = get_as<double>(v, key);
        } else if (key == "pmf") {
            if (!v.is_object()) fail(key, "expected an object mapping counts to masses");
            c.pmf.clear();
            for (const auto& [k, p] : v.items()) {
                std::uint64_t count = 0;
                try {
                    std::size_t used = 0;
                    count = std::stoull(k, &used);
                    if (used != k.size()) throw std::invalid_argument(k);
                } catch (const std::exception&) {
                    fail(key, "keys must be non-negative integers, got '" + k + "'");
                }
                c.pmf.emplace_back(count, get_as<double>(p, key));
            }
        } else if (key == "lambda") {
            c.lambda = get_count(v, key);
        } else if (key == "n") {
            c.n = static_cast<std::uint32_t>(get_count(v, key));
        } else if (key == "theta") {
            c.theta = get_as<double>(v, key);
        } else if (key == "beta" || key == "betas") {
            c.betas = get_doubles(v, key);
        } else if (key == "u") {
            c.u = get_as<double>(v, key);
        } else if (key == "m" || key == "ms") {
            c.ms = get_levels(v, key);
        } else if (key == "m_range") {
            const auto r = get_levels(v, key);
            if (r.size() != 2 || r[0] > r[1]) fail(key, "expected [lo, hi] with lo <= hi");
            c.ms.clear();
            for (std::uint32_t m = r[0]; m <= r[1]; ++m) c.ms.push_back(m);
        } else if (key == "method") {
            c.method = parse_method(get_as<std::string>(v, key));
        } else if (key == "proposal") {
            c.proposal = parse_proposal(get_as<std::string>(v, key));
        } else if (key == "samples") {
            c.samples = get_count(v, key);
        } else if (key == "level_samples") {
            c.level_samples = get_count(v, key);
        } else if (key == "n_trees") {
            c.n_trees = get_count(v, key);
        } else if (key == "steps") {
            c.steps = get_count(v, key);
        } else if (key == "burn_in") {
            c.burn_in = get_count(v, key);
        } else if (key == "thin") {
            c.thin = get_count(v, key);
        } else if (key == "seed") {
            c.seed = get_count(v, key);
        } else if (key == "workers") {
            c.workers = static_cast<unsigned>(get_count(v, key));
        } else if (key == "out") {
            c.out = get_as<std::string>(v, key);
        } else if (key == "epsilon") {
            c.epsilon = get_as<double>(v, key);
        } else if (key == "m_max") {
            c.m_max = static_cast<std::uint32_t>(get_count(v, key));
        } else if (key == "q") {
            c.q = get_as<double>(v, key);
        } else if (key == "a") {
            c.a = get_as<double>(v, key);
        } else if (key == "b") {
            c.b = get_as<double>(v, key);
        } else if (key == "c1") {
            c.c1 = get_as<double>(v, key);
        } else if (key == "c2") {
            c.c2 = get_as<double>(v, key);
        } else {
            fail(key, "unknown key");
        }
    }
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    ExperimentConfig c;
    apply_json(c, text.str());
    return c;
}

void ExperimentConfig::validate() const
{
    if (!seed) fail("seed", "is required");
    if (workers == 0) fail("workers", "must be at least 1");
    if (!(theta >= 1.0)) fail("theta", "must be >= 1");
    if (!(u >= 0.0 && u <= 1.0)) fail("u", "must lie in [0, 1]");
    if (betas.empty()) fail("beta", "grid must not be empty");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] >= 0.0) || !std::isfinite(betas[i])) fail("beta", "values must be finite and >= 0");
        if (i > 0 && betas[i] < betas[i - 1]) fail("beta", "grid must be sorted");
    }
    if (ms.empty()) fail("m", "must not be empty");
    for (std::uint32_t m : ms)
        if (m > n) fail("m", "value " + std::to_string(m) + " exceeds n = " + std::to_string(n));
    if (tree == TreeKind::regular && d == 0) fail("d", "must be at least 1");
    if (tree == TreeKind::gw) {
        if (offspring != "poisson" && offspring != "deterministic" && offspring != "empirical")
            fail("offspring", "expected poisson, deterministic or empirical");
        if (offspring == "poisson" && !(mu > 0.0)) fail("mu", "must be positive");
        if (offspring == "empirical" && pmf.empty()) fail("pmf", "is required for empirical offspring");
        if (lambda == 0) fail("lambda", "must be at least 1");
        if (method == Method::cluster) fail("method", "cluster requires tree = regular");
        if (n_trees < 2) fail("n_trees", "must be at least 2");
    }
    if (samples < 2) fail("samples", "must be at least 2");
    if (method == Method::mcmc) {
        if (steps <= burn_in) fail("steps", "must exceed burn_in");
        if (thin == 0) fail("thin", "must be at least 1");
    }
    if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
    if (m_max == 0) fail("m_max", "must be at least 1");
}

OffspringDistribution ExperimentConfig::distribution() const
{
    if (tree == TreeKind::regular) return OffspringDistribution::deterministic(d);
    OffspringDistribution base = OffspringDistribution::deterministic(d);
    if (offspring == "poisson") {
        base = OffspringDistribution::poisson(mu);
    } else if (offspring == "empirical") {
        std::map<std::uint64_t, double> table(pmf.begin(), pmf.end());
        base = OffspringDistribution::empirical(std::move(table));
    }
    return lambda == 1 ? base : OffspringDistribution::scaled(lambda, base);
}

double ExperimentConfig::d_or_mu() const
{
    return tree == TreeKind::regular ? static_cast<double>(d) : distribution().mean();
}

} // namespace looptree::cli
