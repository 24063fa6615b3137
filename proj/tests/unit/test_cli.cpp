#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "looptree/cli/commands.hpp"

using namespace looptree;
using namespace looptree::cli;

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) rows.push_back(split(line, ','));
    return rows;
}

std::string simulate(const ExperimentConfig& c)
{
    std::ostringstream os;
    cmd_simulate(c, os);
    return os.str();
}

ExperimentConfig base_config()
{
    ExperimentConfig c;
    c.d = 3;
    c.n = 3;
    c.theta = 2.0;
    c.betas = {0.5};
    c.ms = {0, 1, 2};
    c.samples = 20000;
    c.seed = 42;
    return c;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(LOOPTREE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("config validation names the field")
    {
        ExperimentConfig c = base_config();
        c.seed.reset();
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("seed"), std::invalid_argument);
        c = base_config();
        c.ms = {4};
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("m"), std::invalid_argument);
        c = base_config();
        c.theta = 0.5;
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("theta"), std::invalid_argument);
        c = base_config();
        c.betas.clear();
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
        c = base_config();
        CHECK_THROWS_AS(apply_json(c, R"({"bogus": 1})"), std::invalid_argument);
        CHECK_THROWS_AS(apply_json(c, R"({"theta": "two"})"), std::invalid_argument);
        apply_json(c, R"({"tree": "gw", "mu": 3.5, "betas": [0.1, 0.2], "m": 2, "seed": 7, "method": "importance"})");
        CHECK(c.tree == TreeKind::gw);
        CHECK(c.d_or_mu() == 3.5);
        CHECK(c.betas.size() == 2);
        CHECK(c.ms == std::vector<std::uint32_t>{2});
        CHECK(c.seed.value() == 7);
        CHECK_NOTHROW(c.validate());
    }

    TEST_CASE("simulate writes the fixed header and an exact m = 0 row")
    {
        const std::string csv = simulate(base_config());
        CHECK(csv.substr(0, csv.find('\n')) == csv_header);
        const auto rows = rows_of(csv);
        REQUIRE(rows.size() == 3);
        for (const auto& r : rows) CHECK(r.size() == 11);
        CHECK(rows[0][5] == "0");
        CHECK(rows[0][7] == "1");
        CHECK(rows[0][10] == "42");
        CHECK(std::stod(rows[2][7]) <= std::stod(rows[1][7]));
    }

    TEST_CASE("simulate is reproducible across runs and worker counts")
    {
        ExperimentConfig c = base_config();
        const std::string a = simulate(c);
        CHECK(simulate(c) == a);
        c.workers = 4;
        CHECK(simulate(c) == a);
        c.method = Method::cluster;
        c.workers = 1;
        const std::string cl = simulate(c);
        c.workers = 3;
        CHECK(simulate(c) == cl);
    }

    TEST_CASE("theta = 1 importance and MCMC rows agree")
    {
        ExperimentConfig c = base_config();
        c.theta = 1.0;
        c.ms = {1, 2, 3};
        c.samples = 50000;
        const auto is = rows_of(simulate(c));
        c.method = Method::mcmc;
        c.steps = 600000;
        c.burn_in = 20000;
        c.thin = 5;
        std::ostringstream os, diag;
        cmd_mcmc(c, os, diag);
        const auto mc = rows_of(os.str());
        REQUIRE(mc.size() == is.size());
        for (std::size_t i = 0; i < is.size(); ++i) {
            CHECK(mc[i][6] == "mcmc");
            const double diff = std::abs(std::stod(is[i][7]) - std::stod(mc[i][7]));
            const double se = std::hypot(std::stod(is[i][8]), std::stod(mc[i][8]));
            CHECK(diff <= 3.0 * se);
        }
        const auto d = nlohmann::json::parse(diag.str());
        CHECK(d.at("insert_accepted").get<std::uint64_t>() > 0);
    }

    TEST_CASE("scan-beta rows")
    {
        ExperimentConfig c;
        c.d = 200;
        c.n = 2;
        c.theta = 2.0;
        c.betas = {0.0, 0.5 / 200, 4.0 / 200};
        c.ms = {1, 2};
        c.method = Method::cluster;
        c.samples = 4000;
        c.seed = 3;
        std::ostringstream os;
        cmd_scan_beta(c, os);
        const auto rows = rows_of(os.str());
        REQUIRE(rows.size() == 6);
        // beta = 0: no links, so no loop leaves the root.
        CHECK(rows[0][7] == "0");
        CHECK(rows[1][7] == "0");
        // Subcritical row: q_tilde < 1 and the estimate sits under the decay bound.
        for (std::size_t i : {2u, 3u}) {
            CHECK(rows[i][17] == "true");
            CHECK(std::stod(rows[i][11]) < 1.0);
            CHECK(std::stod(rows[i][7]) <= std::stod(rows[i][12]) + 3.0 * std::stod(rows[i][8]));
        }
        CHECK(rows[2][16] == "false");
        // Inside the window the long-loop verdict takes over.
        CHECK(rows[4][16] == "true");
        CHECK(rows[4][17] == "false");
    }

    TEST_CASE("check reports")
    {
        ExperimentConfig c;
        c.tree = TreeKind::gw;
        c.mu = 400.0;
        c.theta = 2.0;
        c.betas = {4.0 / 400.0};
        std::ostringstream os;
        cmd_check(c, os);
        const auto j = nlohmann::json::parse(os.str());
        CHECK(j.at("part1").get<bool>());
        CHECK(j.at("invariant_maintained").get<bool>());

        c.betas = {0.0};
        std::ostringstream zero;
        cmd_check(c, zero);
        const auto z = nlohmann::json::parse(zero.str());
        CHECK(z.at("part2").get<bool>());
        CHECK(z.at("q_tilde").get<double>() == 0.0);
    }

    TEST_CASE("selftest passes")
    {
        std::ostringstream os;
        CHECK(cmd_selftest(os));
        CHECK(os.str().find("FAIL") == std::string::npos);
    }

    TEST_CASE("exit codes")
    {
        CHECK(run_cli("selftest") == 0);
        CHECK(run_cli("simulate --d 2 --n 2 --beta 0.3 --m 1 --samples 100") == 1);
        CHECK(run_cli("simulate --seed 1 --d 2 --n 2 --beta 0.3 --m 5 --samples 100") == 1);
        CHECK(run_cli("simulate --bogus") == 1);
        CHECK(run_cli("simulate --seed 1 --d 2 --n 2 --beta 0.3 --m 1 --samples 100") == 0);
        CHECK(run_cli("simulate --seed 1 --d 2 --n 40 --beta 0.3 --m 1 --samples 100") == 2);

        const auto dir = std::filesystem::temp_directory_path();
        const auto cfg = dir / "looptree_cli_test.json";
        const auto out = dir / "looptree_cli_test.csv";
        std::ofstream(cfg) << R"({"tree": "regular", "d": 2, "n": 2, "theta": 2, "beta": 0.4, "m": [1, 2],
                                  "samples": 500, "seed": 9})";
        CHECK(run_cli("simulate --config " + cfg.string() + " --workers 2 --out " + out.string()) == 0);
        std::ifstream in(out);
        std::string header;
        std::getline(in, header);
        CHECK(header == csv_header);
        std::filesystem::remove(cfg);
        std::filesystem::remove(out);
    }
}
