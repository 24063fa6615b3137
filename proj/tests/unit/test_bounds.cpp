#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "looptree/bounds.hpp"

using namespace looptree;

namespace {

// Independent closed form of q_tilde under Poisson(mu) offspring.
double poisson_q_tilde(double mu, double theta, double beta)
{
    const double g = (std::exp(beta * theta) - 1.0) / (theta * theta);
    const double s = std::exp(-beta / theta);
    return mu * s * g * std::exp(mu * (s * (1.0 + g) - 1.0));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_SUITE("bounds")
{
    TEST_CASE("small-argument helpers")
    {
        for (double x : {1e-12, 1e-8, 1e-4, 5e-3, 0.02, 0.5, 3.0}) {
            long double term = static_cast<long double>(x), ref = 0.0L;
            for (int k = 2; k < 80; ++k) {
                term *= static_cast<long double>(x) / k;
                ref += term;
            }
            CHECK(rel(expm1_minus_x(x), static_cast<double>(ref)) < 1e-12);
        }
        CHECK(link_gain(2.0, 0.0) == 0.0);
        CHECK(single_edge_factor(2.0, 0.0) == 1.0);
        CHECK_THROWS_AS(link_gain(0.5, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(link_gain(2.0, -1.0), std::invalid_argument);
    }

    TEST_CASE("partition bounds examples")
    {
        const std::vector<double> f{2.0, 2.0, 2.0};
        const auto b = partition_bounds(3, ModelParams{2.0, 0.5, 0.5}, f);
        CHECK(b.lower == doctest::Approx(16.0 * std::exp(-0.75)).epsilon(1e-12));
        CHECK(b.upper == doctest::Approx(16.0 * std::exp(-1.5) * std::pow(1.0 + std::expm1(1.0) / 4.0, 3)).epsilon(1e-12));
        CHECK(b.lower == doctest::Approx(7.558).epsilon(1e-4));
        CHECK(b.upper == doctest::Approx(10.431).epsilon(1e-4));

        const auto tiny = partition_bounds(3, ModelParams{2.0, 1e-12, 0.5}, f);
        CHECK(tiny.lower == doctest::Approx(16.0));
        CHECK(tiny.upper == doctest::Approx(16.0));

        const std::vector<double> g{1.3, 2.1, 0.7, 5.0};
        const auto one = partition_bounds(4, ModelParams{1.0, 0.9, 0.5}, g);
        CHECK(one.lower == doctest::Approx(1.3 * 2.1 * 0.7 * 5.0).epsilon(1e-12));
        CHECK(one.upper == doctest::Approx(one.lower).epsilon(1e-12));
    }

    TEST_CASE("partition bounds are ordered on a grid")
    {
        for (std::uint64_t d = 0; d <= 10; ++d)
            for (double beta = 0.0; beta <= 2.0; beta += 0.05)
                for (double theta = 1.0; theta <= 4.0; theta += 0.1) {
                    const std::vector<double> f(d, 1.7);
                    const auto b = partition_bounds(d, ModelParams{theta, beta, 0.5}, f);
                    CHECK(b.lower <= b.upper * (1.0 + 1e-14));
                }
    }

    TEST_CASE("root pattern bounds")
    {
        const auto b0 = prob_A_bounds(3, ModelParams{2.0, 1e-12, 0.5});
        CHECK(b0.empty_upper == doctest::Approx(1.0));
        CHECK(b0.at_most_one_lower == doctest::Approx(1.0));
        CHECK(prob_A_bounds(4, ModelParams{2.0, 0.5, 0.5}).empty_upper == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(prob_A_bounds(3, ModelParams{2.0, 0.5, 0.5}).at_most_one_lower ==
              doctest::Approx(std::pow(5.0 / (3.0 + std::exp(1.0)), 3)).epsilon(1e-12));
        CHECK(prob_A_bounds(3, ModelParams{2.0, 0.5, 0.5}).at_most_one_lower == doctest::Approx(0.6686).epsilon(1e-4));
    }

    TEST_CASE("q_tilde examples")
    {
        const auto det20 = OffspringDistribution::deterministic(20);
        const double v = q_tilde(det20, ModelParams{2.0, 0.05, 0.5});
        const double g = std::expm1(0.1) / 4.0;
        CHECK(v == doctest::Approx(20.0 * std::exp(-0.5) * std::pow(1.0 + g, 19) * g).epsilon(1e-12));
        CHECK(v == doctest::Approx(0.5223).epsilon(1e-4));
        CHECK(q_tilde(OffspringDistribution::poisson(10.0), ModelParams{2.0, 1e-6, 0.5}) < 1e-4);
        CHECK(q_tilde(OffspringDistribution::poisson(10.0), ModelParams{2.0, 0.0, 0.5}) == 0.0);
    }

    TEST_CASE("Poisson closed forms agree with summation")
    {
        for (double mu : {0.5, 2.0, 5.0, 10.0, 40.0})
            for (double beta : {1e-4, 0.01, 0.05, 0.2, 0.8}) {
                CAPTURE(mu);
                CAPTURE(beta);
                const auto dist = OffspringDistribution::poisson(mu);
                const ModelParams p{2.0, beta, 0.5};
                const double closed = q_tilde(dist, p, MomentMethod::automatic);
                CHECK(rel(closed, q_tilde(dist, p, MomentMethod::series)) <= 1e-10);
                CHECK(rel(closed, poisson_q_tilde(mu, 2.0, beta)) <= 1e-10);
                CHECK(rel(empty_root_moment(dist, p), std::exp(-mu * -std::expm1(-beta / 2.0))) <= 1e-12);
                CHECK(rel(empty_root_moment(dist, p, MomentMethod::series), empty_root_moment(dist, p)) <= 1e-10);
                CHECK(rel(long_loop_difference(dist, p, 0.3, MomentMethod::series), long_loop_difference(dist, p, 0.3)) <=
                      1e-10);
            }
    }

    TEST_CASE("q_tilde increases with beta")
    {
        const std::vector<OffspringDistribution> dists{
            OffspringDistribution::poisson(3.0), OffspringDistribution::deterministic(7),
            OffspringDistribution::empirical({{0, 0.2}, {1, 0.3}, {4, 0.5}}),
            OffspringDistribution::scaled(3, OffspringDistribution::poisson(1.5))};
        for (const auto& dist : dists)
            for (double theta : {1.0, 2.0, 3.5}) {
                double prev = 0.0;
                for (int i = 1; i <= 200; ++i) {
                    const double cur = q_tilde(dist, ModelParams{theta, i / 200.0, 0.5});
                    CHECK(cur > prev);
                    prev = cur;
                }
            }
    }

    TEST_CASE("recursion trace")
    {
        const auto dead = zeta_recursion_lower(OffspringDistribution::empirical({{0, 1.0}}), ModelParams{2.0, 0.3, 0.5},
                                               0.1, 5);
        for (double x : dead.long_loop_lower) CHECK(x == 0.0);
        CHECK_FALSE(dead.invariant_maintained);
        REQUIRE(dead.first_violation);
        CHECK(*dead.first_violation == 1);

        // Point mass: each step is the scalar map zeta -> 1 - (r^d - (s (1 + (beta/theta) zeta))^d).
        const ModelParams p{2.0, 0.2, 0.5};
        const auto tr = zeta_recursion_lower(OffspringDistribution::deterministic(30), p, 0.05, 6);
        const double r = single_edge_factor(2.0, 0.2), s = std::exp(-0.1);
        double zeta = std::pow(s, 30);
        CHECK(tr.zeta_upper[0] == doctest::Approx(zeta).epsilon(1e-12));
        for (std::size_t m = 1; m < 6; ++m) {
            zeta = 1.0 - std::clamp(std::pow(r, 30) - std::pow(s * (1.0 + 0.1 * zeta), 30), 0.0, 1.0);
            CHECK(tr.zeta_upper[m] == doctest::Approx(zeta).epsilon(1e-10));
        }
        const double qt = q_tilde(OffspringDistribution::deterministic(30), p);
        CHECK(tr.sigma_upper[0] == 1.0);
        CHECK(tr.sigma_upper[2] == doctest::Approx(std::min(1.0, qt * qt)));
        for (double x : tr.long_loop_lower) CHECK((x >= 0.0 && x <= 1.0));
    }

    TEST_CASE("long loops in the Poisson regime")
    {
        // a = 4 > theta = 2, beta = a / mu, mu large.
        const auto dist = OffspringDistribution::poisson(400.0);
        const ModelParams p{2.0, 4.0 / 400.0, 0.5};
        const auto eps = find_epsilon(dist, p);
        REQUIRE(eps);
        CHECK((*eps > 0.0 && *eps <= 0.5));
        const auto report = check_theorem2(dist, p, *eps);
        CHECK(report.part1.value_or(false));
        CHECK(zeta_recursion_lower(dist, p, *eps, 50).invariant_maintained);

        CHECK_FALSE(find_epsilon(dist, ModelParams{2.0, 0.0, 0.5}));
        CHECK(check_theorem2(dist, ModelParams{2.0, 0.0, 0.5}, std::nullopt).part2);
    }

    TEST_CASE("part 1 is a conjunction")
    {
        // Large beta: no empty root edges, yet the difference term is negative.
        const auto dist = OffspringDistribution::poisson(5.0);
        const auto r = check_theorem2(dist, ModelParams{2.0, 5.0, 0.5}, 0.1);
        CHECK(r.part1_first.value());
        CHECK_FALSE(r.part1_second.value());
        CHECK_FALSE(r.part1.value());
        REQUIRE(r.difference);
        CHECK(std::isfinite(*r.difference));
    }

    TEST_CASE("induction holds wherever part 1 holds")
    {
        int passing = 0;
        for (double mu : {50.0, 100.0, 200.0, 400.0, 800.0})
            for (double a : {2.5, 3.0, 4.0, 5.0, 6.0}) {
                const auto dist = OffspringDistribution::poisson(mu);
                const ModelParams p{2.0, a / mu, 0.5};
                for (double eps : {0.02, 0.1}) {
                    const auto r = check_theorem2(dist, p, eps);
                    if (!r.part1.value()) continue;
                    ++passing;
                    CHECK(zeta_recursion_lower(dist, p, eps, 50).invariant_maintained);
                }
            }
        CHECK(passing > 0);
    }

    TEST_CASE("critical beta")
    {
        const auto dist = OffspringDistribution::poisson(10.0);
        const double bstar = critical_beta_subcritical(dist, 2.0);
        CHECK(std::abs(q_tilde(dist, ModelParams{2.0, bstar, 0.5}) - 1.0) <= 1e-9);
        CHECK(q_tilde(dist, ModelParams{2.0, bstar / 2.0, 0.5}) < 1.0);
        CHECK(q_tilde(dist, ModelParams{2.0, 2.0 * bstar, 0.5}) > 1.0);

        // Dense scan with the independent closed form: coarse grid, then a fine grid inside the bracket.
        double lo = 0.0;
        for (double b = 1e-4;; b += 1e-4)
            if (poisson_q_tilde(10.0, 2.0, b) >= 1.0) {
                lo = b - 1e-4;
                break;
            }
        double oracle = lo;
        for (double b = lo; b <= lo + 1e-4; b += 1e-7)
            if (poisson_q_tilde(10.0, 2.0, b) >= 1.0) {
                oracle = b;
                break;
            }
        CHECK(std::abs(bstar - oracle) <= 1e-6);

        // Point mass d = 100: the crossing sits near theta / d.
        const auto det = OffspringDistribution::deterministic(100);
        CHECK(q_tilde(det, ModelParams{2.0, 0.9 * 2.0 / 100.0, 0.5}) < 1.0);
        CHECK(q_tilde(det, ModelParams{2.0, 1.1 * 2.0 / 100.0, 0.5}) > 1.0);
        const double b100 = critical_beta_subcritical(det, 2.0);
        CHECK((b100 > 0.9 * 0.02 && b100 < 1.1 * 0.02));
    }

    TEST_CASE("c_d approaches q / theta")
    {
        std::vector<double> values;
        for (std::uint64_t d : {10u, 100u, 1000u, 10000u}) {
            const double c = c_d(1.0, 2.0, d);
            values.push_back(c);
            CHECK(q_tilde(OffspringDistribution::deterministic(d), ModelParams{2.0, 1.0 / static_cast<double>(d), 0.5}) <=
                  c);
        }
        for (std::size_t i = 1; i < values.size(); ++i)
            CHECK(std::abs(values[i] - 0.5) < std::abs(values[i - 1] - 0.5));
        CHECK(std::abs(values.back() - 0.5) <= 0.01);
        CHECK(c_d(1.0, 2.0, 20) >= 0.5223);
    }

    TEST_CASE("d0 search")
    {
        const auto half = corollary3_d0(1.0, 2.0);
        const auto near = corollary3_d0(1.8, 2.0);
        CHECK(half.d0 < near.d0);
        for (const auto& r : {half, near}) {
            CHECK(r.c_d0 < 1.0);
            CHECK(r.dominated);
            CHECK(r.q_tilde_at_d0 <= r.c_d0);
        }
        for (std::uint64_t d = half.d0; d <= 4 * half.d0; ++d) CHECK(c_d(1.0, 2.0, d) < 1.0);
        if (half.d0 > 1) CHECK(c_d(1.0, 2.0, half.d0 - 1) >= 1.0);
        const auto report =
            check_theorem2(OffspringDistribution::deterministic(half.d0),
                           ModelParams{2.0, 1.0 / static_cast<double>(half.d0), 0.5}, std::nullopt);
        CHECK(report.part2);
        CHECK_THROWS_AS(corollary3_d0(2.5, 2.0), std::invalid_argument);
    }

    TEST_CASE("lambda0 search")
    {
        const auto base = OffspringDistribution::deterministic(1);
        const auto r = corollary3_lambda0(base, 3.0, 4.0, 1.0, 1.0, 2.0);
        CHECK(r.lambda0 >= 1);
        CHECK(r.prob_b == 1.0);
        CHECK(r.verified);
        CHECK(r.beta_grid.size() == 5);
        for (std::size_t i = 0; i < r.reports.size(); ++i) {
            const auto& rep = r.reports[i];
            CHECK(rep.part1.value());
            const double beta = rep.beta;
            CHECK(beta >= 3.0 / static_cast<double>(r.lambda0) * (1.0 - 1e-12));
            CHECK(beta <= 4.0 / static_cast<double>(r.lambda0) * (1.0 + 1e-12));
        }

        std::uint64_t prev = 0;
        for (double c2 : {1.0, 1.5, 2.0, 3.0}) {
            const auto rc = corollary3_lambda0(base, 3.0, 4.0, 1.0, c2, 2.0);
            CHECK(rc.lambda0 >= prev);
            prev = rc.lambda0;
        }
        CHECK_THROWS_AS(corollary3_lambda0(base, 1.5, 4.0, 1.0, 1.0, 2.0), std::invalid_argument);

        const auto pois = OffspringDistribution::poisson(4.0);
        const double c1 = best_c1(pois, 1.5);
        CHECK((c1 > 0.0 && c1 <= 1.5));
        const auto rp = corollary3_lambda0(pois, 3.0, 4.0, c1, 1.5, 2.0);
        CHECK(rp.verified);
    }

    TEST_CASE("report serialises to JSON")
    {
        const auto dist = OffspringDistribution::poisson(400.0);
        auto report = check_theorem2(dist, ModelParams{2.0, 0.01, 0.5}, 0.05);
        report.zeta_m = zeta_recursion_lower(dist, ModelParams{2.0, 0.01, 0.5}, 0.05, 4).zeta_upper;
        const auto j = nlohmann::json::parse(report.to_json());
        CHECK(j.at("q_tilde").get<double>() == report.q_tilde);
        CHECK(j.at("epsilon").get<double>() == 0.05);
        CHECK(j.at("part2").get<bool>() == report.part2);
        CHECK(j.at("part1").get<bool>() == report.part1.value());
        CHECK(j.at("zeta_m").size() == 4);
        CHECK(j.at("distribution").get<std::string>() == "poisson(400)");
    }
}
