#include <doctest.h>

#include <cmath>

#include "dtunnel/model.hpp"
#include "support/random.hpp"

using namespace dtunnel;
using doctest::Approx;

TEST_CASE("thermal coefficients at T = 0 and finite temperature")
{
    auto d = thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 1.0);
    CHECK(d.D_pp == 0.25);
    CHECK(d.D_qq == 0.25);
    CHECK(d.D_pq == 0.0);

    d = thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 2.0);
    CHECK(d.D_pp == 0.5);
    CHECK(d.D_qq == 0.5);

    d = thermal_coefficients(1.0, 1.0, 1.0, 0.5, 1.0, 1.0);
    CHECK(d.D_pp == 0.75);
    CHECK(d.D_qq == 0.25);
    CHECK(d.D_pq == 0.0);
}

TEST_CASE("thermal coefficients reject lambda <= mu and theta < 1")
{
    CHECK_THROWS_AS(thermal_coefficients(1.0, 1.0, 0.5, 0.5, 1.0, 1.0), InvalidParameters);
    CHECK_THROWS_AS(thermal_coefficients(1.0, 1.0, 0.4, 0.5, 1.0, 1.0), InvalidParameters);
    CHECK_THROWS_AS(thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 0.99), InvalidParameters);
    CHECK_THROWS_AS(thermal_coefficients(0.0, 1.0, 0.5, 0.0, 1.0, 1.0), InvalidParameters);
}

TEST_CASE("positivity constraint report")
{
    ModelParamsd p;
    p.lambda = 0.5;
    auto d = thermal_coefficients(1.0, 1.0, 0.5, 0.0, 1.0, 1.0);
    p.D_pp = d.D_pp;
    p.D_qq = d.D_qq;
    auto report = check_positivity_constraint(p);
    CHECK(report.satisfied);
    CHECK(report.margin == 0.0);

    p.lambda = 1.0;
    p.mu = 0.5;
    d = thermal_coefficients(1.0, 1.0, 1.0, 0.5, 1.0, 1.0);
    p.D_pp = d.D_pp;
    p.D_qq = d.D_qq;
    report = check_positivity_constraint(p);
    CHECK_FALSE(report.satisfied);
    CHECK(report.margin == Approx(-0.0625).epsilon(1e-15));

    ModelParamsd q;
    q.lambda = 1.0;
    q.D_pp = 1.0;
    q.D_qq = 1.0;
    report = check_positivity_constraint(q);
    CHECK(report.satisfied);
    CHECK(report.margin == 0.75);
}

TEST_CASE("Gibbs coefficients satisfy the constraint iff (lambda^2 - mu^2) theta^2 >= lambda^2")
{
    testing::Rng rng(7);
    int passes = 0, fails = 0;
    for (int k = 0; k < 2000; ++k) {
        const double m = rng.uniform(0.3, 3), w = rng.uniform(0.3, 3), hbar = rng.uniform(0.5, 2);
        const double mu = rng.uniform(0, 2);
        const double lambda = mu + rng.uniform(1e-3, 2);
        const double theta = rng.uniform(1, 5);
        const auto d = thermal_coefficients(m, w, lambda, mu, hbar, theta);
        CHECK(d.D_pp > 0);
        CHECK(d.D_qq > 0);
        CHECK(d.D_pq == 0);
        ModelParamsd p{m, w, lambda, mu, hbar, d.D_qq, d.D_pp, d.D_pq};
        const bool expected = (lambda * lambda - mu * mu) * theta * theta >= lambda * lambda;
        CHECK(check_positivity_constraint(p).satisfied == expected);
        (expected ? passes : fails)++;
    }
    // both branches must actually be exercised
    CHECK(passes > 100);
    CHECK(fails > 100);
}

TEST_CASE("dimensionless to dimensional for the reference packet")
{
    const DimensionlessConfigd cfg{-3, -0.5, 0.5, 0.5, 0, 1};
    const auto res = dimensionless_to_dimensional(cfg);
    CHECK(res.initial.sigma_qq == Approx(2.0).epsilon(1e-15));
    CHECK(res.initial.sigma_pp == Approx(0.125).epsilon(1e-15));
    CHECK(res.initial.sigma_pq == 0.0);
    CHECK(res.initial.sigma_q == Approx(-3 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(res.initial.sigma_p == Approx(1.5 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(res.params.lambda == 0.5);
    CHECK(res.params.mu == 0.0);
    CHECK(res.params.D_pp == 0.25);
    CHECK(res.params.D_qq == 0.25);
    CHECK(res.constraint.satisfied);

    const DimensionlessConfigd origin{0, 0.7, 0.5, 1, 0, 1};
    const auto at_top = dimensionless_to_dimensional(origin);
    CHECK(at_top.initial.sigma_q == 0.0);
    CHECK(at_top.initial.sigma_p == 0.0);
    CHECK(at_top.initial.sigma_qq == 0.5);
}

TEST_CASE("dimensionless config validation")
{
    DimensionlessConfigd cfg{-3, -0.5, 1.2, 0.5, 0, 1};
    CHECK_THROWS_AS(dimensionless_to_dimensional(cfg), RegimeViolation);
    cfg.eps = 0.5;
    cfg.r = 0;
    CHECK_THROWS_AS(dimensionless_to_dimensional(cfg), InvalidParameters);
    cfg.r = 0.5;
    cfg.gamma = 1.0;
    cfg.eps = 1.0; // equals gamma: outside (gamma, sqrt(2))
    CHECK_THROWS_AS(check_window(cfg), RegimeViolation);
    cfg.eps = std::sqrt(2.0);
    CHECK_THROWS_AS(check_window(cfg), RegimeViolation);
    cfg.eps = 1.2;
    CHECK_NOTHROW(check_window(cfg));
    // the window edges are strict with a 1e-9 relative margin
    cfg.eps = std::sqrt(2.0) * (1 - 5e-10);
    CHECK_THROWS_AS(check_window(cfg), RegimeViolation);
    cfg.eps = std::sqrt(2.0) * (1 - 2e-9);
    CHECK_NOTHROW(check_window(cfg));

    try {
        check_window(DimensionlessConfigd{-3, -0.5, 1.2, 0.5, 0, 1});
        FAIL("expected RegimeViolation");
    } catch (const RegimeViolation& e) {
        CHECK(std::string(e.what()).find("0 < eps < 1") != std::string::npos);
    }
}

TEST_CASE("dimensional round trip and minimum uncertainty")
{
    testing::Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        DimensionlessConfigd cfg;
        cfg.gamma = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.01, 5);
        const auto [lo, hi] = admissible_eps_window(cfg.gamma);
        cfg.eps = rng.uniform(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
        cfg.z = rng.uniform(-10, 10);
        cfg.v = rng.uniform(-3, 3);
        cfg.r = rng.uniform(0.05, 3);
        cfg.theta = rng.uniform(1, 10);
        const Units<double> units{rng.uniform(0.2, 5), rng.uniform(0.2, 5), rng.uniform(0.2, 5)};
        const auto res = dimensionless_to_dimensional(cfg, units);
        const double hbar = units.hbar;
        CHECK(res.initial.sigma_qq * res.initial.sigma_pp == Approx(hbar * hbar / 4).epsilon(1e-14));

        const auto back = dimensional_to_dimensionless(res.params, res.initial);
        CHECK(back.z == Approx(cfg.z).epsilon(1e-12));
        CHECK(back.v == Approx(cfg.v).epsilon(1e-12));
        CHECK(back.eps == Approx(cfg.eps).epsilon(1e-12));
        CHECK(back.r == Approx(cfg.r).epsilon(1e-12));
        CHECK(back.gamma == Approx(cfg.gamma).epsilon(1e-12));
        CHECK(back.theta == Approx(cfg.theta).epsilon(1e-12));
    }
}

TEST_CASE("dimensional to dimensionless rejects non-thermal coefficients")
{
    const auto res = dimensionless_to_dimensional(DimensionlessConfigd{-3, -0.5, 0.5, 0.5, 0, 1});
    auto p = res.params;
    p.D_qq *= 1.5;
    CHECK_THROWS_AS(dimensional_to_dimensionless(p, res.initial), InvalidParameters);
    auto s = res.initial;
    s.sigma_q = 0;
    CHECK_THROWS_AS(dimensional_to_dimensionless(res.params, s), InvalidParameters);
}

TEST_CASE("temperature helpers")
{
    CHECK(theta_from_temperature(1.0, 0.0) == 1.0);
    CHECK(theta_from_temperature(1.0, 1.0) == Approx(1.0 / std::tanh(0.5)).epsilon(1e-15));
    CHECK(temperature_from_theta(1.0, theta_from_temperature(1.0, 0.7)) == Approx(0.7).epsilon(1e-12));
    CHECK(temperature_from_theta(1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(temperature_from_theta(1.0, 0.5), InvalidParameters);
}
