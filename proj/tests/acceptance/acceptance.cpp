// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "dtunnel/fokker_planck.hpp"
#include "dtunnel/moment_ode.hpp"
#include "dtunnel/tunneling.hpp"
#include "support/erf_oracle.hpp"
#include "support/random.hpp"

using namespace dtunnel;

namespace {

struct Verdict {
    bool pass{false};
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const DimensionlessConfigd kReference{-3, -0.5, 0.5, 0.5, 0, 1};

DimensionlessConfigd random_admissible(testing::Rng& rng, double edge)
{
    DimensionlessConfigd c;
    c.gamma = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.01, 4);
    const auto [lo, hi] = admissible_eps_window(c.gamma);
    c.eps = rng.uniform(lo + edge * (hi - lo), hi - edge * (hi - lo));
    c.theta = rng.uniform(1, 8);
    return c;
}

Verdict analytic_vs_ode()
{
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    double worst = 0;
    int failed = 0;
    for (int k = 0; k < 200; ++k) {
        const auto c = cli::random_case(rng, k % 2 == 1);
        const auto grid = uniform_time_grid(10 / c.params.omega, 100);
        try {
            const double dev = compare_with_analytic<double>(c.params, c.initial, grid).max();
            worst = std::max(worst, dev);
            failed += !(dev < 1e-8);
        } catch (const Error&) {
            ++failed;
            worst = std::numeric_limits<double>::infinity();
        }
    }
    const double elapsed = seconds_since(start);
    return {failed == 0 && elapsed < 30,
            fmt::format("200 configs, max relative deviation {:.2e} (< 1e-8), {:.2f} s (< 30 s)", worst, elapsed)};
}

Verdict fokker_planck_oracle()
{
    const auto start = Clock::now();
    const auto res = dimensionless_to_dimensional(kReference);
    const double t = 1 / res.params.omega;
    const auto domain = auto_domain(res.params, res.initial, t);
    const auto exact = propagate(res.params, res.initial, t);
    std::vector<double> errors;
    for (const Eigen::Index n : {128, 256, 512}) {
        const auto g = fokker_planck_evolve(res.params, sample_wigner(res.initial, domain, n, n), t);
        const auto dev = moment_deviation(grid_moments(g), exact);
        errors.push_back(*std::max_element(dev.begin(), dev.end()));
    }
    const double order_lo = std::log2(errors[0] / errors[1]);
    const double order_hi = std::log2(errors[1] / errors[2]);
    const double elapsed = seconds_since(start);
    const bool pass = errors[2] < 1e-3 && std::min(order_lo, order_hi) >= 1.8 && elapsed < 120;
    return {pass, fmt::format("errors {:.2e} / {:.2e} / {:.2e} at 128/256/512 (< 1e-3), orders {:.2f}, {:.2f} "
                              "(>= 1.8), {:.1f} s (< 120 s)",
                              errors[0], errors[1], errors[2], order_lo, order_hi, elapsed)};
}

Verdict asymptotic_ratio()
{
    std::mt19937_64 rng(3);
    IntegratorConfig cfg;
    cfg.scaled = true;
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
        const auto c = cli::random_case(rng, false);
        const auto a = asymptotics(c.params, c.initial);
        const double t = 25 / (a.nu - c.params.lambda);
        const std::vector<double> grid{0.0, t};
        const auto s = integrate_moments<double>(c.params, kBarrier, c.initial, grid, cfg).back();
        const double ratio = s.sigma_q / std::sqrt(s.sigma_qq);
        const double dev = std::abs(ratio - a.delta / std::sqrt(a.Delta));
        worst = std::isnan(dev) ? std::numeric_limits<double>::infinity() : std::max(worst, dev);
    }
    return {worst < 1e-6,
            fmt::format("50 configs with lambda < nu at t = 25/(nu - lambda), max |ratio - delta/sqrt(Delta)| {:.2e} "
                        "(< 1e-6)",
                        worst)};
}

Verdict stuck_regime()
{
    std::mt19937_64 rng(4);
    double worst = 0;
    bool regimes = true;
    for (int k = 0; k < 20; ++k) {
        const auto c = cli::random_case(rng, true);
        const double t = 30 / (c.params.lambda - c.params.nu());
        const auto P = tunneling_probability_at(c.params, c.initial, t);
        worst = std::max(worst, std::abs(P.value - 0.5));
        regimes = regimes && P.regime == Regime::Stuck &&
                  asymptotic_penetrability(c.params, c.initial).value == 0.5;
    }
    return {worst < 1e-6 && regimes,
            fmt::format("20 configs with lambda > nu at t = 30/(lambda - nu), max |P(t) - 1/2| {:.2e} (< 1e-6)", worst)};
}

Verdict energy_equivalence()
{
    testing::Rng rng(5);
    double worst = 0;
    for (int k = 0; k < 500; ++k) {
        auto c = random_admissible(rng, 1e-3);
        c.z = rng.uniform(-10, 10);
        c.v = rng.uniform(-4, 3);
        c.r = rng.uniform(0.1, 3);
        const Units<double> units{rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2)};
        const auto res = dimensionless_to_dimensional(c, units);
        const double scaled = initial_energy(c, units).E;
        const double dim = initial_energy(res.params, res.initial).E;
        // the terms being summed are of this size; cancellation is measured against it
        const double scale = units.hbar * units.omega *
                             ((1 + c.z * c.z * (1 + c.v * c.v + c.gamma)) / (c.r * c.r) + c.r * c.r);
        worst = std::max(worst, std::abs(scaled - dim) / scale);
    }
    const auto ref = initial_energy(kReference);
    const bool pass = worst < 1e-12 && ref.E == -7.6875 && ref.sub_barrier;
    return {pass, fmt::format("500 configs, max scaled difference {:.2e} (< 1e-12); reference E = {} hbar omega, {}",
                              worst, ref.E, ref.sub_barrier ? "sub-barrier" : "above the barrier")};
}

Verdict monotonicity()
{
    testing::Rng rng(6);
    const double slack = 1e-12;
    int comparisons = 0, violations = 0;
    const auto P = [](const DimensionlessConfigd& c) { return penetrability_dimensionless(c).value; };
    const auto walk = [&](DimensionlessConfigd c, double DimensionlessConfigd::*field, double lo, double hi,
                          bool increasing) {
        double prev = increasing ? -1 : 2;
        for (int i = 0; i < 20; ++i) {
            c.*field = lo + (hi - lo) * i / 19.0;
            const double cur = P(c);
            if (increasing ? cur < prev - slack : cur > prev + slack)
                ++violations;
            prev = cur;
            ++comparisons;
        }
    };
    for (int k = 0; k < 60;) {
        auto base = random_admissible(rng, 0.01);
        base.z = rng.uniform(-10, -0.5);
        base.v = rng.uniform(-0.99, 0);
        base.r = rng.uniform(0.05, 1);
        if (initial_energy(base).classical_pass || !initial_energy(base).sub_barrier)
            continue;
        ++k;
        const auto [lo, hi] = admissible_eps_window(base.gamma);
        walk(base, &DimensionlessConfigd::eps, lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo), true);
        walk(base, &DimensionlessConfigd::theta, 1, 10, true);
        walk(base, &DimensionlessConfigd::r, 0.05, 1, true);
        walk(base, &DimensionlessConfigd::z, -0.5, -10, false);
        walk(base, &DimensionlessConfigd::v, 0, -0.99, true);
        // gamma from 0 at fixed eps = 0.9 stays inside (gamma, sqrt(1 + gamma^2)) up to 0.85
        auto g = base;
        g.eps = 0.9;
        walk(g, &DimensionlessConfigd::gamma, 0, 0.85, false);
    }
    return {comparisons >= 1000 && violations == 0,
            fmt::format("{} comparisons over eps, theta, r, |v|, |z| and gamma, {} violations beyond 1e-12", comparisons,
                        violations)};
}

Verdict bound_structure()
{
    testing::Rng rng(7);
    int sub = 0, pass = 0, bad = 0;
    while (sub < 500 || pass < 500) {
        auto c = random_admissible(rng, 0.01);
        c.z = rng.uniform(-10, -0.1);
        c.v = rng.uniform(-6, 0.5);
        c.r = rng.uniform(0.1, 1.5);
        const auto e = initial_energy(c);
        const double P = penetrability_dimensionless(c).value;
        if (e.sub_barrier && !e.classical_pass && sub < 500) {
            bad += !(P < 0.5);
            ++sub;
        } else if (e.classical_pass && pass < 500) {
            bad += !(P > 0.5);
            ++pass;
        }
    }
    return {bad == 0, fmt::format("{} sub-barrier (P < 1/2) and {} classical-pass (P > 1/2) configs, {} violations",
                                  sub, pass, bad)};
}

Verdict uncertainty_and_constraint()
{
    testing::Rng rng(8);
    int trajectories = 0, below = 0;
    double worst_ratio = std::numeric_limits<double>::infinity();
    while (trajectories < 100) {
        ModelParamsd p;
        p.m = rng.uniform(0.5, 2);
        p.omega = rng.uniform(0.5, 2);
        p.hbar = rng.uniform(0.5, 2);
        p.mu = rng.uniform(0, 1) * p.omega;
        p.lambda = rng.uniform(0.05, 2.5) * p.nu();
        if (std::abs(p.lambda - p.nu()) < 0.02 * p.nu() || p.lambda <= p.mu)
            continue;
        const double theta_min = p.lambda / std::sqrt(p.lambda * p.lambda - p.mu * p.mu);
        const auto d = thermal_coefficients(p.m, p.omega, p.lambda, p.mu, p.hbar, theta_min * rng.uniform(1, 3));
        p.D_qq = d.D_qq;
        p.D_pp = d.D_pp;
        p.D_pq = d.D_pq;
        if (!check_positivity_constraint(p).satisfied)
            continue;
        ++trajectories;
        const double sqq = rng.uniform(0.1, 3);
        const GaussianStated s0{0, rng.uniform(-5, 5), rng.uniform(-3, 3), sqq, p.hbar * p.hbar / (4 * sqq), 0};
        const double bound = p.hbar * p.hbar / 4;
        for (int i = 0; i <= 100; ++i) {
            const double det = propagate(p, s0, 10 / p.omega * i / 100.0).determinant();
            worst_ratio = std::min(worst_ratio, det / bound);
            below += !(det >= bound * (1 - 1e-9));
        }
    }
    ModelParamsd gibbs;
    gibbs.lambda = 1;
    gibbs.mu = 0.5;
    const auto d = thermal_coefficients(1.0, 1.0, 1.0, 0.5, 1.0, 1.0);
    gibbs.D_qq = d.D_qq;
    gibbs.D_pp = d.D_pp;
    gibbs.D_pq = d.D_pq;
    const auto report = check_positivity_constraint(gibbs);
    const bool pass = below == 0 && !report.satisfied && std::abs(report.margin + 0.0625) < 1e-15;
    return {pass, fmt::format("{} trajectories, min det/(hbar^2/4) {:.12f}, {} samples below; T = 0 Gibbs margin "
                              "(lambda 1, mu 0.5) {} {}",
                              trajectories, worst_ratio, below, report.margin,
                              report.satisfied ? "satisfied" : "violated")};
}

Verdict spot_value()
{
    const double rad = radicand_without_mu(kReference);
    const auto P = penetrability_dimensionless(kReference);
    const double ratio = ratio_without_mu(kReference);
    const long double oracle = 0.5L * (1 - testing::erf_oracle(-static_cast<long double>(ratio) / std::sqrt(2.0L)));
    const double diff = std::abs(static_cast<double>(P.value - oracle));
    const bool pass = rad == 1.5625 && ratio == -1.2 && diff < 1e-15 && std::abs(P.value - 0.1151) < 5e-5;
    return {pass, fmt::format("radicand {}, ratio {}, P {:.16f}, |P - erf oracle| {:.1e}", rad, ratio, P.value, diff)};
}

Verdict determinism()
{
    std::ostringstream out1, err1, out2, err2;
    const int c1 = cli::run({"validate", "--seed", "42"}, out1, err1);
    const int c2 = cli::run({"validate", "--seed", "42"}, out2, err2);
    const bool same = out1.str() == out2.str();
    return {c1 == 0 && c2 == 0 && same && !out1.str().empty(),
            fmt::format("validate --seed 42 twice: exit {} and {}, {} byte reports, {}", c1, c2, out1.str().size(),
                        same ? "identical" : "different")};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"analytic vs moment ODE", analytic_vs_ode},
        {"Fokker-Planck oracle", fokker_planck_oracle},
        {"asymptotic ratio", asymptotic_ratio},
        {"stuck regime", stuck_regime},
        {"energy equivalence", energy_equivalence},
        {"monotonicity", monotonicity},
        {"bound structure", bound_structure},
        {"uncertainty and constraint", uncertainty_and_constraint},
        {"spot value", spot_value},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%s: %zu of %zu criteria passed\n", failures == 0 ? "PASS" : "FAIL", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
