#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dtunnel/moment_ode.hpp"
#include "support/random.hpp"

using namespace dtunnel;
using doctest::Approx;

namespace {

ModelParamsd thermal(double lambda, double mu, double theta)
{
    ModelParamsd p;
    p.lambda = lambda;
    p.mu = mu;
    const auto d = thermal_coefficients(p.m, p.omega, lambda, mu, p.hbar, theta);
    p.D_qq = d.D_qq;
    p.D_pp = d.D_pp;
    return p;
}

// Stationary covariance of the well, from the linear system for the three
// stationary moment equations solved by Cramer's rule.
Matrix2<double> well_stationary(const ModelParamsd& p)
{
    const double a = p.lambda - p.mu, b = p.lambda + p.mu, k = -p.m * p.omega * p.omega, m = p.m;
    Eigen::Matrix3d M;
    M << -2 * a, 0, 2 / m, 0, -2 * b, 2 * k, k, 1 / m, -2 * p.lambda;
    const Eigen::Vector3d rhs(-2 * p.D_qq, -2 * p.D_pp, -2 * p.D_pq);
    const Eigen::Vector3d x = M.fullPivLu().solve(rhs);
    Matrix2<double> s;
    s << x(0), x(2), x(2), x(1);
    return s;
}

} // namespace

TEST_CASE("undamped well oscillates")
{
    ModelParamsd p;
    const GaussianStated s0{0, 1, 0, 0.5, 0.5, 0};
    const std::vector<double> grid{0.0, std::numbers::pi};
    const auto out = integrate_moments<double>(p, kWell, s0, grid);
    CHECK(std::abs(out.back().sigma_q - -1.0) < 1e-10);
    CHECK(std::abs(out.back().sigma_qq - 0.5) < 1e-10);
    CHECK(out.back().t == Approx(std::numbers::pi));
}

TEST_CASE("barrier mean matches the cosh solution")
{
    ModelParamsd p;
    const GaussianStated s0{0, -3, 0, 1, 1, 0};
    const std::vector<double> grid{0.0, 1.0};
    const auto out = integrate_moments<double>(p, kBarrier, s0, grid);
    CHECK(std::abs(out.back().sigma_q - -4.6292419044457313354) < 1e-9);
}

TEST_CASE("relaxation to the stationary covariance for lambda > nu")
{
    const auto p = thermal(2.0, 0.0, 1.0);
    const GaussianStated s0{0, -3, 1, 2, 0.125, 0};
    const std::vector<double> grid{0.0, 30.0};
    const auto out = integrate_moments<double>(p, kBarrier, s0, grid);
    // mu = 0, m = omega = 1: s_qq(inf) = (D_pp + D_qq (2 lambda^2 - omega^2)) / (2 lambda (lambda^2 - omega^2))
    const double l = p.lambda, w2 = p.omega * p.omega;
    const double expected = (p.D_pp + p.D_qq * (2 * l * l - w2)) / (2 * l * (l * l - w2));
    CHECK(std::abs(out.back().sigma_qq - expected) < 1e-6);
    CHECK(out.back().sigma_qq == Approx(stationary_covariance(p)(0, 0)).epsilon(1e-6));
}

TEST_CASE("compare_with_analytic edge cases")
{
    const auto p = thermal(0.5, 0.1, 1.5);
    const GaussianStated s0{0, -2, 1, 1.2, 0.4, 0.1};
    const std::vector<double> only_zero{0.0};
    const auto r0 = compare_with_analytic<double>(p, s0, only_zero);
    CHECK(r0.max() == 0.0);

    ModelParamsd free;
    const GaussianStated f0{0, -1, 0.5, 0.7, 0.6, 0.05};
    const auto grid = uniform_time_grid(2.0, 20);
    CHECK(compare_with_analytic<double>(free, f0, grid).max() < 1e-10);

    ModelParamsd singular;
    singular.lambda = 1.0;
    singular.D_pp = 1.0;
    CHECK_THROWS_AS(compare_with_analytic<double>(singular, f0, grid), SingularParameters);
}

TEST_CASE("time grid validation")
{
    ModelParamsd p;
    const GaussianStated s0{0, -1, 0, 1, 1, 0};
    const std::vector<double> bad_start{0.5, 1.0};
    CHECK_THROWS_AS(integrate_moments<double>(p, kBarrier, s0, bad_start), InvalidParameters);
    const std::vector<double> not_increasing{0.0, 1.0, 1.0};
    CHECK_THROWS(integrate_moments<double>(p, kBarrier, s0, not_increasing));
    IntegratorConfig cfg;
    cfg.rtol = 0;
    const std::vector<double> ok{0.0, 1.0};
    CHECK_THROWS_AS(integrate_moments<double>(p, kBarrier, s0, ok, cfg), InvalidParameters);
}

TEST_CASE("linearity in the first moments")
{
    testing::Rng rng(41);
    const auto grid = uniform_time_grid(4.0, 8);
    for (int k = 0; k < 20; ++k) {
        const auto p = thermal(rng.uniform(0.1, 1.5), rng.uniform(0, 0.09), rng.uniform(1, 3));
        const GaussianStated a{0, rng.uniform(-3, 3), rng.uniform(-3, 3), 1, 0.25, 0};
        const GaussianStated b{0, rng.uniform(-3, 3), rng.uniform(-3, 3), 1, 0.25, 0};
        const double alpha = rng.uniform(-2, 2);
        GaussianStated scaled = a;
        scaled.sigma_q *= alpha;
        scaled.sigma_p *= alpha;
        GaussianStated sum = a;
        sum.sigma_q += b.sigma_q;
        sum.sigma_p += b.sigma_p;
        const auto ya = integrate_moments<double>(p, kBarrier, a, grid);
        const auto yb = integrate_moments<double>(p, kBarrier, b, grid);
        const auto ys = integrate_moments<double>(p, kBarrier, scaled, grid);
        const auto yab = integrate_moments<double>(p, kBarrier, sum, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double scale = 1 + std::abs(ya[i].sigma_q) + std::abs(yb[i].sigma_q);
            CHECK(std::abs(ys[i].sigma_q - alpha * ya[i].sigma_q) < 1e-9 * scale * (1 + std::abs(alpha)));
            CHECK(std::abs(yab[i].sigma_q - ya[i].sigma_q - yb[i].sigma_q) < 1e-9 * scale);
            CHECK(std::abs(yab[i].sigma_p - ya[i].sigma_p - yb[i].sigma_p) < 1e-9 * scale);
            CHECK(ys[i].sigma_qq == Approx(ya[i].sigma_qq).epsilon(1e-9));
        }
    }
}

TEST_CASE("RK4 converges at fourth order")
{
    const auto p = thermal(0.5, 0.2, 2.0);
    const GaussianStated s0{0, -2, 1, 1.2, 0.4, 0.1};
    const std::vector<double> grid{0.0, 2.0};
    const auto exact = propagate(p, s0, 2.0);
    auto error_at = [&](double dt) {
        IntegratorConfig cfg;
        cfg.method = IntegratorMethod::RK4Fixed;
        cfg.dt = dt;
        const auto out = integrate_moments<double>(p, kBarrier, s0, grid, cfg).back();
        const auto dev = moment_deviation(out, exact);
        return *std::max_element(dev.begin(), dev.end());
    };
    const double e1 = error_at(0.1), e2 = error_at(0.05), e3 = error_at(0.025);
    const double order1 = std::log2(e1 / e2), order2 = std::log2(e2 / e3);
    MESSAGE("RK4 observed orders " << order1 << ", " << order2);
    CHECK(order1 >= 3.8);
    CHECK(order2 >= 3.8);
}

TEST_CASE("well covariances converge to finite stationary values")
{
    testing::Rng rng(43);
    for (int k = 0; k < 20; ++k) {
        ModelParamsd p{rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.3, 1.5), 0, 1.0,
                       rng.uniform(0.1, 1), rng.uniform(0.1, 1), 0};
        p.mu = rng.uniform(0, 0.9) * p.lambda;
        const GaussianStated s0{0, rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0, 0.25, 0};
        const double t_end = 40 / (p.lambda - p.mu);
        const std::vector<double> grid{0.0, t_end};
        const auto out = integrate_moments<double>(p, kWell, s0, grid).back();
        const auto expected = well_stationary(p);
        CHECK(out.sigma_qq == Approx(expected(0, 0)).epsilon(1e-6));
        CHECK(out.sigma_pp == Approx(expected(1, 1)).epsilon(1e-6));
        CHECK(std::abs(out.sigma_pq - expected(0, 1)) < 1e-6 * std::sqrt(expected(0, 0) * expected(1, 1)));
        // the library's Lyapunov solution for the well agrees
        const auto lib = stationary_covariance(p, kWell);
        CHECK(lib(0, 0) == Approx(expected(0, 0)).epsilon(1e-12));
        CHECK(lib(1, 1) == Approx(expected(1, 1)).epsilon(1e-12));
        CHECK(std::abs(out.sigma_q) < 1e-6);
    }
}

TEST_CASE("co-moving integration keeps the ratio finite at large times")
{
    const auto p = thermal(0.3, 0.1, 2.0);
    const GaussianStated s0{0, -2, 0.5, 0.8, 0.4, 0.05};
    const auto a = asymptotics(p, s0);
    const double t = 25 / comoving_rate(p);
    IntegratorConfig cfg;
    cfg.scaled = true;
    const std::vector<double> grid{0.0, t};
    const auto out = integrate_moments<double>(p, kBarrier, s0, grid, cfg).back();
    CHECK(std::isfinite(out.sigma_q));
    CHECK(std::abs(out.sigma_q / std::sqrt(out.sigma_qq) - a.delta / std::sqrt(a.Delta)) < 1e-6);

    CHECK_THROWS_AS(integrate_moments<double>(p, kWell, s0, grid, cfg), InvalidParameters);
}

TEST_CASE("divergent moments are reported, not returned")
{
    ModelParamsd p;
    const GaussianStated s0{0, -1, 0, 1, 1, 0};
    const std::vector<double> grid{0.0, 800.0};
    CHECK_THROWS_AS(integrate_moments<double>(p, kBarrier, s0, grid), NonFiniteState);
}

TEST_CASE("long double instantiation")
{
    ModelParams<long double> p;
    p.lambda = 0.5L;
    p.D_qq = p.D_pp = 0.25L;
    const GaussianState<long double> s0{0, -3, 1, 2, 0.125L, 0};
    const std::vector<long double> grid{0.0L, 1.0L};
    IntegratorConfig cfg;
    cfg.rtol = 1e-13;
    cfg.atol = 1e-15;
    const auto out = integrate_moments<long double>(p, kBarrier, s0, grid, cfg).back();
    const auto exact = propagate(p, s0, 1.0L);
    CHECK(std::abs(static_cast<double>(out.sigma_q - exact.sigma_q)) < 1e-11);
}
