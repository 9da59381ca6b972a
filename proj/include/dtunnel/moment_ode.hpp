#ifndef DTUNNEL_MOMENT_ODE_HPP
#define DTUNNEL_MOMENT_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dtunnel/gaussian_state.hpp"
#include "dtunnel/integrators.hpp"
#include "dtunnel/model.hpp"
#include "dtunnel/potential.hpp"
#include "dtunnel/propagator.hpp"

namespace dtunnel {

template <typename Scalar>
using MomentVector = Eigen::Matrix<Scalar, 5, 1>;

/// Right-hand side of the moment equations for U(q) = -/+ (m omega^2/2) q^2,
/// acting on (sigma_q, sigma_p, sigma_qq, sigma_pp, sigma_pq). The hierarchy
/// closes exactly because U is quadratic.
///
/// With `growth` != 0 the moments are integrated in the co-moving variables
/// x = e^{-growth t} sigma for the means and e^{-2 growth t} sigma for the
/// covariances; the diffusion source then carries a factor e^{-2 growth t}.
template <typename Scalar>
struct MomentEquations {
    ModelParams<Scalar> params;
    QuadraticPotential potential{kBarrier};
    Scalar growth{0};

    MomentVector<Scalar> operator()(Scalar t, const MomentVector<Scalar>& y) const
    {
        using std::exp;
        const auto& p = params;
        const Scalar k = potential.restoring_sign<Scalar>() * p.m * p.omega * p.omega;
        const Scalar a = p.lambda - p.mu;
        const Scalar b = p.lambda + p.mu;
        const Scalar source = growth == 0 ? Scalar(1) : exp(-2 * growth * t);
        MomentVector<Scalar> dy;
        dy(0) = -a * y(0) + y(1) / p.m - growth * y(0);
        dy(1) = k * y(0) - b * y(1) - growth * y(1);
        dy(2) = -2 * a * y(2) + 2 * y(4) / p.m + 2 * p.D_qq * source - 2 * growth * y(2);
        dy(3) = -2 * b * y(3) + 2 * k * y(4) + 2 * p.D_pp * source - 2 * growth * y(3);
        dy(4) = k * y(2) + y(3) / p.m - 2 * p.lambda * y(4) + 2 * p.D_pq * source - 2 * growth * y(4);
        return dy;
    }
};

/// Exponent nu - lambda of the co-moving scaling used when config.scaled is set.
template <typename Scalar>
Scalar comoving_rate(const ModelParams<Scalar>& p)
{
    return p.nu() - p.lambda;
}

/// Integrates the moment equations and samples them at `t_grid` (strictly
/// increasing, starting at 0; times are relative to state0.t).
///
/// With config.scaled the returned states hold the co-moving moments
/// e^{-(nu-lambda)t} sigma_q, ... and e^{-2(nu-lambda)t} sigma_qq, ...; ratios
/// such as sigma_q / sqrt(sigma_qq) are unaffected. Only the barrier supports it.
template <typename Scalar>
std::vector<GaussianState<Scalar>> integrate_moments(const ModelParams<Scalar>& params,
                                                     QuadraticPotential potential, const GaussianState<Scalar>& state0,
                                                     std::span<const Scalar> t_grid,
                                                     const IntegratorConfig& config = {})
{
    config.validate();
    if (t_grid.empty() || t_grid.front() != 0)
        throw InvalidParameters("integrate_moments: the time grid must start at 0");
    MomentEquations<Scalar> rhs{params, potential, Scalar(0)};
    if (config.scaled) {
        if (potential.curvature != Curvature::Barrier)
            throw InvalidParameters("integrate_moments: co-moving scaling is defined for the barrier only");
        rhs.growth = comoving_rate(params);
    }

    std::vector<MomentVector<Scalar>> ys;
    if (config.method == IntegratorMethod::RK4Fixed)
        ys = integrate_rk4<Scalar, 5>(rhs, state0.packed(), t_grid, Scalar(config.dt));
    else
        ys = integrate_dopri5<Scalar, 5>(rhs, state0.packed(), t_grid, Scalar(config.rtol), Scalar(config.atol),
                                         config.max_steps);

    std::vector<GaussianState<Scalar>> out;
    out.reserve(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i)
        out.push_back(GaussianState<Scalar>::from_packed(state0.t + t_grid[i], ys[i]));
    return out;
}

/// Deviation of `value` from `reference` per moment, each relative to the
/// natural scale of that moment at that time:
///   <q>: max(|<q>|, sqrt(s_qq)),  <p>: max(|<p>|, sqrt(s_pp)),
///   s_qq, s_pp: themselves,       s_pq: sqrt(s_qq s_pp).
/// This is the plain relative error away from zero crossings of the means and
/// of s_pq.
template <typename Scalar>
std::array<Scalar, 5> moment_deviation(const GaussianState<Scalar>& value, const GaussianState<Scalar>& reference)
{
    using std::abs;
    using std::max;
    using std::sqrt;
    const auto& r = reference;
    const Scalar sq = sqrt(abs(r.sigma_qq));
    const Scalar sp = sqrt(abs(r.sigma_pp));
    return {abs(value.sigma_q - r.sigma_q) / max(abs(r.sigma_q), sq),
            abs(value.sigma_p - r.sigma_p) / max(abs(r.sigma_p), sp),
            abs(value.sigma_qq - r.sigma_qq) / abs(r.sigma_qq),
            abs(value.sigma_pp - r.sigma_pp) / abs(r.sigma_pp),
            abs(value.sigma_pq - r.sigma_pq) / (sq * sp)};
}

struct ErrorReport {
    /// Largest moment_deviation per component (q, p, qq, pp, pq).
    std::array<double, 5> max_error{};
    double worst_time{0};

    double max() const { return *std::max_element(max_error.begin(), max_error.end()); }
};

/// Integrates the barrier moments and compares them with the closed forms on
/// `t_grid`. Propagates SingularParameters from the closed form.
template <typename Scalar>
ErrorReport compare_with_analytic(const ModelParams<Scalar>& params, const GaussianState<Scalar>& state0,
                                  std::span<const Scalar> t_grid, const IntegratorConfig& config = {})
{
    IntegratorConfig plain = config;
    plain.scaled = false;
    // evaluate the closed form first so singular parameters surface before integrating
    std::vector<GaussianState<Scalar>> exact;
    exact.reserve(t_grid.size());
    for (const Scalar t : t_grid)
        exact.push_back(propagate(params, state0, t));
    const auto numeric = integrate_moments(params, kBarrier, state0, t_grid, plain);

    ErrorReport report;
    double worst = -1;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const auto dev = moment_deviation(numeric[i], exact[i]);
        for (std::size_t k = 0; k < 5; ++k) {
            const double d = static_cast<double>(dev[k]);
            report.max_error[k] = std::max(report.max_error[k], d);
            if (d > worst) {
                worst = d;
                report.worst_time = static_cast<double>(t_grid[i]);
            }
        }
    }
    return report;
}

/// n+1 equally spaced times on [0, t_max].
template <typename Scalar>
std::vector<Scalar> uniform_time_grid(Scalar t_max, std::size_t n)
{
    std::vector<Scalar> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        grid[i] = t_max * Scalar(i) / Scalar(n);
    return grid;
}

} // namespace dtunnel

#endif // DTUNNEL_MOMENT_ODE_HPP
