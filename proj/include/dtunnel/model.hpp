#ifndef DTUNNEL_MODEL_HPP
#define DTUNNEL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "dtunnel/errors.hpp"
#include "dtunnel/gaussian_state.hpp"

namespace dtunnel {

/// Physical constants and Lindblad environment coefficients.
///
/// The Hamiltonian is H = p^2/2m + U(q) + (mu/2)(qp + pq); lambda is the
/// dissipation constant and D_qq, D_pp, D_pq the diffusion coefficients.
template <typename Scalar>
struct ModelParams {
    Scalar m{1};
    Scalar omega{1};
    Scalar lambda{0};
    Scalar mu{0};
    Scalar hbar{1};
    Scalar D_qq{0};
    Scalar D_pp{0};
    Scalar D_pq{0};

    Scalar nu() const
    {
        using std::sqrt;
        return sqrt(omega * omega + mu * mu);
    }

    bool has_diffusion() const { return D_qq != 0 || D_pp != 0 || D_pq != 0; }

    template <typename Other>
    ModelParams<Other> cast() const
    {
        return {Other(m), Other(omega), Other(lambda), Other(mu), Other(hbar), Other(D_qq), Other(D_pp), Other(D_pq)};
    }
};

using ModelParamsd = ModelParams<double>;

/// Unit system (m, omega, hbar). The default is m = omega = hbar = 1.
template <typename Scalar>
struct Units {
    Scalar m{1};
    Scalar omega{1};
    Scalar hbar{1};
};

template <typename Scalar>
struct DiffusionCoefficients {
    Scalar D_pp{0};
    Scalar D_qq{0};
    Scalar D_pq{0};
};

/// Thermal bath, stored as theta = coth(hbar omega / 2kT); theta = 1 is T = 0.
template <typename Scalar>
struct BathSpec {
    Scalar theta{1};
};

/// Scaled parameters: z = <q>/sqrt(s_qq), v = <p>/(m omega <q>), eps = lambda/omega,
/// r = sqrt(hbar/2m omega)/sqrt(s_qq), gamma = mu/omega, theta = coth(hbar omega/2kT).
template <typename Scalar>
struct DimensionlessConfig {
    Scalar z{-3};
    Scalar v{-0.5};
    Scalar eps{0.5};
    Scalar r{0.5};
    Scalar gamma{0};
    Scalar theta{1};
};

using DimensionlessConfigd = DimensionlessConfig<double>;

template <typename Scalar>
struct ConstraintReport {
    bool satisfied{false};
    /// D_pp D_qq - D_pq^2 - lambda^2 hbar^2 / 4
    Scalar margin{0};
};

/// A dimensional model resolved from a scaled configuration, with the
/// complete-positivity check carried alongside.
template <typename Scalar>
struct ResolvedModel {
    ModelParams<Scalar> params;
    GaussianState<Scalar> initial;
    ConstraintReport<Scalar> constraint;
};

/// Relative margin applied to the strict inequalities of the admissible window.
inline constexpr double kWindowMargin = 1e-9;

/// coth(hbar omega / 2kT); kT = 0 maps to 1.
template <typename Scalar>
Scalar theta_from_temperature(Scalar hbar_omega, Scalar kT)
{
    using std::tanh;
    if (hbar_omega <= 0 || kT < 0)
        throw InvalidParameters("theta_from_temperature: need hbar*omega > 0 and kT >= 0");
    if (kT == 0)
        return Scalar(1);
    return Scalar(1) / tanh(hbar_omega / (Scalar(2) * kT));
}

/// Inverse of theta_from_temperature; theta = 1 maps to kT = 0.
template <typename Scalar>
Scalar temperature_from_theta(Scalar hbar_omega, Scalar theta)
{
    using std::atanh;
    if (theta < 1)
        throw InvalidParameters("temperature_from_theta: theta must be >= 1");
    if (theta == 1)
        return Scalar(0);
    return hbar_omega / (Scalar(2) * atanh(Scalar(1) / theta));
}

/// Diffusion coefficients for which the asymptotic state is the Gibbs state
/// of the oscillator at temperature theta.
template <typename Scalar>
DiffusionCoefficients<Scalar> thermal_coefficients(Scalar m, Scalar omega, Scalar lambda, Scalar mu, Scalar hbar,
                                                   Scalar theta)
{
    if (!(m > 0) || !(omega > 0) || !(hbar > 0))
        throw InvalidParameters("thermal_coefficients: m, omega and hbar must be positive");
    if (!(mu >= 0))
        throw InvalidParameters("thermal_coefficients: mu must be >= 0");
    if (!(lambda > mu))
        throw InvalidParameters("thermal_coefficients: Gibbs-form coefficients need lambda > mu");
    if (!(theta >= 1))
        throw InvalidParameters("thermal_coefficients: theta = coth(hbar omega/2kT) must be >= 1");
    DiffusionCoefficients<Scalar> d;
    d.D_pp = (lambda + mu) / 2 * hbar * m * omega * theta;
    d.D_qq = (lambda - mu) / 2 * hbar / (m * omega) * theta;
    d.D_pq = Scalar(0);
    return d;
}

/// Evaluates D_pp D_qq - D_pq^2 >= lambda^2 hbar^2 / 4. Never throws.
template <typename Scalar>
ConstraintReport<Scalar> check_positivity_constraint(const ModelParams<Scalar>& p)
{
    using std::abs;
    using std::max;
    const Scalar product = p.D_pp * p.D_qq - p.D_pq * p.D_pq;
    const Scalar bound = p.lambda * p.lambda * p.hbar * p.hbar / 4;
    ConstraintReport<Scalar> report;
    report.margin = product - bound;
    // a few ulps of slack so the exact equality case is not lost to rounding
    const Scalar slack = Scalar(1e-14) * max(abs(p.D_pp * p.D_qq), bound);
    report.satisfied = p.D_pp > 0 && p.D_qq > 0 && report.margin >= -slack;
    return report;
}

/// Throws InvalidParameters unless m, omega, hbar, lambda, D_qq, D_pp > 0.
template <typename Scalar>
void check_invariants(const ModelParams<Scalar>& p)
{
    if (!(p.m > 0) || !(p.omega > 0) || !(p.hbar > 0))
        throw InvalidParameters("model parameters: m, omega and hbar must be positive");
    if (!(p.lambda > 0))
        throw InvalidParameters("model parameters: lambda must be positive");
    if (!(p.D_qq > 0) || !(p.D_pp > 0))
        throw InvalidParameters("model parameters: D_qq and D_pp must be positive");
}

/// Open interval of admissible eps for a given gamma: (0, 1) when gamma = 0,
/// (gamma, sqrt(1 + gamma^2)) otherwise.
template <typename Scalar>
std::pair<Scalar, Scalar> admissible_eps_window(Scalar gamma)
{
    using std::sqrt;
    if (gamma == 0)
        return {Scalar(0), Scalar(1)};
    return {gamma, sqrt(1 + gamma * gamma)};
}

/// Throws RegimeViolation if eps lies outside the admissible window (strict
/// inequalities with relative margin kWindowMargin), InvalidParameters for
/// r <= 0, gamma < 0 or theta < 1.
template <typename Scalar>
void check_window(const DimensionlessConfig<Scalar>& cfg)
{
    if (!(cfg.r > 0))
        throw InvalidParameters("dimensionless config: r must be > 0");
    if (!(cfg.gamma >= 0))
        throw InvalidParameters("dimensionless config: gamma must be >= 0");
    if (!(cfg.theta >= 1))
        throw InvalidParameters("dimensionless config: theta must be >= 1");
    const auto [lo, hi] = admissible_eps_window(cfg.gamma);
    const Scalar margin(kWindowMargin);
    const bool ok = (cfg.gamma == 0 ? cfg.eps > margin : cfg.eps > lo * (1 + margin)) && cfg.eps < hi * (1 - margin);
    if (!ok) {
        std::ostringstream os;
        os.precision(17);
        if (cfg.gamma == 0)
            os << "eps = " << cfg.eps << " outside the admissible window 0 < eps < 1 (gamma = 0)";
        else
            os << "eps = " << cfg.eps << " outside the admissible window gamma < eps < sqrt(1+gamma^2) = (" << lo
               << ", " << hi << ")";
        throw RegimeViolation(os.str());
    }
}

/// Maps a scaled configuration onto dimensional parameters and a
/// minimum-uncertainty initial state with thermal diffusion coefficients.
/// The window check is skipped when `check_regime` is false; Gibbs-form
/// coefficients still require eps > gamma.
template <typename Scalar>
ResolvedModel<Scalar> dimensionless_to_dimensional(const DimensionlessConfig<Scalar>& cfg,
                                                   const Units<Scalar>& units = {}, bool check_regime = true)
{
    using std::sqrt;
    if (!(units.m > 0) || !(units.omega > 0) || !(units.hbar > 0))
        throw InvalidParameters("units: m, omega and hbar must be positive");
    if (check_regime)
        check_window(cfg);
    else if (!(cfg.r > 0))
        throw InvalidParameters("dimensionless config: r must be > 0");

    const Scalar m = units.m, w = units.omega, hbar = units.hbar;
    ResolvedModel<Scalar> out;
    auto& s = out.initial;
    s.t = 0;
    s.sigma_qq = hbar / (2 * m * w) / (cfg.r * cfg.r);
    s.sigma_pp = hbar * hbar / (4 * s.sigma_qq);
    s.sigma_pq = 0;
    s.sigma_q = cfg.z * sqrt(s.sigma_qq);
    s.sigma_p = cfg.v * m * w * s.sigma_q;

    auto& p = out.params;
    p.m = m;
    p.omega = w;
    p.hbar = hbar;
    p.lambda = cfg.eps * w;
    p.mu = cfg.gamma * w;
    const auto d = thermal_coefficients(m, w, p.lambda, p.mu, hbar, cfg.theta);
    p.D_pp = d.D_pp;
    p.D_qq = d.D_qq;
    p.D_pq = d.D_pq;
    out.constraint = check_positivity_constraint(p);
    return out;
}

/// Inverse of dimensionless_to_dimensional. Requires thermal-form diffusion
/// coefficients (theta is recovered from D_pp and cross-checked against D_qq).
/// When <q> = 0 the scaled momentum is undefined; v = 0 is returned if <p> = 0
/// and InvalidParameters is thrown otherwise.
template <typename Scalar>
DimensionlessConfig<Scalar> dimensional_to_dimensionless(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0)
{
    using std::abs;
    using std::sqrt;
    if (!(s0.sigma_qq > 0))
        throw InvalidParameters("dimensional_to_dimensionless: sigma_qq must be > 0");
    if (!(p.lambda > p.mu))
        throw InvalidParameters("dimensional_to_dimensionless: thermal form needs lambda > mu");
    DimensionlessConfig<Scalar> cfg;
    cfg.z = s0.sigma_q / sqrt(s0.sigma_qq);
    if (s0.sigma_q == 0) {
        if (s0.sigma_p != 0)
            throw InvalidParameters("dimensional_to_dimensionless: v is undefined for <q> = 0, <p> != 0");
        cfg.v = 0;
    } else {
        cfg.v = s0.sigma_p / (p.m * p.omega * s0.sigma_q);
    }
    cfg.eps = p.lambda / p.omega;
    cfg.gamma = p.mu / p.omega;
    cfg.r = sqrt(p.hbar / (2 * p.m * p.omega)) / sqrt(s0.sigma_qq);
    cfg.theta = 2 * p.D_pp / ((p.lambda + p.mu) * p.hbar * p.m * p.omega);
    const Scalar theta_q = 2 * p.D_qq * p.m * p.omega / ((p.lambda - p.mu) * p.hbar);
    if (abs(theta_q - cfg.theta) > Scalar(1e-9) * cfg.theta || p.D_pq != 0)
        throw InvalidParameters("dimensional_to_dimensionless: diffusion coefficients are not of thermal form");
    return cfg;
}

} // namespace dtunnel

#endif // DTUNNEL_MODEL_HPP
