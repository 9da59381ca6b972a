#ifndef DTUNNEL_PROPAGATOR_HPP
#define DTUNNEL_PROPAGATOR_HPP

#include <cmath>
#include <string_view>
#include <utility>

#include "dtunnel/errors.hpp"
#include "dtunnel/gaussian_state.hpp"
#include "dtunnel/model.hpp"
#include "dtunnel/potential.hpp"

// Closed-form evolution of a Gaussian state on the inverted parabola
// U(q) = -m omega^2 q^2 / 2.
//
// The moment equations are linear: d<x>/dt = A <x> and
// dS/dt = A S + S A^T + 2D with
//
//     A = [ -(lambda - mu)    1/m             ]
//         [  m omega^2       -(lambda + mu)   ]
//
// whose eigenvalues are -lambda +/- nu, nu = sqrt(omega^2 + mu^2). Hence
//
//     exp(A t) = e^{-lambda t} [ cosh(nu t) I + sinh(nu t)/nu (A + lambda I) ]
//     S(t)     = exp(A t) (S(0) - S_inf) exp(A t)^T + S_inf
//
// where S_inf solves the Lyapunov equation A S + S A^T + 2D = 0. Expanding the
// (q,q) entry gives the familiar cosh/sinh(2 nu t) form of <q^2>; the (p,p) and
// (p,q) entries follow from the same product. See docs/closed_forms.md.

namespace dtunnel {

/// Relative tolerance for lambda^2 = omega^2 + mu^2 and lambda = nu.
inline constexpr double kSingularTolerance = 1e-9;

namespace detail {

/// (e^{-lambda t} cosh(nu t), e^{-lambda t} sinh(nu t)) without overflow for large nu t.
template <typename Scalar>
std::pair<Scalar, Scalar> damped_cosh_sinh(Scalar lambda, Scalar nu, Scalar t)
{
    using std::cosh;
    using std::exp;
    using std::sinh;
    const Scalar x = nu * t;
    if (x < Scalar(20)) {
        const Scalar damp = exp(-lambda * t);
        return {damp * cosh(x), damp * sinh(x)};
    }
    const Scalar grow = exp((nu - lambda) * t);
    const Scalar decay = exp(-(nu + lambda) * t);
    return {(grow + decay) / 2, (grow - decay) / 2};
}

} // namespace detail

/// exp(A t) for the barrier drift matrix.
template <typename Scalar>
Matrix2<Scalar> transfer_matrix(const ModelParams<Scalar>& p, Scalar t)
{
    const Scalar nu = p.nu();
    const auto [c, s] = detail::damped_cosh_sinh(p.lambda, nu, t);
    Matrix2<Scalar> phi;
    phi << c + p.mu / nu * s, s / (p.m * nu), p.m * p.omega * p.omega / nu * s, c - p.mu / nu * s;
    return phi;
}

/// (<q>(t), <p>(t)).
template <typename Scalar>
Vector2<Scalar> propagate_mean(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0, Scalar t)
{
    return transfer_matrix(p, t) * s0.mean();
}

/// Stationary covariance, the solution of A S + S A^T + 2D = 0, for either
/// curvature. For the barrier this is an attractor only when lambda > nu;
/// otherwise it is the formal offset used by propagate_covariance.
///
/// Throws SingularParameters when lambda^2 - mu^2 -/+ omega^2 or lambda vanish.
template <typename Scalar>
Matrix2<Scalar> stationary_covariance(const ModelParams<Scalar>& p, QuadraticPotential potential = kBarrier)
{
    using std::abs;
    const Scalar l = p.lambda, mu = p.mu, m = p.m;
    const Scalar w2 = potential.restoring_sign<Scalar>() * p.omega * p.omega;
    const Scalar den = l * l - mu * mu - w2;
    const Scalar w_sq = p.omega * p.omega;
    if (abs(den) < Scalar(kSingularTolerance) * w_sq)
        throw SingularParameters("stationary covariance: lambda^2 - omega^2 - mu^2 vanishes");
    if (abs(l) < Scalar(kSingularTolerance) * p.omega)
        throw SingularParameters("stationary covariance: lambda vanishes");

    const Scalar qq =
        (m * m * (2 * l * (l + mu) - w2) * p.D_qq + p.D_pp + 2 * m * (l + mu) * p.D_pq) / (2 * m * m * l * den);
    const Scalar pp =
        (m * m * w2 * w2 * p.D_qq + (2 * l * (l - mu) - w2) * p.D_pp + 2 * m * w2 * (l - mu) * p.D_pq) / (2 * l * den);
    const Scalar pq =
        ((l + mu) * m * m * w2 * p.D_qq + (l - mu) * p.D_pp + 2 * m * (l * l - mu * mu) * p.D_pq) / (2 * m * l * den);
    Matrix2<Scalar> s;
    s << qq, pq, pq, pp;
    return s;
}

/// Offset used by the closed form. Without diffusion S_inf = 0 solves the
/// Lyapunov equation for every lambda, including the dissipation-free limit.
template <typename Scalar>
Matrix2<Scalar> covariance_offset(const ModelParams<Scalar>& p)
{
    if (!p.has_diffusion())
        return Matrix2<Scalar>::Zero();
    return stationary_covariance(p);
}

/// Covariance matrix [[s_qq, s_pq], [s_pq, s_pp]] at time t.
template <typename Scalar>
Matrix2<Scalar> propagate_covariance(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0, Scalar t)
{
    if (t == 0)
        return s0.covariance();
    const Matrix2<Scalar> inf = covariance_offset(p);
    const Matrix2<Scalar> phi = transfer_matrix(p, t);
    const Matrix2<Scalar> offset = s0.covariance() - inf;
    Matrix2<Scalar> cov = phi * offset * phi.transpose() + inf;
    cov(1, 0) = cov(0, 1);
    return cov;
}

template <typename Scalar>
GaussianState<Scalar> propagate(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0, Scalar t)
{
    if (t == 0)
        return s0;
    const Matrix2<Scalar> inf = covariance_offset(p);
    const Matrix2<Scalar> phi = transfer_matrix(p, t);
    const Matrix2<Scalar> cov = phi * (s0.covariance() - inf) * phi.transpose() + inf;
    return GaussianState<Scalar>::from_moments(s0.t + t, phi * s0.mean(), cov);
}

enum class Regime { Crossing, Reflected, Separatrix, Stuck };

inline std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::Crossing:
        return "crossing";
    case Regime::Reflected:
        return "reflected";
    case Regime::Separatrix:
        return "separatrix";
    case Regime::Stuck:
        return "stuck";
    }
    return "unknown";
}

template <typename Scalar>
struct AsymptoticSummary {
    Scalar nu{0};
    /// m (mu + nu) <q>(0) + <p>(0)
    Scalar delta{0};
    /// m^2 (mu+nu)^2 D_qq' + D_pp' + 2 m (mu+nu) D_pq', with D_ab' = s_ab(0) - s_ab(inf)
    Scalar Delta{0};
    Matrix2<Scalar> stationary{Matrix2<Scalar>::Zero()};
    Regime regime{Regime::Stuck};
};

/// delta, Delta and the long-time regime of the packet.
///
/// Stuck when lambda > nu; otherwise the sign of delta decides whether the
/// centre ends up beyond the barrier top (Crossing), on its starting side
/// (Reflected) or on the top (Separatrix).
template <typename Scalar>
AsymptoticSummary<Scalar> asymptotics(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0)
{
    using std::abs;
    AsymptoticSummary<Scalar> out;
    out.nu = p.nu();
    if (abs(p.lambda - out.nu) < Scalar(kSingularTolerance) * p.omega)
        throw AmbiguousRegime("asymptotics: lambda = nu, the regime is undefined");
    out.stationary = covariance_offset(p);

    const Scalar k = p.m * (p.mu + out.nu);
    out.delta = k * s0.sigma_q + s0.sigma_p;
    const Matrix2<Scalar> d = s0.covariance() - out.stationary;
    out.Delta = k * k * d(0, 0) + d(1, 1) + 2 * k * d(0, 1);

    if (p.lambda > out.nu) {
        out.regime = Regime::Stuck;
    } else {
        const Scalar scale = abs(k * s0.sigma_q) + abs(s0.sigma_p);
        if (abs(out.delta) <= Scalar(1e-12) * scale)
            out.regime = Regime::Separatrix;
        else
            out.regime = out.delta > 0 ? Regime::Crossing : Regime::Reflected;
    }
    return out;
}

} // namespace dtunnel

#endif // DTUNNEL_PROPAGATOR_HPP
