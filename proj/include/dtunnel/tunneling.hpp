#ifndef DTUNNEL_TUNNELING_HPP
#define DTUNNEL_TUNNELING_HPP

#include <cmath>
#include <optional>

#include "dtunnel/errors.hpp"
#include "dtunnel/gaussian_state.hpp"
#include "dtunnel/model.hpp"
#include "dtunnel/propagator.hpp"

namespace dtunnel {

/// (1 - erf(x)) / 2, evaluated as erfc(x)/2 so that tiny right-tail
/// probabilities keep full relative precision.
template <typename Scalar>
Scalar tail_probability(Scalar x)
{
    using std::erfc;
    return erfc(x) / 2;
}

template <typename Scalar>
struct PenetrabilityResult {
    /// Probability of finding the particle beyond the barrier top, in [0, 1].
    Scalar value{0.5};
    /// Argument x of value = (1 - erf(x))/2: -<q>/sqrt(2 s_qq), or -delta/sqrt(2 Delta).
    Scalar argument{0};
    std::optional<Regime> regime;
    /// value - P(0), the part that tunnels after t = 0. Only set on request.
    std::optional<Scalar> net_adjusted;
};

/// P(t) = (1 - erf(-<q>(t)/sqrt(2 s_qq(t))))/2 with moments from the closed form.
/// The regime is attached when it is defined (lambda != nu).
template <typename Scalar>
PenetrabilityResult<Scalar> tunneling_probability_at(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0,
                                                     Scalar t, bool net_adjust = false)
{
    using std::sqrt;
    const GaussianState<Scalar> st = propagate(p, s0, t);
    PenetrabilityResult<Scalar> out;
    out.argument = -st.sigma_q / sqrt(2 * st.sigma_qq);
    out.value = tail_probability(out.argument);
    try {
        out.regime = asymptotics(p, s0).regime;
    } catch (const AmbiguousRegime&) {
    }
    if (net_adjust)
        out.net_adjusted = out.value - tail_probability(-s0.sigma_q / sqrt(2 * s0.sigma_qq));
    return out;
}

/// Long-time limit of P(t): (1 - erf(-delta/sqrt(2 Delta)))/2 when lambda < nu,
/// exactly 1/2 when lambda > nu.
///
/// Throws AmbiguousRegime at lambda = nu and NegativeDelta when Delta <= 0.
template <typename Scalar>
PenetrabilityResult<Scalar> asymptotic_penetrability(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0)
{
    using std::sqrt;
    const AsymptoticSummary<Scalar> a = asymptotics(p, s0);
    PenetrabilityResult<Scalar> out;
    out.regime = a.regime;
    if (a.regime == Regime::Stuck) {
        out.value = Scalar(0.5);
        out.argument = Scalar(0);
        return out;
    }
    if (!(a.Delta > 0))
        throw NegativeDelta("asymptotic penetrability: Delta <= 0 for this coefficient set");
    out.argument = -a.delta / sqrt(2 * a.Delta);
    out.value = tail_probability(out.argument);
    return out;
}

/// gamma + sqrt(1 + gamma^2) = (mu + nu)/omega
template <typename Scalar>
Scalar crossing_speed(Scalar gamma)
{
    using std::sqrt;
    return gamma + sqrt(1 + gamma * gamma);
}

/// Radicand of Delta_0 for mu = 0 in units of hbar m omega / 2r^2:
/// 1 + r^4 - 2 eps/(eps - 1) r^2 theta.
template <typename Scalar>
Scalar radicand_without_mu(const DimensionlessConfig<Scalar>& c)
{
    const Scalar r2 = c.r * c.r;
    return 1 + r2 * r2 - 2 * c.eps / (c.eps - 1) * r2 * c.theta;
}

/// Radicand for mu != 0, with g = gamma + sqrt(1 + gamma^2):
/// g^2 + r^4 - 2 g [(eps^2 - gamma^2) sqrt(1+gamma^2) + eps]/(eps^2 - gamma^2 - 1) r^2 theta.
template <typename Scalar>
Scalar radicand_with_mu(const DimensionlessConfig<Scalar>& c)
{
    using std::sqrt;
    const Scalar s = sqrt(1 + c.gamma * c.gamma);
    const Scalar g = c.gamma + s;
    const Scalar e2 = c.eps * c.eps - c.gamma * c.gamma;
    const Scalar r2 = c.r * c.r;
    return g * g + r2 * r2 - 2 * g * (e2 * s + c.eps) / (e2 - 1) * r2 * c.theta;
}

/// delta_0 / sqrt(Delta_0) = z(1 + v)/sqrt(1 + r^4 - 2 eps/(eps-1) r^2 theta).
template <typename Scalar>
Scalar ratio_without_mu(const DimensionlessConfig<Scalar>& c)
{
    using std::sqrt;
    const Scalar rad = radicand_without_mu(c);
    if (!(rad > 0))
        throw NegativeDelta("penetrability: Delta_0 <= 0 for this configuration");
    return c.z * (1 + c.v) / sqrt(rad);
}

/// delta / sqrt(Delta) = z(g + v)/sqrt(radicand_with_mu); reduces to
/// ratio_without_mu at gamma = 0.
template <typename Scalar>
Scalar ratio_with_mu(const DimensionlessConfig<Scalar>& c)
{
    using std::sqrt;
    const Scalar rad = radicand_with_mu(c);
    if (!(rad > 0))
        throw NegativeDelta("penetrability: Delta <= 0 for this configuration");
    return c.z * (crossing_speed(c.gamma) + c.v) / sqrt(rad);
}

/// Final penetrability of a minimum-uncertainty packet in a thermal bath, from
/// the scaled variables alone. Throws RegimeViolation outside the admissible
/// window unless `check_regime` is false; without the check, eps above
/// sqrt(1 + gamma^2) gives the stuck value 1/2 and equality AmbiguousRegime.
template <typename Scalar>
PenetrabilityResult<Scalar> penetrability_dimensionless(const DimensionlessConfig<Scalar>& cfg,
                                                        bool check_regime = true)
{
    using std::abs;
    using std::sqrt;
    if (check_regime)
        check_window(cfg);
    PenetrabilityResult<Scalar> out;
    // only reachable with check_regime off: lambda >= nu
    const Scalar nu = sqrt(1 + cfg.gamma * cfg.gamma);
    if (cfg.eps == nu)
        throw AmbiguousRegime("penetrability: lambda = nu, the regime is undefined");
    if (cfg.eps > nu) {
        out.regime = Regime::Stuck;
        return out;
    }
    const Scalar ratio = cfg.gamma == 0 ? ratio_without_mu(cfg) : ratio_with_mu(cfg);
    out.argument = -ratio / sqrt(Scalar(2));
    out.value = tail_probability(out.argument);
    const Scalar g = crossing_speed(cfg.gamma);
    const Scalar scale = abs(g * cfg.z) + abs(cfg.v * cfg.z);
    if (abs(cfg.z * (g + cfg.v)) <= Scalar(1e-12) * scale)
        out.regime = Regime::Separatrix;
    else
        out.regime = ratio > 0 ? Regime::Crossing : Regime::Reflected;
    return out;
}

template <typename Scalar>
struct EnergyReport {
    Scalar E{0};
    bool sub_barrier{false};
    /// The classical centre crosses the barrier top (lambda < nu).
    bool classical_pass{false};
};

/// Initial energy of a minimum-uncertainty packet from the scaled variables:
/// E = (hbar omega / 4r^2)[r^4 - 1 + z^2(v^2 - 1)] + (hbar mu/2) z^2 v / r^2.
/// The centre crosses the top iff v < -(gamma + sqrt(1 + gamma^2)).
template <typename Scalar>
EnergyReport<Scalar> initial_energy(const DimensionlessConfig<Scalar>& c, const Units<Scalar>& units = {})
{
    const Scalar hw = units.hbar * units.omega;
    const Scalar mu = c.gamma * units.omega;
    const Scalar r2 = c.r * c.r;
    const Scalar z2 = c.z * c.z;
    EnergyReport<Scalar> out;
    out.E = hw / (4 * r2) * (r2 * r2 - 1 + z2 * (c.v * c.v - 1)) + units.hbar * mu / 2 * z2 * c.v / r2;
    out.sub_barrier = out.E < 0;
    out.classical_pass = c.z != 0 && c.v < -crossing_speed(c.gamma);
    return out;
}

/// Initial energy <H> at t = 0 from dimensional moments:
/// s_pp/2m - m omega^2 s_qq/2 + <p>^2/2m - m omega^2 <q>^2/2 + mu <p><q>.
/// The centre crosses the top iff <q>(0) delta < 0.
template <typename Scalar>
EnergyReport<Scalar> initial_energy(const ModelParams<Scalar>& p, const GaussianState<Scalar>& s0)
{
    const Scalar k = p.m * p.omega * p.omega;
    EnergyReport<Scalar> out;
    out.E = s0.sigma_pp / (2 * p.m) - k / 2 * s0.sigma_qq + s0.sigma_p * s0.sigma_p / (2 * p.m) -
            k / 2 * s0.sigma_q * s0.sigma_q + p.mu * s0.sigma_p * s0.sigma_q;
    out.sub_barrier = out.E < 0;
    const Scalar delta = p.m * (p.mu + p.nu()) * s0.sigma_q + s0.sigma_p;
    out.classical_pass = s0.sigma_q * delta < 0;
    return out;
}

} // namespace dtunnel

#endif // DTUNNEL_TUNNELING_HPP
