#ifndef DTUNNEL_PHASE_SPACE_HPP
#define DTUNNEL_PHASE_SPACE_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "dtunnel/errors.hpp"
#include "dtunnel/gaussian_state.hpp"

namespace dtunnel {

/// Gaussian Wigner function of a state, with its determinant cached.
template <typename Scalar>
struct WignerGaussian {
    GaussianState<Scalar> state;
    Scalar det_sigma{1};

    explicit WignerGaussian(const GaussianState<Scalar>& s) : state(s), det_sigma(s.determinant())
    {
        if (!(det_sigma > 0) || !(s.sigma_qq > 0))
            throw InvalidParameters("wigner: covariance must be positive definite");
    }

    Scalar operator()(Scalar q, Scalar p) const
    {
        using std::exp;
        using std::sqrt;
        const Scalar dq = q - state.sigma_q;
        const Scalar dp = p - state.sigma_p;
        const Scalar quad = state.sigma_pp * dq * dq + state.sigma_qq * dp * dp - 2 * state.sigma_pq * dq * dp;
        return exp(-quad / (2 * det_sigma)) / (2 * std::numbers::pi_v<Scalar> * sqrt(det_sigma));
    }
};

/// W(q, p) = exp{-[s_pp dq^2 + s_qq dp^2 - 2 s_pq dq dp] / 2 sigma} / (2 pi sqrt(sigma)),
/// dq = q - <q>, dp = p - <p>, sigma = s_qq s_pp - s_pq^2.
template <typename Scalar>
Scalar wigner_eval(const GaussianState<Scalar>& state, Scalar q, Scalar p)
{
    return WignerGaussian<Scalar>(state)(q, p);
}

/// Normal density N(<q>, s_qq) at q.
template <typename Scalar>
Scalar position_density(const GaussianState<Scalar>& state, Scalar q)
{
    using std::exp;
    using std::sqrt;
    if (!(state.sigma_qq > 0))
        throw InvalidParameters("position_density: sigma_qq must be > 0");
    const Scalar d = q - state.sigma_q;
    return exp(-d * d / (2 * state.sigma_qq)) / sqrt(2 * std::numbers::pi_v<Scalar> * state.sigma_qq);
}

/// <q|rho|q'> obtained as the Fourier transform in p of W((q+q')/2, p).
///
/// Normalised so that the diagonal is position_density and integrates to 1:
///   (2 pi s_qq)^{-1/2} exp[ -(Q - <q>)^2 / 2 s_qq - (s_pp - s_pq^2/s_qq) y^2 / 2 hbar^2
///                           + i s_pq (Q - <q>) y / (hbar s_qq) + i <p> y / hbar ]
/// with Q = (q + q')/2 and y = q - q'.
template <typename Scalar>
std::complex<Scalar> density_matrix_eval(const GaussianState<Scalar>& state, Scalar q, Scalar q_prime, Scalar hbar)
{
    using std::exp;
    using std::sqrt;
    if (!(state.sigma_qq > 0))
        throw InvalidParameters("density_matrix_eval: sigma_qq must be > 0");
    const Scalar centre = (q + q_prime) / 2 - state.sigma_q;
    const Scalar y = q - q_prime;
    const Scalar conditional = state.sigma_pp - state.sigma_pq * state.sigma_pq / state.sigma_qq;
    const Scalar re = -centre * centre / (2 * state.sigma_qq) - conditional * y * y / (2 * hbar * hbar);
    const Scalar im = state.sigma_pq * centre * y / (hbar * state.sigma_qq) + state.sigma_p * y / hbar;
    const Scalar norm = 1 / sqrt(2 * std::numbers::pi_v<Scalar> * state.sigma_qq);
    return norm * std::exp(std::complex<Scalar>(re, im));
}

} // namespace dtunnel

#endif // DTUNNEL_PHASE_SPACE_HPP
