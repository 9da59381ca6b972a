#ifndef DTUNNEL_GAUSSIAN_STATE_HPP
#define DTUNNEL_GAUSSIAN_STATE_HPP

#include <Eigen/Dense>

namespace dtunnel {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// First and second moments of a Gaussian state at time t.
///
/// sigma_q, sigma_p are expectation values; sigma_qq, sigma_pp are variances
/// and sigma_pq is the symmetrised covariance 1/2<qp+pq> - <q><p>.
template <typename Scalar>
struct GaussianState {
    Scalar t{0};
    Scalar sigma_q{0};
    Scalar sigma_p{0};
    Scalar sigma_qq{1};
    Scalar sigma_pp{1};
    Scalar sigma_pq{0};

    Vector2<Scalar> mean() const { return {sigma_q, sigma_p}; }

    Matrix2<Scalar> covariance() const
    {
        Matrix2<Scalar> c;
        c << sigma_qq, sigma_pq, sigma_pq, sigma_pp;
        return c;
    }

    /// sigma_qq * sigma_pp - sigma_pq^2
    Scalar determinant() const { return sigma_qq * sigma_pp - sigma_pq * sigma_pq; }

    bool is_valid() const { return sigma_qq > 0 && sigma_pp > 0 && determinant() > 0; }

    static GaussianState from_moments(Scalar t, const Vector2<Scalar>& mean, const Matrix2<Scalar>& cov)
    {
        return {t, mean(0), mean(1), cov(0, 0), cov(1, 1), Scalar(0.5) * (cov(0, 1) + cov(1, 0))};
    }

    /// Packed as (sigma_q, sigma_p, sigma_qq, sigma_pp, sigma_pq).
    Eigen::Matrix<Scalar, 5, 1> packed() const
    {
        Eigen::Matrix<Scalar, 5, 1> y;
        y << sigma_q, sigma_p, sigma_qq, sigma_pp, sigma_pq;
        return y;
    }

    static GaussianState from_packed(Scalar t, const Eigen::Matrix<Scalar, 5, 1>& y)
    {
        return {t, y(0), y(1), y(2), y(3), y(4)};
    }

    template <typename Other>
    GaussianState<Other> cast() const
    {
        return {Other(t), Other(sigma_q), Other(sigma_p), Other(sigma_qq), Other(sigma_pp), Other(sigma_pq)};
    }
};

using GaussianStated = GaussianState<double>;

} // namespace dtunnel

#endif // DTUNNEL_GAUSSIAN_STATE_HPP
