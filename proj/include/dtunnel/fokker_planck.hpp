#ifndef DTUNNEL_FOKKER_PLANCK_HPP
#define DTUNNEL_FOKKER_PLANCK_HPP

#include <Eigen/Dense>

#include "dtunnel/gaussian_state.hpp"
#include "dtunnel/model.hpp"

namespace dtunnel {

/// Cell-centred field on [q_min, q_max] x [p_min, p_max]; values(i, j) is the
/// density at (q(i), p(j)).
struct PhaseSpaceGrid {
    double q_min{-1};
    double q_max{1};
    double p_min{-1};
    double p_max{1};
    Eigen::ArrayXXd values;
    /// Requested time step; 0 selects the largest stable step.
    double dt{0};
    double time{0};
    /// Mass that left through the boundary so far (negative for net inflow).
    double leakage{0};

    Eigen::Index n_q() const { return values.rows(); }
    Eigen::Index n_p() const { return values.cols(); }
    double dq() const { return (q_max - q_min) / static_cast<double>(n_q()); }
    double dp() const { return (p_max - p_min) / static_cast<double>(n_p()); }
    double q(Eigen::Index i) const { return q_min + (static_cast<double>(i) + 0.5) * dq(); }
    double p(Eigen::Index j) const { return p_min + (static_cast<double>(j) + 0.5) * dp(); }
    double mass() const { return values.sum() * dq() * dp(); }

    static PhaseSpaceGrid zeros(double q_min, double q_max, double p_min, double p_max, Eigen::Index n_q,
                                Eigen::Index n_p);
};

struct PhaseSpaceDomain {
    double q_min{-1};
    double q_max{1};
    double p_min{-1};
    double p_max{1};
};

/// Linear Fokker-Planck generator
///   dW/dt = -div(A x W) + D_qq W_qq + D_pp W_pp + 2 D_pq W_qp,   x = (q, p).
struct FokkerPlanckGenerator {
    Eigen::Matrix2d drift{Eigen::Matrix2d::Zero()};
    double D_qq{0};
    double D_pp{0};
    double D_pq{0};

    /// Wigner-space generator of the barrier master equation: drift
    /// (p/m - (lambda - mu) q, m omega^2 q - (lambda + mu) p).
    static FokkerPlanckGenerator barrier(const ModelParamsd& params);
};

enum class BoundaryCondition { Outflow, DirichletZero };
enum class SlopeLimiter { VanLeer, MonotonizedCentral, Minmod, Unlimited };

struct FokkerPlanckOptions {
    BoundaryCondition boundary{BoundaryCondition::Outflow};
    SlopeLimiter limiter{SlopeLimiter::VanLeer};
    double cfl{0.4};
    /// NegativeDensity is raised when min < -negative_tolerance * max.
    double negative_tolerance{1e-12};
};

/// Bounding box of the mean trajectory over [0, t_final] widened by
/// n_sd * sqrt(largest variance on that interval), from the closed form.
PhaseSpaceDomain auto_domain(const ModelParamsd& params, const GaussianStated& state0, double t_final,
                             double n_sd = 8.0);

/// Point samples of the Gaussian Wigner function at the cell centres.
PhaseSpaceGrid sample_wigner(const GaussianStated& state, const PhaseSpaceDomain& domain, Eigen::Index n_q,
                             Eigen::Index n_p);

/// cfl * min(dq/|a_q|max, dp/|a_p|max, dq^2/2D_qq', dp^2/2D_pp'), where the
/// effective diffusions include the cross term: D_qq' = D_qq + |D_pq| dq/dp.
double max_stable_dt(const FokkerPlanckGenerator& gen, const PhaseSpaceGrid& grid, double cfl = 0.4);

/// Evolves grid0 to grid0.time + t_final with a second-order finite-volume
/// scheme: MUSCL upwind drift, centred diffusion, SSP-RK2 sub-steps and Strang
/// splitting q(dt/2) p(dt) q(dt/2). Boundary outflow is accumulated in `leakage`.
///
/// Throws CFLViolation when grid0.dt exceeds max_stable_dt and NegativeDensity
/// when the field turns negative beyond the tolerance.
PhaseSpaceGrid fokker_planck_evolve(const FokkerPlanckGenerator& gen, const PhaseSpaceGrid& grid0, double t_final,
                                    const FokkerPlanckOptions& options = {});

PhaseSpaceGrid fokker_planck_evolve(const ModelParamsd& params, const PhaseSpaceGrid& grid0, double t_final,
                                    const FokkerPlanckOptions& options = {});

/// Mass-normalised means and covariances by midpoint quadrature. Throws
/// MassLoss when the total mass is off by more than 1%.
GaussianStated grid_moments(const PhaseSpaceGrid& grid);

} // namespace dtunnel

#endif // DTUNNEL_FOKKER_PLANCK_HPP
