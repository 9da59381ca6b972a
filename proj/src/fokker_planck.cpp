#include "dtunnel/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "dtunnel/errors.hpp"
#include "dtunnel/phase_space.hpp"
#include "dtunnel/propagator.hpp"

namespace dtunnel {

PhaseSpaceGrid PhaseSpaceGrid::zeros(double q_min, double q_max, double p_min, double p_max, Eigen::Index n_q,
                                     Eigen::Index n_p)
{
    if (!(q_max > q_min) || !(p_max > p_min))
        throw InvalidParameters("phase-space grid: empty domain");
    if (n_q < 2 || n_p < 2)
        throw InvalidParameters("phase-space grid: need at least 2 cells per axis");
    PhaseSpaceGrid g;
    g.q_min = q_min;
    g.q_max = q_max;
    g.p_min = p_min;
    g.p_max = p_max;
    g.values = Eigen::ArrayXXd::Zero(n_q, n_p);
    return g;
}

FokkerPlanckGenerator FokkerPlanckGenerator::barrier(const ModelParamsd& params)
{
    FokkerPlanckGenerator gen;
    gen.drift << -(params.lambda - params.mu), 1.0 / params.m, params.m * params.omega * params.omega,
        -(params.lambda + params.mu);
    gen.D_qq = params.D_qq;
    gen.D_pp = params.D_pp;
    gen.D_pq = params.D_pq;
    return gen;
}

PhaseSpaceDomain auto_domain(const ModelParamsd& params, const GaussianStated& state0, double t_final, double n_sd)
{
    constexpr int samples = 64;
    double q_lo = state0.sigma_q, q_hi = state0.sigma_q;
    double p_lo = state0.sigma_p, p_hi = state0.sigma_p;
    double var_q = state0.sigma_qq, var_p = state0.sigma_pp;
    for (int k = 1; k <= samples; ++k) {
        const GaussianStated s = propagate(params, state0, t_final * k / samples);
        q_lo = std::min(q_lo, s.sigma_q);
        q_hi = std::max(q_hi, s.sigma_q);
        p_lo = std::min(p_lo, s.sigma_p);
        p_hi = std::max(p_hi, s.sigma_p);
        var_q = std::max(var_q, s.sigma_qq);
        var_p = std::max(var_p, s.sigma_pp);
    }
    const double wq = n_sd * std::sqrt(var_q);
    const double wp = n_sd * std::sqrt(var_p);
    return {q_lo - wq, q_hi + wq, p_lo - wp, p_hi + wp};
}

PhaseSpaceGrid sample_wigner(const GaussianStated& state, const PhaseSpaceDomain& d, Eigen::Index n_q,
                             Eigen::Index n_p)
{
    PhaseSpaceGrid g = PhaseSpaceGrid::zeros(d.q_min, d.q_max, d.p_min, d.p_max, n_q, n_p);
    const WignerGaussian<double> w(state);
    for (Eigen::Index j = 0; j < n_p; ++j)
        for (Eigen::Index i = 0; i < n_q; ++i)
            g.values(i, j) = w(g.q(i), g.p(j));
    g.time = state.t;
    return g;
}

double max_stable_dt(const FokkerPlanckGenerator& gen, const PhaseSpaceGrid& grid, double cfl)
{
    const double dq = grid.dq(), dp = grid.dp();
    double aq = 0, ap = 0;
    // the drift is linear, so its extremes sit at the corners of the box
    for (const double q : {grid.q_min, grid.q_max}) {
        for (const double p : {grid.p_min, grid.p_max}) {
            aq = std::max(aq, std::abs(gen.drift(0, 0) * q + gen.drift(0, 1) * p));
            ap = std::max(ap, std::abs(gen.drift(1, 0) * q + gen.drift(1, 1) * p));
        }
    }
    const double dqq = gen.D_qq + std::abs(gen.D_pq) * dq / dp;
    const double dpp = gen.D_pp + std::abs(gen.D_pq) * dp / dq;
    double bound = std::numeric_limits<double>::infinity();
    if (aq > 0)
        bound = std::min(bound, dq / aq);
    if (ap > 0)
        bound = std::min(bound, dp / ap);
    if (dqq > 0)
        bound = std::min(bound, dq * dq / (2 * dqq));
    if (dpp > 0)
        bound = std::min(bound, dp * dp / (2 * dpp));
    return cfl * bound;
}

namespace {

double limited_slope(SlopeLimiter limiter, double a, double b)
{
    switch (limiter) {
    case SlopeLimiter::VanLeer:
        return a * b > 0 ? 2 * a * b / (a + b) : 0.0;
    case SlopeLimiter::MonotonizedCentral:
        if (a * b <= 0)
            return 0.0;
        return std::copysign(std::min({2 * std::abs(a), 2 * std::abs(b), 0.5 * std::abs(a + b)}), a);
    case SlopeLimiter::Minmod:
        if (a * b <= 0)
            return 0.0;
        return std::abs(a) < std::abs(b) ? a : b;
    case SlopeLimiter::Unlimited:
        return 0.5 * (a + b);
    }
    return 0.0;
}

/// One-dimensional advection-diffusion line with face velocities.
class LineSolver {
public:
    LineSolver(Eigen::Index n, double h, double diffusion, const FokkerPlanckOptions& opt)
        : n_(n), h_(h), diffusion_(diffusion), opt_(opt), ext_(static_cast<std::size_t>(n + 4)),
          slope_(static_cast<std::size_t>(n + 2)), flux_(static_cast<std::size_t>(n + 1)),
          rate0_(static_cast<std::size_t>(n)), rate1_(static_cast<std::size_t>(n)), stage_(static_cast<std::size_t>(n))
    {
    }

    /// Advances u by dt with SSP-RK2; returns the mass per unit transverse
    /// width that left through the two ends.
    double step(std::span<double> u, std::span<const double> velocity, double dt)
    {
        const double b0 = rate(u, velocity, rate0_);
        for (Eigen::Index k = 0; k < n_; ++k)
            stage_[k] = u[k] + dt * rate0_[k];
        const double b1 = rate(stage_, velocity, rate1_);
        for (Eigen::Index k = 0; k < n_; ++k)
            u[k] = 0.5 * u[k] + 0.5 * (stage_[k] + dt * rate1_[k]);
        return 0.5 * dt * (b0 + b1);
    }

private:
    /// du/dt into `out`; returns F(right end) - F(left end).
    double rate(std::span<const double> u, std::span<const double> velocity, std::vector<double>& out)
    {
        const Eigen::Index n = n_;
        for (Eigen::Index k = 0; k < n; ++k)
            ext_[k + 2] = u[k];
        if (opt_.boundary == BoundaryCondition::Outflow) {
            ext_[0] = ext_[1] = u[0];
            ext_[n + 2] = ext_[n + 3] = u[n - 1];
        } else {
            ext_[0] = ext_[1] = 0.0;
            ext_[n + 2] = ext_[n + 3] = 0.0;
        }
        // slope_[k + 1] belongs to cell k, k = -1 .. n
        for (Eigen::Index k = -1; k <= n; ++k)
            slope_[k + 1] = limited_slope(opt_.limiter, ext_[k + 2] - ext_[k + 1], ext_[k + 3] - ext_[k + 2]);
        // face f sits between cells f-1 and f
        for (Eigen::Index f = 0; f <= n; ++f) {
            const double left = ext_[f + 1] + 0.5 * slope_[f];
            const double right = ext_[f + 2] - 0.5 * slope_[f + 1];
            const double a = velocity[f];
            const double advective = a > 0 ? a * left : a * right;
            const double diffusive = -diffusion_ * (ext_[f + 2] - ext_[f + 1]) / h_;
            flux_[f] = advective + diffusive;
        }
        for (Eigen::Index k = 0; k < n; ++k)
            out[k] = -(flux_[k + 1] - flux_[k]) / h_;
        return flux_[n] - flux_[0];
    }

    Eigen::Index n_;
    double h_;
    double diffusion_;
    const FokkerPlanckOptions& opt_;
    std::vector<double> ext_, slope_, flux_, rate0_, rate1_, stage_;
};

class Evolver {
public:
    Evolver(const FokkerPlanckGenerator& gen, PhaseSpaceGrid& grid, const FokkerPlanckOptions& opt)
        : gen_(gen), grid_(grid), opt_(opt), q_line_(grid.n_q(), grid.dq(), gen.D_qq, opt),
          p_line_(grid.n_p(), grid.dp(), gen.D_pp, opt), velocity_q_(static_cast<std::size_t>(grid.n_q() + 1)),
          velocity_p_(static_cast<std::size_t>(grid.n_p() + 1))
    {
    }

    void step(double dt)
    {
        sweep_q(0.5 * dt);
        if (gen_.D_pq != 0) {
            sweep_p(0.5 * dt);
            cross(dt);
            sweep_p(0.5 * dt);
        } else {
            sweep_p(dt);
        }
        sweep_q(0.5 * dt);
    }

private:
    void sweep_q(double dt)
    {
        const Eigen::Index nq = grid_.n_q();
        const double dq = grid_.dq();
        double out = 0;
        for (Eigen::Index j = 0; j < grid_.n_p(); ++j) {
            const double p = grid_.p(j);
            for (Eigen::Index f = 0; f <= nq; ++f) {
                const double qf = grid_.q_min + static_cast<double>(f) * dq;
                velocity_q_[f] = gen_.drift(0, 0) * qf + gen_.drift(0, 1) * p;
            }
            out += q_line_.step(std::span<double>(grid_.values.col(j).data(), static_cast<std::size_t>(nq)),
                                velocity_q_, dt);
        }
        grid_.leakage += out * grid_.dp();
    }

    void sweep_p(double dt)
    {
        const Eigen::Index np = grid_.n_p();
        const double dp = grid_.dp();
        // work on the transpose so every p-line is contiguous
        transposed_ = grid_.values.transpose();
        double out = 0;
        for (Eigen::Index i = 0; i < grid_.n_q(); ++i) {
            const double q = grid_.q(i);
            for (Eigen::Index f = 0; f <= np; ++f) {
                const double pf = grid_.p_min + static_cast<double>(f) * dp;
                velocity_p_[f] = gen_.drift(1, 0) * q + gen_.drift(1, 1) * pf;
            }
            out += p_line_.step(std::span<double>(transposed_.col(i).data(), static_cast<std::size_t>(np)),
                                velocity_p_, dt);
        }
        grid_.values = transposed_.transpose();
        grid_.leakage += out * grid_.dq();
    }

    /// Rate of 2 D_pq W_qp in flux form; returns the boundary outflow rate.
    double cross_rate(const Eigen::ArrayXXd& w, Eigen::ArrayXXd& rate)
    {
        const Eigen::Index nq = w.rows(), np = w.cols();
        const double dq = grid_.dq(), dp = grid_.dp();
        Eigen::ArrayXXd ext(nq + 2, np + 2);
        if (opt_.boundary == BoundaryCondition::Outflow) {
            ext.block(1, 1, nq, np) = w;
            ext.row(0).segment(1, np) = w.row(0);
            ext.row(nq + 1).segment(1, np) = w.row(nq - 1);
            ext.col(0) = ext.col(1);
            ext.col(np + 1) = ext.col(np);
        } else {
            ext.setZero();
            ext.block(1, 1, nq, np) = w;
        }
        // q-faces (i + 1/2, j): -D_pq dW/dp; p-faces (i, j + 1/2): -D_pq dW/dq
        Eigen::ArrayXXd fq(nq + 1, np), fp(nq, np + 1);
        for (Eigen::Index j = 0; j < np; ++j)
            for (Eigen::Index f = 0; f <= nq; ++f)
                fq(f, j) = -gen_.D_pq *
                           (ext(f, j + 2) + ext(f + 1, j + 2) - ext(f, j) - ext(f + 1, j)) / (4 * dp);
        for (Eigen::Index f = 0; f <= np; ++f)
            for (Eigen::Index i = 0; i < nq; ++i)
                fp(i, f) = -gen_.D_pq *
                           (ext(i + 2, f) + ext(i + 2, f + 1) - ext(i, f) - ext(i, f + 1)) / (4 * dq);
        rate = -(fq.bottomRows(nq) - fq.topRows(nq)) / dq - (fp.rightCols(np) - fp.leftCols(np)) / dp;
        return (fq.row(nq).sum() - fq.row(0).sum()) * dp + (fp.col(np).sum() - fp.col(0).sum()) * dq;
    }

    void cross(double dt)
    {
        Eigen::ArrayXXd r0, r1;
        const double b0 = cross_rate(grid_.values, r0);
        const Eigen::ArrayXXd stage = grid_.values + dt * r0;
        const double b1 = cross_rate(stage, r1);
        grid_.values = 0.5 * grid_.values + 0.5 * (stage + dt * r1);
        grid_.leakage += 0.5 * dt * (b0 + b1);
    }

    const FokkerPlanckGenerator& gen_;
    PhaseSpaceGrid& grid_;
    const FokkerPlanckOptions& opt_;
    LineSolver q_line_, p_line_;
    std::vector<double> velocity_q_, velocity_p_;
    Eigen::ArrayXXd transposed_;
};

} // namespace

PhaseSpaceGrid fokker_planck_evolve(const FokkerPlanckGenerator& gen, const PhaseSpaceGrid& grid0, double t_final,
                                    const FokkerPlanckOptions& options)
{
    if (!(t_final >= 0))
        throw InvalidParameters("fokker_planck_evolve: t_final must be >= 0");
    if (grid0.n_q() < 2 || grid0.n_p() < 2)
        throw InvalidParameters("fokker_planck_evolve: grid needs at least 2 cells per axis");
    PhaseSpaceGrid grid = grid0;
    if (t_final == 0)
        return grid;

    const double dt_max = max_stable_dt(gen, grid, options.cfl);
    std::size_t n_steps = 1;
    if (grid0.dt > 0) {
        if (grid0.dt > dt_max * (1 + 1e-12)) {
            std::ostringstream os;
            os << "fokker_planck_evolve: dt = " << grid0.dt << " exceeds the stability bound " << dt_max;
            throw CFLViolation(os.str());
        }
        n_steps = static_cast<std::size_t>(std::ceil(t_final / grid0.dt - 1e-9));
    } else if (std::isfinite(dt_max)) {
        n_steps = static_cast<std::size_t>(std::ceil(t_final / dt_max));
    }
    n_steps = std::max<std::size_t>(n_steps, 1);
    const double dt = t_final / static_cast<double>(n_steps);

    Evolver evolver(gen, grid, options);
    for (std::size_t s = 0; s < n_steps; ++s) {
        evolver.step(dt);
        const double hi = grid.values.maxCoeff();
        const double lo = grid.values.minCoeff();
        if (lo < -options.negative_tolerance * std::max(hi, 0.0)) {
            std::ostringstream os;
            os << "fokker_planck_evolve: density " << lo << " below tolerance at t = "
               << grid0.time + dt * static_cast<double>(s + 1);
            throw NegativeDensity(os.str());
        }
    }
    grid.time = grid0.time + t_final;
    grid.dt = grid0.dt > 0 ? grid0.dt : dt;
    return grid;
}

PhaseSpaceGrid fokker_planck_evolve(const ModelParamsd& params, const PhaseSpaceGrid& grid0, double t_final,
                                    const FokkerPlanckOptions& options)
{
    return fokker_planck_evolve(FokkerPlanckGenerator::barrier(params), grid0, t_final, options);
}

GaussianStated grid_moments(const PhaseSpaceGrid& grid)
{
    const double cell = grid.dq() * grid.dp();
    const double mass = grid.values.sum() * cell;
    if (!(std::abs(mass - 1.0) <= 0.01)) {
        std::ostringstream os;
        os << "grid_moments: total mass " << mass << " differs from 1 by more than 1%";
        throw MassLoss(os.str());
    }
    const Eigen::Index nq = grid.n_q(), np = grid.n_p();
    Eigen::ArrayXd q(nq), p(np);
    for (Eigen::Index i = 0; i < nq; ++i)
        q(i) = grid.q(i);
    for (Eigen::Index j = 0; j < np; ++j)
        p(j) = grid.p(j);

    const Eigen::ArrayXd marginal_q = grid.values.rowwise().sum() * cell / mass;
    const Eigen::ArrayXd marginal_p = grid.values.colwise().sum().transpose() * cell / mass;
    GaussianStated s;
    s.t = grid.time;
    s.sigma_q = (marginal_q * q).sum();
    s.sigma_p = (marginal_p * p).sum();
    const Eigen::ArrayXd dq = q - s.sigma_q;
    const Eigen::ArrayXd dp = p - s.sigma_p;
    s.sigma_qq = (marginal_q * dq.square()).sum();
    s.sigma_pp = (marginal_p * dp.square()).sum();
    // sum_ij W_ij dq_i dp_j = dq^T W dp
    s.sigma_pq = (dq.matrix().transpose() * grid.values.matrix() * dp.matrix()).value() * cell / mass;
    return s;
}

} // namespace dtunnel
