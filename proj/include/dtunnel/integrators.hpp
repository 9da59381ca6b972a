#ifndef DTUNNEL_INTEGRATORS_HPP
#define DTUNNEL_INTEGRATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dtunnel/errors.hpp"

namespace dtunnel {

enum class IntegratorMethod { RK4Fixed, RK45Adaptive };

struct IntegratorConfig {
    IntegratorMethod method{IntegratorMethod::RK45Adaptive};
    /// RK4Fixed step; each grid interval is split into ceil(interval/dt) equal steps.
    double dt{1e-3};
    double rtol{1e-10};
    double atol{1e-12};
    /// Integrate the barrier moments in co-moving variables e^{(lambda-nu)t} sigma(t).
    bool scaled{false};
    std::size_t max_steps{10'000'000};

    void validate() const
    {
        if (method == IntegratorMethod::RK4Fixed && !(dt > 0))
            throw InvalidParameters("integrator: dt must be > 0");
        if (method == IntegratorMethod::RK45Adaptive && (!(rtol > 0) || !(atol > 0)))
            throw InvalidParameters("integrator: rtol and atol must be > 0");
    }
};

namespace detail {

template <typename Vec>
bool all_finite(const Vec& y)
{
    return y.array().isFinite().all();
}

template <typename Scalar>
void check_grid(std::span<const Scalar> grid)
{
    if (grid.empty())
        throw InvalidParameters("integrator: empty time grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw InvalidParameters("integrator: time grid must be strictly increasing");
}

} // namespace detail

/// Classical fourth-order Runge-Kutta on a fixed step, sampled at `grid`.
template <typename Scalar, int N, typename Rhs>
std::vector<Eigen::Matrix<Scalar, N, 1>> integrate_rk4(const Rhs& f, Eigen::Matrix<Scalar, N, 1> y,
                                                       std::span<const Scalar> grid, Scalar dt)
{
    using std::ceil;
    using Vec = Eigen::Matrix<Scalar, N, 1>;
    detail::check_grid(grid);
    std::vector<Vec> out;
    out.reserve(grid.size());
    out.push_back(y);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const Scalar t0 = grid[k - 1];
        const Scalar span = grid[k] - t0;
        const auto n = static_cast<std::size_t>(std::max(Scalar(1), ceil(span / dt - Scalar(1e-9))));
        const Scalar h = span / Scalar(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Scalar t = t0 + h * Scalar(i);
            const Vec k1 = f(t, y);
            const Vec k2 = f(t + h / 2, Vec(y + h / 2 * k1));
            const Vec k3 = f(t + h / 2, Vec(y + h / 2 * k2));
            const Vec k4 = f(t + h, Vec(y + h * k3));
            y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!detail::all_finite(y))
                throw NonFiniteState("rk4: state overflowed", static_cast<double>(t));
        }
        out.push_back(y);
    }
    return out;
}

/// Dormand-Prince 5(4) with standard error-per-step control. Steps are clipped
/// so that every grid time is hit exactly.
template <typename Scalar, int N, typename Rhs>
std::vector<Eigen::Matrix<Scalar, N, 1>> integrate_dopri5(const Rhs& f, Eigen::Matrix<Scalar, N, 1> y,
                                                          std::span<const Scalar> grid, Scalar rtol, Scalar atol,
                                                          std::size_t max_steps = 10'000'000)
{
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;
    using Vec = Eigen::Matrix<Scalar, N, 1>;
    detail::check_grid(grid);

    constexpr Scalar a21 = Scalar(1) / 5;
    constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
    constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
    constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187, a53 = Scalar(64448) / 6561,
                     a54 = Scalar(-212) / 729;
    constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33, a63 = Scalar(46732) / 5247,
                     a64 = Scalar(49) / 176, a65 = Scalar(-5103) / 18656;
    constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192, b5 = Scalar(-2187) / 6784,
                     b6 = Scalar(11) / 84;
    // b - b*, the embedded fourth-order difference
    constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                     e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
    constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;

    std::vector<Vec> out;
    out.reserve(grid.size());
    out.push_back(y);
    if (grid.size() == 1)
        return out;

    Scalar t = grid.front();
    Vec k1 = f(t, y);
    // initial step from the local scale of the solution
    const Vec scale0 = (atol + rtol * y.array().abs()).matrix();
    const Scalar d0 = sqrt((y.array() / scale0.array()).square().mean());
    const Scalar d1 = sqrt((k1.array() / scale0.array()).square().mean());
    Scalar h = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    h = min(h, grid.back() - grid.front());

    std::size_t steps = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const Scalar target = grid[k];
        while (t < target) {
            if (++steps > max_steps)
                throw StepSizeUnderflow("dopri5: exceeded the maximum number of steps", static_cast<double>(t));
            bool last = false;
            Scalar step = h;
            if (t + step >= target || target - (t + step) < Scalar(1e-12) * abs(target)) {
                step = target - t;
                last = true;
            }
            if (step <= 16 * std::numeric_limits<Scalar>::epsilon() * max(abs(t), Scalar(1)))
                throw StepSizeUnderflow("dopri5: step size underflow", static_cast<double>(t));

            const Vec k2 = f(t + c2 * step, Vec(y + step * a21 * k1));
            const Vec k3 = f(t + c3 * step, Vec(y + step * (a31 * k1 + a32 * k2)));
            const Vec k4 = f(t + c4 * step, Vec(y + step * (a41 * k1 + a42 * k2 + a43 * k3)));
            const Vec k5 = f(t + c5 * step, Vec(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
            const Vec k6 = f(t + step, Vec(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
            const Vec y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vec k7 = f(t + step, y_new);
            const Vec err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            if (!detail::all_finite(y_new) || !detail::all_finite(err)) {
                if (!detail::all_finite(y))
                    throw NonFiniteState("dopri5: state overflowed", static_cast<double>(t));
                h = step / 4;
                if (h < 16 * std::numeric_limits<Scalar>::epsilon() * max(abs(t), Scalar(1)))
                    throw NonFiniteState("dopri5: state overflowed", static_cast<double>(t));
                continue;
            }

            const auto sc = (atol + rtol * y.array().abs().max(y_new.array().abs())).eval();
            const Scalar err_norm = sqrt((err.array() / sc).square().mean());
            if (err_norm <= 1) {
                t = last ? target : t + step;
                y = y_new;
                k1 = k7;
                const Scalar factor = err_norm == 0 ? Scalar(5) : min(Scalar(5), Scalar(0.9) * pow(err_norm, Scalar(-0.2)));
                // a step clipped by the grid says nothing about the controller's h
                h = (last && step < h) ? h : step * factor;
            } else {
                h = step * max(Scalar(0.2), Scalar(0.9) * pow(err_norm, Scalar(-0.2)));
            }
        }
        out.push_back(y);
    }
    return out;
}

} // namespace dtunnel

#endif // DTUNNEL_INTEGRATORS_HPP
