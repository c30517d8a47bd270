#include "dynfit/integrate.hpp"

#include <chrono>
#include <cmath>

namespace dynfit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order weights for the error estimate (b - bhat).
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
constexpr double e4 = 125.0 / 192 - 393.0 / 640;
constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
constexpr double e7 = -1.0 / 40;

bool all_bounded(const Vec& x, double bound) {
    return x.allFinite() && x.cwiseAbs().maxCoeff() <= bound;
}

}  // namespace

IntegrationStatus integrate_sampled(const Rhs& rhs, const Vec& ic, double t0, double dt,
                                    long n, Mat& out, const IntegratorOptions& opts) {
    const long dim = ic.size();
    out.setZero(n, dim);
    IntegrationStatus status;
    if (n <= 0) return status;

    Vec y = ic;
    if (!all_bounded(y, opts.state_bound)) {
        status.ok = false;
        status.failure = IntegrationFailure::diverged;
        return status;
    }
    out.row(0) = y.transpose();
    status.last_valid = 0;

    Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    Vec ytmp(dim), y5(dim), err(dim);

    double t = t0;
    double h = dt;  // persists across grid segments
    long steps = 0;
    const auto t_start = std::chrono::steady_clock::now();
    bool have_k1 = false;

    for (long i = 1; i < n; ++i) {
        const double t_target = t0 + static_cast<double>(i) * dt;
        while (t < t_target) {
            if (steps++ >= opts.max_steps) {
                status.ok = false;
                status.failure = IntegrationFailure::stiff;
                return status;
            }
            if (opts.wall_clock_cap > 0 && (steps & 1023) == 0) {
                const std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - t_start;
                if (elapsed.count() > opts.wall_clock_cap) {
                    status.ok = false;
                    status.failure = IntegrationFailure::timeout;
                    return status;
                }
            }
            double hs = std::min(h, t_target - t);
            if (hs < 1e-14 * std::max(1.0, std::abs(t))) {
                status.ok = false;
                status.failure = IntegrationFailure::stiff;
                return status;
            }

            if (!have_k1) rhs(t, y.data(), k1.data());
            ytmp = y + hs * a21 * k1;
            rhs(t + c2 * hs, ytmp.data(), k2.data());
            ytmp = y + hs * (a31 * k1 + a32 * k2);
            rhs(t + c3 * hs, ytmp.data(), k3.data());
            ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * hs, ytmp.data(), k4.data());
            ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * hs, ytmp.data(), k5.data());
            ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + hs, ytmp.data(), k6.data());
            y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + hs, y5.data(), k7.data());
            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err_norm = 0.0;
            bool finite = y5.allFinite() && err.allFinite();
            if (finite) {
                for (long d = 0; d < dim; ++d) {
                    const double scale =
                        opts.abs_tol + opts.rel_tol * std::max(std::abs(y[d]), std::abs(y5[d]));
                    const double r = err[d] / scale;
                    err_norm += r * r;
                }
                err_norm = std::sqrt(err_norm / static_cast<double>(dim));
            }

            if (finite && err_norm <= 1.0) {
                t += hs;
                y = y5;
                k1 = k7;  // FSAL
                have_k1 = true;
                if (!all_bounded(y, opts.state_bound)) {
                    status.ok = false;
                    status.failure = IntegrationFailure::diverged;
                    return status;
                }
                const double grow =
                    err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
                h = hs * std::clamp(grow, 1.0, 5.0);
            } else {
                const double shrink =
                    finite && err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 0.2;
                h = hs * std::clamp(shrink, 0.2, 0.9);
                have_k1 = true;  // k1 still valid at unchanged (t, y)
            }
        }
        out.row(i) = y.transpose();
        status.last_valid = i;
    }
    return status;
}

}  // namespace dynfit
