#pragma once

#include <functional>

#include "dynfit/types.hpp"

namespace dynfit {

struct IntegratorOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double state_bound = 1e6;   // |x_i| above this counts as divergence
    long max_steps = 20000000;  // deterministic stiffness guard
    double wall_clock_cap = 0;  // seconds; 0 disables the check
};

enum class IntegrationFailure { none, diverged, stiff, timeout };

struct IntegrationStatus {
    bool ok = true;
    IntegrationFailure failure = IntegrationFailure::none;
    long last_valid = -1;  // index of the last grid point that was filled
};

using Rhs = std::function<void(double t, const double* x, double* dxdt)>;

/// Integrates dx/dt = rhs with an adaptive Dormand-Prince 5(4) scheme and
/// writes the solution at t0 + i*dt for i in [0, n) into `out` (n x dim).
/// Row 0 is the initial condition. Stops early on divergence, step-budget
/// exhaustion, or the wall-clock cap; rows past last_valid are zero.
IntegrationStatus integrate_sampled(const Rhs& rhs, const Vec& ic, double t0, double dt,
                                    long n, Mat& out, const IntegratorOptions& opts = {});

}  // namespace dynfit
