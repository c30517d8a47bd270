#pragma once

#include "dynfit/model.hpp"
#include "dynfit/preprocess.hpp"

namespace dynfit {

struct EvolutionLimits {
    double state_bound = 1e6;
    double wall_clock_cap = 10.0;  // emergency backstop, seconds
    long max_steps = 500000;       // deterministic stiffness guard
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
};

/// Weighted average of the first k values starting at `offset`, per variable.
/// Falls back to the plain mean when a variable's weights sum to zero.
Vec initial_condition_estimate(const Trajectory& traj, const WeightVector& weights,
                               long k, long offset = 0);

enum class EvolveFailure { none, diverged, timeout, stiff };

struct EvolveOutcome {
    Trajectory pred;
    bool ok = false;
    EvolveFailure failure = EvolveFailure::none;
    long last_valid = -1;
};

/// Adaptive RK evolution of dx/dt = Xi * F(x) sampled on a uniform grid.
EvolveOutcome evolve_model(const SparseModel& model, const Vec& ic, double t0, double dt,
                           long n, const EvolutionLimits& limits);

/// The six evolution-based figures of merit for one (model, trajectory) pair.
struct FomSuite {
    double stability = std::numeric_limits<double>::quiet_NaN();
    Vec in_bounds_frac;
    Vec in_envelope_frac;
    Vec std_rel_err;
    Vec fft_power_corr;
    Vec hist_corr;
    bool evolution_ok = false;
    bool skipped = false;
};

/// Metrics 2-6 for an already-evolved prediction (stability left NaN).
FomSuite fom_metrics(const Trajectory& pred, const Trajectory& noisy_ref,
                     const Trajectory& smoothed_ref, const Mat& noise_std_local);

/// Evolves the model n_repeats times from initial conditions estimated at
/// neighborhoods offset by 0, +2, +4, ... timepoints and fills the full
/// suite. A failed first evolution marks the suite failed.
FomSuite compute_foms(const SparseModel& model, const Trajectory& noisy_ref,
                      const Trajectory& smoothed_ref, const Mat& noise_std_local,
                      const WeightVector& weights, const EvolutionLimits& limits,
                      int n_repeats, long ic_k);

/// rms(a - b) / max(rms(a), rms(b), eps) over all entries.
double relative_rms_deviation(const Mat& a, const Mat& b);

}  // namespace dynfit
