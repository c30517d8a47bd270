#pragma once

#include "dynfit/integrate.hpp"
#include "dynfit/model.hpp"

namespace dynfit {

/// A benchmark dynamical system: ground-truth sparse model plus the initial
/// conditions used for its training and holdout trajectories.
struct SystemSpec {
    std::string name;
    int dim = 0;
    SparseModel true_model;
    std::vector<Vec> train_ics;
    std::vector<Vec> holdout_ics;
    double default_duration = 10.0;
};

/// Registry lookup by name: lorenz, linear3d, harm_linear, harm_cubic, hopf2d.
SystemSpec make_system(const std::string& name);
std::vector<std::string> system_names();

/// Integrator settings for ground-truth generation.
inline IntegratorOptions ground_truth_options() {
    IntegratorOptions opts;
    opts.abs_tol = 1e-9;
    opts.rel_tol = 1e-9;
    return opts;
}

/// Simulates floor(duration/dt)+1 uniformly sampled points from `ic`;
/// clean_ref is set to the values. Throws IntegrationDiverged if the state
/// leaves the bound.
Trajectory simulate(const SystemSpec& system, const Vec& ic, double duration, double dt,
                    const IntegratorOptions& opts = ground_truth_options());

struct NoiseSpec {
    double target_level_pct = 0.0;
    uint64_t seed = 0;
    /// When true, the complex spectrum noise is Hermitian-symmetrized before
    /// the inverse transform; when false the real part of the asymmetric
    /// inverse is kept.
    bool hermitian_symmetrize = false;
};

/// Adds FFT-domain complex Gaussian white noise per variable, rescaled so the
/// measured level equals target_level_pct exactly. clean_ref is carried over
/// from the input.
Trajectory add_noise(const Trajectory& traj, const NoiseSpec& spec);

/// 100 * sigma(noisy_j - clean_j) / sigma(clean_j) per variable.
/// Throws DegenerateReference when some sigma(clean_j) == 0.
Vec measure_noise_level(const Trajectory& noisy, const Trajectory& clean);

}  // namespace dynfit
