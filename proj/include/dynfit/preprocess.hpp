#pragma once

#include "dynfit/types.hpp"

namespace dynfit {

struct SmoothingConfig {
    long window_len = 1;  // odd; 1 means identity
};

/// Default Hamming window length: a 50 ms window at the given timestep,
/// forced odd and at least 1.
long default_window_len(double dt);

/// Per-variable convolution with a unit-sum Hamming window; reflection
/// padding keeps output length equal to input length. clean_ref is dropped.
Trajectory smooth(const Trajectory& traj, const SmoothingConfig& cfg);

/// 4th-order central differences in the interior, one-sided 2nd-order at the
/// two points on each edge. Returns an n x dim matrix.
Mat estimate_derivatives(const Trajectory& traj);

/// Per-timepoint, per-variable regression weights.
struct WeightVector {
    Mat w;  // n x dim, all finite and >= 0
};

/// Weights from local z-scores: each window is detrended by a line fit, the
/// center point's z-score against the window residuals is clamped below at
/// z_floor, and w = ln(1/z + 1).
WeightVector timepoint_weights(const Trajectory& noisy, long halfwidth,
                               double z_floor = 0.1);

/// Weight at t = mean of weights at the derivative stencil points
/// {t-2, t-1, t+1, t+2}, truncated at the edges.
WeightVector derivative_weights(const WeightVector& w);

/// Rolling (population) standard deviation of (noisy - smoothed) over a
/// centered window, truncated at the edges. Local noise scale for envelopes.
Mat rolling_noise_std(const Trajectory& noisy, const Trajectory& smoothed, long window_len);

}  // namespace dynfit
