#pragma once

#include <complex>

#include "dynfit/types.hpp"

namespace dynfit::fft {

using CVec = Eigen::VectorXcd;

/// Full forward DFT of a real series (unnormalized, length-n complex output).
CVec forward(const Vec& x);

/// Inverse DFT of a full complex spectrum; returns the real part of the
/// (1/n-normalized) inverse transform.
Vec inverse_real_part(const CVec& spectrum);

/// Forward DFT of a real series, first half only (bins 0..n/2).
CVec forward_half(const Vec& x);

/// |forward_half|^2 of a mean-removed series, bins 1..n/2. Used for FoM
/// spectrum comparison.
Vec power_spectrum(const Vec& x);

}  // namespace dynfit::fft
