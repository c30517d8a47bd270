#pragma once

#include <cstdint>
#include <optional>

#include "dynfit/types.hpp"

namespace dynfit {

enum class FftMode { complex_coeffs, real_part, magnitude, power };

FftMode fft_mode_from_string(const std::string& s);
std::string to_string(FftMode mode);

struct RegressionConfig {
    int n_subsets = 17;
    double subset_fraction = 0.7;
    FftMode fft_mode = FftMode::power;
    double fft_block_scale = 1.0;
    double ratio_threshold = 30.0;
    double rank_rcond = 1e-6;  // spectral truncation for the solve
    uint64_t seed = 0;
};

/// n_subsets seeded index sets of size round(subset_fraction * n_timepoints),
/// each sampled without replacement. Throws SubsetTooSmall when the size is
/// below n_active + 2.
std::vector<std::vector<long>> select_subsets(long n_timepoints, long n_active,
                                              const RegressionConfig& cfg);

/// Timepoint keep-mask: false where max_i|theta_ti| / max(min_i|theta_ti|,
/// eps) exceeds the threshold. A single column keeps everything. Callers with
/// mixed-magnitude libraries should pass magnitude-normalized columns.
std::vector<uint8_t> exclude_extreme_ratio(const Mat& theta_active, double threshold);

/// Weighted least squares on the stacked system: time-domain block
/// diag(sqrt(w))*theta vs diag(sqrt(w))*dxdt on included timepoints, plus an
/// FFT block built from the full-length series with excluded points zeroed,
/// scaled so its Frobenius norm is fft_block_scale times the time block's.
/// Columns are normalized internally (and the solution unscaled), so scaling
/// a column by c scales its coefficient by exactly 1/c in every mode.
/// Solved by rank-revealing column-pivoted QR; throws RankDeficient when the
/// effective rank is below the number of active terms.
Vec fit_coefficients(const Mat& theta_active, const Vec& dxdt, const Vec& weights,
                     const std::vector<uint8_t>& include, const RegressionConfig& cfg);

struct CoefficientEnsemble {
    Mat draws;   // n_successful_subsets x n_active
    Vec median;  // exact per-column median of draws
};

/// fit_coefficients over each subset (intersected with the ratio exclusion
/// mask); throws RankDeficient when a majority of subsets fail.
CoefficientEnsemble ensemble_fit(const Mat& theta_active, const Vec& dxdt,
                                 const Vec& weights, const RegressionConfig& cfg);

/// Cross-products of library columns over a timepoint set, cached for fast
/// repeated linear-dependence fits. Columns are std-normalized internally;
/// reported betas are in original column units and R^2 is unaffected.
class ColumnGram {
public:
    ColumnGram(const Mat& theta, const std::vector<long>& timepoints);  // empty = all rows

    struct Fit {
        double r2 = 0.0;
        Vec betas;               // per basis entry, original units
        double intercept = 0.0;  // zero for uncentered fits
    };

    /// Fits column `target` on columns `basis`. Centered fits include an
    /// intercept; uncentered fits use the raw columns only. R^2 is always
    /// 1 - SSres / SStot(about the mean), clamped to [0, 1].
    Fit fit(const std::vector<long>& basis, long target, bool centered = true) const;

    double leave_one_out_r2(const std::vector<long>& active, long target,
                            bool centered = true) const;

    long count() const { return m_; }

private:
    Mat g_;       // normalized cross-products
    Vec sum_;     // per-column sums over T (normalized columns)
    Vec scale_;   // normalization divisor per column
    long m_ = 0;  // |T|
};

}  // namespace dynfit
