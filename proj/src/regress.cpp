#include "dynfit/regress.hpp"

#include <Eigen/SVD>

#include "dynfit/fft.hpp"
#include "dynfit/library.hpp"
#include "dynfit/rng.hpp"

namespace dynfit {

FftMode fft_mode_from_string(const std::string& s) {
    if (s == "complex") return FftMode::complex_coeffs;
    if (s == "real") return FftMode::real_part;
    if (s == "magnitude") return FftMode::magnitude;
    if (s == "power") return FftMode::power;
    throw ConfigError("unknown fft mode: " + s);
}

std::string to_string(FftMode mode) {
    switch (mode) {
        case FftMode::complex_coeffs: return "complex";
        case FftMode::real_part: return "real";
        case FftMode::magnitude: return "magnitude";
        case FftMode::power: return "power";
    }
    return "?";
}

std::vector<std::vector<long>> select_subsets(long n_timepoints, long n_active,
                                              const RegressionConfig& cfg) {
    if (cfg.n_subsets < 1) throw std::invalid_argument("n_subsets must be >= 1");
    const long size = static_cast<long>(std::llround(cfg.subset_fraction *
                                                     static_cast<double>(n_timepoints)));
    if (size < n_active + 2)
        throw SubsetTooSmall("subset size " + std::to_string(size) + " < " +
                             std::to_string(n_active + 2));
    Rng rng(cfg.seed);
    std::vector<std::vector<long>> subsets;
    subsets.reserve(static_cast<size_t>(cfg.n_subsets));
    for (int s = 0; s < cfg.n_subsets; ++s)
        subsets.push_back(rng.sample_indices(n_timepoints, size));
    return subsets;
}

std::vector<uint8_t> exclude_extreme_ratio(const Mat& theta_active, double threshold) {
    constexpr double eps_abs = 1e-12;
    const long n = theta_active.rows();
    const long k = theta_active.cols();
    if (k < 1) throw std::invalid_argument("need >= 1 active column");
    std::vector<uint8_t> keep(static_cast<size_t>(n), uint8_t{1});
    if (k == 1) return keep;
    for (long t = 0; t < n; ++t) {
        double lo = std::abs(theta_active(t, 0)), hi = lo;
        for (long i = 1; i < k; ++i) {
            const double a = std::abs(theta_active(t, i));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        if (hi / std::max(lo, eps_abs) > threshold) keep[static_cast<size_t>(t)] = 0;
    }
    return keep;
}

namespace {

// Masked-to-zero, mean-removed full-length series for the FFT block.
Vec masked_demeaned(const Eigen::Ref<const Vec>& col, const std::vector<uint8_t>& incl,
                    long n_included) {
    const long n = col.size();
    double mean = 0.0;
    for (long t = 0; t < n; ++t)
        if (incl[static_cast<size_t>(t)]) mean += col[t];
    mean /= static_cast<double>(std::max<long>(1, n_included));
    Vec out = Vec::Zero(n);
    for (long t = 0; t < n; ++t)
        if (incl[static_cast<size_t>(t)]) out[t] = col[t] - mean;
    return out;
}

// Real rows of the mode transform, bins 1..n/2 (DC is zero after demeaning).
// Magnitude and power rows are aligned with the target's spectral phase:
// the target's own rows reduce to |F(y)| and |F(y)|^2 (its magnitude and
// power spectrum coefficients) while feature rows stay linear in the series,
// so a consistent system remains exactly consistent and large-magnitude
// spectral coefficients dominate the L2 loss.
Vec mode_rows(const Vec& series, FftMode mode, const fft::CVec& target_half) {
    const fft::CVec half = fft::forward_half(series);
    const long nb = half.size() - 1;
    if (mode == FftMode::complex_coeffs) {
        Vec rows(2 * nb);
        for (long i = 0; i < nb; ++i) {
            rows[2 * i] = half[i + 1].real();
            rows[2 * i + 1] = half[i + 1].imag();
        }
        return rows;
    }
    Vec rows(nb);
    for (long i = 0; i < nb; ++i) {
        const std::complex<double> v = half[i + 1];
        switch (mode) {
            case FftMode::real_part: rows[i] = v.real(); break;
            case FftMode::magnitude: {
                const std::complex<double> y = target_half[i + 1];
                const double mag = std::abs(y);
                rows[i] = mag > 0 ? (v * std::conj(y)).real() / mag : v.real();
                break;
            }
            default: {  // power
                const std::complex<double> y = target_half[i + 1];
                rows[i] = (v * std::conj(y)).real();
                break;
            }
        }
    }
    return rows;
}

}  // namespace

Vec fit_coefficients(const Mat& theta_active, const Vec& dxdt, const Vec& weights,
                     const std::vector<uint8_t>& include, const RegressionConfig& cfg) {
    const long n = theta_active.rows();
    const long k = theta_active.cols();
    if (dxdt.size() != n || weights.size() != n ||
        static_cast<long>(include.size()) != n)
        throw std::invalid_argument("fit_coefficients shape mismatch");

    std::vector<uint8_t> incl(include);
    long n_incl = 0;
    for (long t = 0; t < n; ++t) {
        if (weights[t] <= 0.0) incl[static_cast<size_t>(t)] = 0;
        if (incl[static_cast<size_t>(t)]) ++n_incl;
    }
    if (n_incl < k) throw RankDeficient(n_incl, k);

    // Time-domain block.
    Mat a(n_incl, k);
    Vec ya(n_incl);
    long r = 0;
    for (long t = 0; t < n; ++t) {
        if (!incl[static_cast<size_t>(t)]) continue;
        const double sw = std::sqrt(weights[t]);
        a.row(r) = sw * theta_active.row(t);
        ya[r] = sw * dxdt[t];
        ++r;
    }

    // Internal column normalization; the solution is unscaled at the end.
    Vec scale(k);
    for (long i = 0; i < k; ++i) {
        const double norm = a.col(i).norm();
        scale[i] = norm > 0 ? norm : 1.0;
        a.col(i) /= scale[i];
    }

    long rows_b = 0;
    Mat b;
    Vec yb;
    if (cfg.fft_block_scale > 0.0 && n >= 4) {
        const Vec target_series = masked_demeaned(dxdt, incl, n_incl);
        const fft::CVec target_half = fft::forward_half(target_series);
        yb = mode_rows(target_series, cfg.fft_mode, target_half);
        rows_b = yb.size();
        b.resize(rows_b, k);
        for (long i = 0; i < k; ++i) {
            const Vec col_series = masked_demeaned(theta_active.col(i), incl, n_incl);
            b.col(i) = mode_rows(col_series, cfg.fft_mode, target_half) / scale[i];
        }
        const double norm_a = a.norm();
        const double norm_b = b.norm();
        if (norm_b > 0.0) {
            const double beta = cfg.fft_block_scale * norm_a / norm_b;
            b *= beta;
            yb *= beta;
        } else {
            rows_b = 0;
        }
    }

    Mat stacked(n_incl + rows_b, k);
    Vec target(n_incl + rows_b);
    stacked.topRows(n_incl) = a;
    target.head(n_incl) = ya;
    if (rows_b > 0) {
        stacked.bottomRows(rows_b) = b;
        target.tail(rows_b) = yb;
    }

    // Rank-revealing solve. Directions below rank_rcond * sigma_max are
    // truncated (they carry cancellation mass, not signal, in overcomplete
    // noisy libraries); structurally dependent columns raise RankDeficient.
    Eigen::BDCSVD<Mat> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
    long hard_rank = 0;
    for (long i = 0; i < sigma.size(); ++i)
        if (sigma[i] > 1e-12 * sigma_max) ++hard_rank;
    if (hard_rank < k) throw RankDeficient(hard_rank, k);

    const Vec uty = svd.matrixU().transpose() * target;
    Vec zeta = Vec::Zero(k);
    for (long i = 0; i < sigma.size(); ++i) {
        if (sigma[i] <= cfg.rank_rcond * sigma_max) continue;
        zeta += svd.matrixV().col(i) * (uty[i] / sigma[i]);
    }
    return zeta.array() / scale.array();
}

CoefficientEnsemble ensemble_fit(const Mat& theta_active, const Vec& dxdt,
                                 const Vec& weights, const RegressionConfig& cfg) {
    const long n = theta_active.rows();
    const long k = theta_active.cols();

    // Ratio exclusion on magnitude-normalized columns, so mixed-degree
    // libraries are compared on even footing.
    Mat normalized = theta_active;
    const Vec med = term_medians(normalized, {});
    for (long i = 0; i < k; ++i)
        if (med[i] > 0) normalized.col(i) /= med[i];
    const std::vector<uint8_t> ratio_keep =
        exclude_extreme_ratio(normalized, cfg.ratio_threshold);

    const auto subsets = select_subsets(n, k, cfg);

    std::vector<Vec> draws;
    draws.reserve(subsets.size());
    long failures = 0;
    std::vector<uint8_t> incl(static_cast<size_t>(n));
    for (const auto& subset : subsets) {
        std::fill(incl.begin(), incl.end(), uint8_t{0});
        for (long t : subset)
            incl[static_cast<size_t>(t)] = ratio_keep[static_cast<size_t>(t)];
        try {
            draws.push_back(fit_coefficients(theta_active, dxdt, weights, incl, cfg));
        } catch (const RankDeficient&) {
            ++failures;
        }
    }
    if (failures * 2 > static_cast<long>(subsets.size()) || draws.empty())
        throw RankDeficient(0, k);

    CoefficientEnsemble ens;
    ens.draws.resize(static_cast<long>(draws.size()), k);
    for (size_t d = 0; d < draws.size(); ++d)
        ens.draws.row(static_cast<long>(d)) = draws[d].transpose();
    ens.median.resize(k);
    std::vector<double> column(draws.size());
    for (long i = 0; i < k; ++i) {
        for (size_t d = 0; d < draws.size(); ++d)
            column[d] = ens.draws(static_cast<long>(d), i);
        ens.median[i] = median(column);
    }
    return ens;
}

ColumnGram::ColumnGram(const Mat& theta, const std::vector<long>& timepoints) {
    const long k = theta.cols();
    Mat sub;
    if (timepoints.empty()) {
        sub = theta;
    } else {
        sub.resize(static_cast<long>(timepoints.size()), k);
        for (size_t r = 0; r < timepoints.size(); ++r)
            sub.row(static_cast<long>(r)) = theta.row(timepoints[r]);
    }
    m_ = sub.rows();
    scale_.resize(k);
    for (long i = 0; i < k; ++i) {
        const double sd = stddev(sub.col(i));
        scale_[i] = sd > 0 ? sd : 1.0;
        sub.col(i) /= scale_[i];
    }
    g_ = sub.transpose() * sub;
    sum_ = sub.colwise().sum();
}

ColumnGram::Fit ColumnGram::fit(const std::vector<long>& basis, long target,
                                bool centered) const {
    const long nb = static_cast<long>(basis.size());
    Fit out;
    const double mc = static_cast<double>(m_);

    auto cross = [&](long i, long j) {
        return centered ? g_(i, j) - sum_[i] * sum_[j] / mc : g_(i, j);
    };

    const double sstot = std::max(0.0, g_(target, target) -
                                           sum_[target] * sum_[target] / mc);
    if (nb == 0) {
        out.r2 = 0.0;
        return out;
    }

    Mat gbb(nb, nb);
    Vec gbt(nb);
    for (long i = 0; i < nb; ++i) {
        gbt[i] = cross(basis[static_cast<size_t>(i)], target);
        for (long j = 0; j < nb; ++j)
            gbb(i, j) = cross(basis[static_cast<size_t>(i)], basis[static_cast<size_t>(j)]);
    }
    Vec beta = gbb.ldlt().solve(gbt);
    if (!beta.allFinite()) beta.setZero();

    const double gtt = centered ? sstot : g_(target, target);
    double ssres = gtt - 2.0 * beta.dot(gbt) + beta.dot(gbb * beta);
    ssres = std::max(0.0, ssres);
    out.r2 = sstot > 0 ? std::clamp(1.0 - ssres / sstot, 0.0, 1.0)
                       : (ssres == 0.0 ? 1.0 : 0.0);

    out.betas.resize(nb);
    double mean_sum = 0.0;
    for (long i = 0; i < nb; ++i) {
        const long col = basis[static_cast<size_t>(i)];
        out.betas[i] = beta[i] * scale_[target] / scale_[col];
        mean_sum += beta[i] * sum_[col];
    }
    if (centered)
        out.intercept = (sum_[target] - mean_sum) / mc * scale_[target];
    return out;
}

double ColumnGram::leave_one_out_r2(const std::vector<long>& active, long target,
                                    bool centered) const {
    std::vector<long> basis;
    basis.reserve(active.size());
    for (long i : active)
        if (i != target) basis.push_back(i);
    return fit(basis, target, centered).r2;
}

}  // namespace dynfit
