#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dynfit/errors.hpp"

namespace dynfit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniformly sampled multivariate time-series, optionally paired with the
/// clean series it was derived from.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    Mat values;                    // n_timepoints x dim
    std::optional<Mat> clean_ref;  // same shape when present

    long n() const { return values.rows(); }
    int dim() const { return static_cast<int>(values.cols()); }
    double time_at(long i) const { return t0 + static_cast<double>(i) * dt; }

    void validate() const {
        if (dt <= 0.0) throw std::invalid_argument("trajectory dt must be > 0");
        if (n() < 5) throw std::invalid_argument("trajectory needs >= 5 timepoints");
        if (!values.allFinite()) throw std::invalid_argument("trajectory values must be finite");
        if (clean_ref && (clean_ref->rows() != values.rows() || clean_ref->cols() != values.cols()))
            throw std::invalid_argument("clean_ref shape mismatch");
    }
};

/// Population standard deviation (divide by N).
inline double stddev(const Eigen::Ref<const Vec>& v) {
    if (v.size() == 0) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size()));
}

/// Pearson correlation; returns exactly 1 for bitwise-identical inputs.
inline double pearson(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
    if (a.size() != b.size() || a.size() == 0) return 0.0;
    if (a == b) return 1.0;
    const double ma = a.mean(), mb = b.mean();
    const Vec da = a.array() - ma, db = b.array() - mb;
    const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (den == 0.0) return 0.0;
    double r = da.dot(db) / den;
    return std::clamp(r, -1.0, 1.0);
}

/// Exact median (average of the two middle elements for even counts).
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
}

/// Nearest-rank percentile of a sample (m in [0,100]).
inline double percentile_nearest_rank(std::vector<double> v, double m) {
    if (v.empty()) throw DegeneratePercentile("empty sample");
    std::sort(v.begin(), v.end());
    const double k = m / 100.0 * static_cast<double>(v.size());
    long rank = static_cast<long>(std::ceil(k));
    if (rank < 1) rank = 1;
    if (rank > static_cast<long>(v.size())) rank = static_cast<long>(v.size());
    return v[static_cast<size_t>(rank - 1)];
}

}  // namespace dynfit
