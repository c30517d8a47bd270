#include "dynfit/preprocess.hpp"

#include <cmath>

namespace dynfit {

long default_window_len(double dt) {
    long w = static_cast<long>(std::llround(0.05 / dt));
    if (w < 1) w = 1;
    if (w % 2 == 0) w += 1;
    return w;
}

namespace {

Vec hamming_window(long len) {
    Vec w(len);
    if (len == 1) {
        w[0] = 1.0;
        return w;
    }
    for (long i = 0; i < len; ++i)
        w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                      static_cast<double>(len - 1));
    w /= w.sum();
    return w;
}

// Reflection about the edge sample (numpy 'reflect'): index -k maps to k,
// index n-1+k maps to n-1-k.
long reflect_index(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

}  // namespace

Trajectory smooth(const Trajectory& traj, const SmoothingConfig& cfg) {
    traj.validate();
    const long n = traj.n();
    if (cfg.window_len < 1 || cfg.window_len % 2 == 0)
        throw std::invalid_argument("window_len must be odd and >= 1");
    if (cfg.window_len > n)
        throw WindowTooLong("window_len " + std::to_string(cfg.window_len) +
                            " exceeds " + std::to_string(n) + " timepoints");

    const Vec kernel = hamming_window(cfg.window_len);
    const long half = cfg.window_len / 2;

    Trajectory out;
    out.t0 = traj.t0;
    out.dt = traj.dt;
    out.values.resize(n, traj.dim());
    for (int j = 0; j < traj.dim(); ++j) {
        for (long t = 0; t < n; ++t) {
            double acc = 0.0;
            for (long k = -half; k <= half; ++k)
                acc += kernel[k + half] * traj.values(reflect_index(t + k, n), j);
            out.values(t, j) = acc;
        }
    }
    return out;
}

Mat estimate_derivatives(const Trajectory& traj) {
    traj.validate();
    const long n = traj.n();
    const double h = traj.dt;
    Mat d(n, traj.dim());
    for (int j = 0; j < traj.dim(); ++j) {
        const auto x = traj.values.col(j);
        d(0, j) = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h);
        d(1, j) = (-3.0 * x[1] + 4.0 * x[2] - x[3]) / (2.0 * h);
        for (long t = 2; t < n - 2; ++t)
            d(t, j) = (-x[t + 2] + 8.0 * x[t + 1] - 8.0 * x[t - 1] + x[t - 2]) / (12.0 * h);
        d(n - 2, j) = (3.0 * x[n - 2] - 4.0 * x[n - 3] + x[n - 4]) / (2.0 * h);
        d(n - 1, j) = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * h);
    }
    return d;
}

WeightVector timepoint_weights(const Trajectory& noisy, long halfwidth, double z_floor) {
    noisy.validate();
    if (halfwidth < 2) throw std::invalid_argument("halfwidth must be >= 2");
    const long n = noisy.n();
    WeightVector out;
    out.w.resize(n, noisy.dim());

    std::vector<double> resid;
    for (int j = 0; j < noisy.dim(); ++j) {
        const auto x = noisy.values.col(j);
        for (long t = 0; t < n; ++t) {
            const long lo = std::max<long>(0, t - halfwidth);
            const long hi = std::min<long>(n - 1, t + halfwidth);
            const long m = hi - lo + 1;

            // Line fit over the window; the rotation to the horizontal axis
            // scales all residuals equally, so it cancels in the z-score.
            double ss = 0, sx = 0, sxx = 0, sxy = 0, sy = 0;
            for (long s = lo; s <= hi; ++s) {
                const double xs = static_cast<double>(s - lo);
                ss += 1;
                sx += xs;
                sxx += xs * xs;
                sy += x[s];
                sxy += xs * x[s];
            }
            const double det = ss * sxx - sx * sx;
            double slope = 0, intercept = sy / ss;
            if (det != 0) {
                slope = (ss * sxy - sx * sy) / det;
                intercept = (sy - slope * sx) / ss;
            }

            resid.clear();
            resid.reserve(static_cast<size_t>(m));
            double sum_sq = 0;
            double value_scale = 0;
            for (long s = lo; s <= hi; ++s) {
                const double r = x[s] - (intercept + slope * static_cast<double>(s - lo));
                resid.push_back(r);
                sum_sq += r * r;
                value_scale = std::max(value_scale, std::abs(x[s]));
            }
            const double sigma = std::sqrt(sum_sq / static_cast<double>(m));
            // residuals at the rounding floor mean an (effectively) collinear window
            const double degenerate = 1e-12 * std::max(1.0, value_scale);
            const double r_center = resid[static_cast<size_t>(t - lo)];
            double z = sigma > degenerate ? std::abs(r_center) / sigma : 0.0;
            z = std::max(z, z_floor);
            out.w(t, j) = std::log(1.0 / z + 1.0);
        }
    }
    return out;
}

WeightVector derivative_weights(const WeightVector& w) {
    const long n = w.w.rows();
    WeightVector out;
    out.w.resize(n, w.w.cols());
    static const long stencil[4] = {-2, -1, 1, 2};
    for (int j = 0; j < w.w.cols(); ++j) {
        for (long t = 0; t < n; ++t) {
            double acc = 0;
            long count = 0;
            for (long off : stencil) {
                const long s = t + off;
                if (s < 0 || s >= n) continue;
                acc += w.w(s, j);
                ++count;
            }
            out.w(t, j) = count > 0 ? acc / static_cast<double>(count) : w.w(t, j);
        }
    }
    return out;
}

Mat rolling_noise_std(const Trajectory& noisy, const Trajectory& smoothed, long window_len) {
    if (noisy.n() != smoothed.n() || noisy.dim() != smoothed.dim())
        throw std::invalid_argument("trajectory shape mismatch");
    const long n = noisy.n();
    const long half = std::max<long>(1, window_len / 2);
    Mat out(n, noisy.dim());
    for (int j = 0; j < noisy.dim(); ++j) {
        const Vec r = noisy.values.col(j) - smoothed.values.col(j);
        // prefix sums for O(n) windows
        Vec cs(n + 1), cs2(n + 1);
        cs[0] = cs2[0] = 0;
        for (long t = 0; t < n; ++t) {
            cs[t + 1] = cs[t] + r[t];
            cs2[t + 1] = cs2[t] + r[t] * r[t];
        }
        for (long t = 0; t < n; ++t) {
            const long lo = std::max<long>(0, t - half);
            const long hi = std::min<long>(n - 1, t + half);
            const double m = static_cast<double>(hi - lo + 1);
            const double mean = (cs[hi + 1] - cs[lo]) / m;
            const double var = (cs2[hi + 1] - cs2[lo]) / m - mean * mean;
            out(t, j) = std::sqrt(std::max(0.0, var));
        }
    }
    return out;
}

}  // namespace dynfit
