#include "dynfit/evolve.hpp"

#include "dynfit/fft.hpp"
#include "dynfit/integrate.hpp"

namespace dynfit {

Vec initial_condition_estimate(const Trajectory& traj, const WeightVector& weights,
                               long k, long offset) {
    if (k < 1 || offset < 0 || offset + k > traj.n())
        throw std::invalid_argument("invalid neighborhood for IC estimate");
    Vec ic(traj.dim());
    for (int j = 0; j < traj.dim(); ++j) {
        double acc = 0, wsum = 0;
        for (long t = offset; t < offset + k; ++t) {
            acc += weights.w(t, j) * traj.values(t, j);
            wsum += weights.w(t, j);
        }
        if (wsum > 0) {
            ic[j] = acc / wsum;
        } else {
            ic[j] = traj.values.block(offset, j, k, 1).mean();
        }
    }
    return ic;
}

EvolveOutcome evolve_model(const SparseModel& model, const Vec& ic, double t0, double dt,
                           long n, const EvolutionLimits& limits) {
    if (!model.finite()) throw std::invalid_argument("model coefficients must be finite");
    IntegratorOptions opts;
    opts.abs_tol = limits.abs_tol;
    opts.rel_tol = limits.rel_tol;
    opts.state_bound = limits.state_bound;
    opts.max_steps = limits.max_steps;
    opts.wall_clock_cap = limits.wall_clock_cap;

    Rhs rhs = [&model](double, const double* x, double* dxdt) { model.rhs(x, dxdt); };

    EvolveOutcome out;
    out.pred.t0 = t0;
    out.pred.dt = dt;
    IntegrationStatus status = integrate_sampled(rhs, ic, t0, dt, n, out.pred.values, opts);
    out.ok = status.ok;
    out.last_valid = status.last_valid;
    switch (status.failure) {
        case IntegrationFailure::none: out.failure = EvolveFailure::none; break;
        case IntegrationFailure::diverged: out.failure = EvolveFailure::diverged; break;
        case IntegrationFailure::stiff: out.failure = EvolveFailure::stiff; break;
        case IntegrationFailure::timeout: out.failure = EvolveFailure::timeout; break;
    }
    return out;
}

namespace {

constexpr int kHistBins = 50;

Vec histogram_counts(const Eigen::Ref<const Vec>& v, double lo, double hi) {
    Vec counts = Vec::Zero(kHistBins);
    if (hi <= lo) {
        counts[0] = static_cast<double>(v.size());
        return counts;
    }
    const double width = (hi - lo) / kHistBins;
    for (long t = 0; t < v.size(); ++t) {
        long bin = static_cast<long>((v[t] - lo) / width);
        bin = std::clamp<long>(bin, 0, kHistBins - 1);
        counts[bin] += 1.0;
    }
    return counts;
}

}  // namespace

FomSuite fom_metrics(const Trajectory& pred, const Trajectory& noisy_ref,
                     const Trajectory& smoothed_ref, const Mat& noise_std_local) {
    const long n = pred.n();
    const int dim = pred.dim();
    if (noisy_ref.n() != n || smoothed_ref.n() != n || noise_std_local.rows() != n)
        throw std::invalid_argument("fom_metrics grid mismatch");

    FomSuite fom;
    fom.evolution_ok = true;
    fom.in_bounds_frac.resize(dim);
    fom.in_envelope_frac.resize(dim);
    fom.std_rel_err.resize(dim);
    fom.fft_power_corr.resize(dim);
    fom.hist_corr.resize(dim);

    for (int j = 0; j < dim; ++j) {
        const auto p = pred.values.col(j);
        const auto noisy = noisy_ref.values.col(j);
        const auto smoothed = smoothed_ref.values.col(j);

        const double ref_lo = noisy.minCoeff(), ref_hi = noisy.maxCoeff();
        const double margin = 0.1 * (ref_hi - ref_lo);
        long in_bounds = 0, in_env = 0;
        for (long t = 0; t < n; ++t) {
            if (p[t] >= ref_lo - margin && p[t] <= ref_hi + margin) ++in_bounds;
            if (std::abs(p[t] - smoothed[t]) <= 2.0 * noise_std_local(t, j)) ++in_env;
        }
        fom.in_bounds_frac[j] = static_cast<double>(in_bounds) / static_cast<double>(n);
        fom.in_envelope_frac[j] = static_cast<double>(in_env) / static_cast<double>(n);

        const double sp = stddev(p), sr = stddev(smoothed);
        if (sr > 0) {
            fom.std_rel_err[j] = (sp - sr) / sr;
        } else {
            fom.std_rel_err[j] = sp == 0 ? 0.0 : std::numeric_limits<double>::infinity();
        }

        fom.fft_power_corr[j] = pearson(fft::power_spectrum(p), fft::power_spectrum(smoothed));

        const double lo = std::min(p.minCoeff(), smoothed.minCoeff());
        const double hi = std::max(p.maxCoeff(), smoothed.maxCoeff());
        fom.hist_corr[j] =
            pearson(histogram_counts(p, lo, hi), histogram_counts(smoothed, lo, hi));
    }
    return fom;
}

FomSuite compute_foms(const SparseModel& model, const Trajectory& noisy_ref,
                      const Trajectory& smoothed_ref, const Mat& noise_std_local,
                      const WeightVector& weights, const EvolutionLimits& limits,
                      int n_repeats, long ic_k) {
    const long n = noisy_ref.n();
    const int dim = noisy_ref.dim();
    if (n_repeats < 1) n_repeats = 1;

    std::vector<Trajectory> evolutions;
    bool repeats_ok = true;
    for (int r = 0; r < n_repeats; ++r) {
        const long offset = 2 * r;
        if (offset + ic_k > n) break;
        const Vec ic = initial_condition_estimate(noisy_ref, weights, ic_k, offset);
        EvolveOutcome out = evolve_model(model, ic, noisy_ref.t0, noisy_ref.dt, n, limits);
        if (r == 0 && !out.ok) {
            FomSuite failed;
            failed.evolution_ok = false;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            failed.in_bounds_frac = Vec::Constant(dim, nan);
            failed.in_envelope_frac = Vec::Constant(dim, nan);
            failed.std_rel_err = Vec::Constant(dim, nan);
            failed.fft_power_corr = Vec::Constant(dim, nan);
            failed.hist_corr = Vec::Constant(dim, nan);
            return failed;
        }
        if (!out.ok) {
            repeats_ok = false;
            break;
        }
        evolutions.push_back(std::move(out.pred));
    }

    FomSuite fom = fom_metrics(evolutions[0], noisy_ref, smoothed_ref, noise_std_local);
    if (!repeats_ok) {
        fom.stability = std::numeric_limits<double>::infinity();
    } else if (evolutions.size() == 1) {
        fom.stability = 0.0;
    } else {
        double worst = 0.0;
        for (size_t a = 0; a < evolutions.size(); ++a)
            for (size_t b = a + 1; b < evolutions.size(); ++b)
                worst = std::max(worst, relative_rms_deviation(evolutions[a].values,
                                                               evolutions[b].values));
        fom.stability = worst;
    }
    return fom;
}

double relative_rms_deviation(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("shape mismatch");
    const double denom = static_cast<double>(a.size());
    const double rms_a = std::sqrt(a.squaredNorm() / denom);
    const double rms_b = std::sqrt(b.squaredNorm() / denom);
    const double rms_d = std::sqrt((a - b).squaredNorm() / denom);
    return rms_d / std::max({rms_a, rms_b, 1e-12});
}

}  // namespace dynfit
