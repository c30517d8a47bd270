#include "dynfit/dynsys.hpp"

#include "dynfit/fft.hpp"
#include "dynfit/rng.hpp"

namespace dynfit {

namespace {

Vec state3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Vec state2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

using Entry = std::tuple<int, std::vector<int>, double>;

SystemSpec lorenz() {
    SystemSpec sys;
    sys.name = "lorenz";
    sys.dim = 3;
    auto lib = build_polynomial_library(3, 2, true);
    sys.true_model = make_model(lib, {
        Entry{0, {1, 0, 0}, -10.0}, Entry{0, {0, 1, 0}, 10.0},
        Entry{1, {1, 0, 0}, 28.0},  Entry{1, {0, 1, 0}, -1.0}, Entry{1, {1, 0, 1}, -1.0},
        Entry{2, {0, 0, 1}, -2.67}, Entry{2, {1, 1, 0}, 1.0},
    });
    sys.train_ics = {state3(-8, 8, 27), state3(5, -7, 29), state3(-2, 7, 21)};
    sys.holdout_ics = {state3(8, 7, 15), state3(-6, 12, 25)};
    sys.default_duration = 10.0;
    return sys;
}

SystemSpec linear3d() {
    SystemSpec sys;
    sys.name = "linear3d";
    sys.dim = 3;
    auto lib = build_polynomial_library(3, 2, true);
    sys.true_model = make_model(lib, {
        Entry{0, {1, 0, 0}, -0.1}, Entry{0, {0, 1, 0}, -2.0},
        Entry{1, {1, 0, 0}, 2.0},  Entry{1, {0, 1, 0}, -0.1},
        Entry{2, {0, 0, 1}, -0.3},
    });
    sys.train_ics = {state3(2, 0, 1), state3(4, -1, 2), state3(3, 3, 3)};
    sys.holdout_ics = {state3(3, 1, 1), state3(9, 1, 3)};
    sys.default_duration = 24.0;
    return sys;
}

SystemSpec harm_linear() {
    SystemSpec sys;
    sys.name = "harm_linear";
    sys.dim = 2;
    auto lib = build_polynomial_library(2, 3, true);
    sys.true_model = make_model(lib, {
        Entry{0, {1, 0}, -0.1}, Entry{0, {0, 1}, 2.0},
        Entry{1, {1, 0}, -2.0}, Entry{1, {0, 1}, -0.1},
    });
    sys.train_ics = {state2(2, 0), state2(4, 1), state2(7, 1)};
    sys.holdout_ics = {state2(3, 2), state2(6, 3)};
    sys.default_duration = 28.0;
    return sys;
}

SystemSpec harm_cubic() {
    SystemSpec sys;
    sys.name = "harm_cubic";
    sys.dim = 2;
    auto lib = build_polynomial_library(2, 3, true);
    sys.true_model = make_model(lib, {
        Entry{0, {3, 0}, -0.1}, Entry{0, {0, 3}, 2.0},
        Entry{1, {3, 0}, -2.0}, Entry{1, {0, 3}, -0.1},
    });
    sys.train_ics = {state2(2, 0), state2(4, 1), state2(7, 1)};
    sys.holdout_ics = {state2(3, 2), state2(6, 3)};
    sys.default_duration = 28.0;
    return sys;
}

SystemSpec hopf2d() {
    SystemSpec sys;
    sys.name = "hopf2d";
    sys.dim = 2;
    auto lib = build_polynomial_library(2, 3, true);
    sys.true_model = make_model(lib, {
        Entry{0, {1, 0}, 0.2},  Entry{0, {0, 1}, 1.0},
        Entry{0, {3, 0}, -1.0}, Entry{0, {1, 2}, -1.0},
        Entry{1, {1, 0}, 1.0},  Entry{1, {0, 1}, 0.2},
        Entry{1, {2, 1}, -1.0}, Entry{1, {0, 3}, -1.0},
    });
    sys.train_ics = {state2(1, 0.75), state2(0.9, -0.1), state2(0.25, 1)};
    sys.holdout_ics = {state2(0.1, -0.75), state2(0.5, -0.5)};
    sys.default_duration = 16.0;
    return sys;
}

}  // namespace

SystemSpec make_system(const std::string& name) {
    if (name == "lorenz") return lorenz();
    if (name == "linear3d") return linear3d();
    if (name == "harm_linear") return harm_linear();
    if (name == "harm_cubic") return harm_cubic();
    if (name == "hopf2d") return hopf2d();
    throw ConfigError("unknown system: " + name);
}

std::vector<std::string> system_names() {
    return {"lorenz", "linear3d", "harm_linear", "harm_cubic", "hopf2d"};
}

Trajectory simulate(const SystemSpec& system, const Vec& ic, double duration, double dt,
                    const IntegratorOptions& opts) {
    if (dt <= 0) throw std::invalid_argument("dt must be > 0");
    if (duration < 5 * dt) throw std::invalid_argument("duration must be >= 5*dt");
    if (ic.size() != system.dim) throw std::invalid_argument("ic dimension mismatch");

    // +1e-9 guards the floor against dt values that are not exactly
    // representable (10/0.002 evaluates just below 5000).
    const long n = static_cast<long>(std::floor(duration / dt + 1e-9)) + 1;

    const SparseModel& model = system.true_model;
    Rhs rhs = [&model](double, const double* x, double* dxdt) { model.rhs(x, dxdt); };

    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = dt;
    IntegrationStatus status = integrate_sampled(rhs, ic, 0.0, dt, n, traj.values, opts);
    if (!status.ok)
        throw IntegrationDiverged(static_cast<double>(std::max(status.last_valid, 0L)) * dt);
    traj.clean_ref = traj.values;
    return traj;
}

Trajectory add_noise(const Trajectory& traj, const NoiseSpec& spec) {
    traj.validate();
    if (!std::isfinite(spec.target_level_pct) || spec.target_level_pct < 0)
        throw std::invalid_argument("noise target must be finite and >= 0");

    Trajectory out = traj;
    if (spec.target_level_pct == 0.0) return out;

    const long n = traj.n();
    Rng rng(spec.seed);
    for (int j = 0; j < traj.dim(); ++j) {
        // Unit-scale complex Gaussian on every frequency coefficient, then a
        // single linear rescale of the injected component to hit the target.
        fft::CVec noise(n);
        for (long k = 0; k < n; ++k)
            noise[k] = std::complex<double>(rng.normal(), rng.normal());
        if (spec.hermitian_symmetrize) {
            noise[0] = std::complex<double>(noise[0].real(), 0.0);
            if (n % 2 == 0)
                noise[n / 2] = std::complex<double>(noise[n / 2].real(), 0.0);
            for (long k = 1; k < (n + 1) / 2; ++k) noise[n - k] = std::conj(noise[k]);
        }
        const Vec eta = fft::inverse_real_part(noise);
        const double sigma_eta = stddev(eta);
        const double sigma_clean = stddev(traj.values.col(j));
        if (sigma_clean == 0.0)
            throw DegenerateReference("cannot calibrate noise on a constant variable");
        if (sigma_eta == 0.0) continue;
        const double scale = spec.target_level_pct / 100.0 * sigma_clean / sigma_eta;
        out.values.col(j) += scale * eta;
    }
    return out;
}

Vec measure_noise_level(const Trajectory& noisy, const Trajectory& clean) {
    if (noisy.n() != clean.n() || noisy.dim() != clean.dim())
        throw std::invalid_argument("trajectory shape mismatch");
    Vec levels(noisy.dim());
    for (int j = 0; j < noisy.dim(); ++j) {
        const double s_clean = stddev(clean.values.col(j));
        if (s_clean == 0.0)
            throw DegenerateReference("sigma of clean variable " + variable_name(j) +
                                      " is zero");
        const Vec diff = noisy.values.col(j) - clean.values.col(j);
        levels[j] = 100.0 * stddev(diff) / s_clean;
    }
    return levels;
}

}  // namespace dynfit
