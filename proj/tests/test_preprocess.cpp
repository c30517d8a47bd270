#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynfit/dynsys.hpp"
#include "dynfit/preprocess.hpp"

using namespace dynfit;

namespace {

Trajectory series(const std::vector<double>& values, double dt = 0.002) {
    Trajectory traj;
    traj.t0 = 0;
    traj.dt = dt;
    traj.values.resize(static_cast<long>(values.size()), 1);
    for (size_t t = 0; t < values.size(); ++t) traj.values(static_cast<long>(t), 0) = values[t];
    return traj;
}

Trajectory sampled(double (*f)(double), long n, double dt) {
    Trajectory traj;
    traj.t0 = 0;
    traj.dt = dt;
    traj.values.resize(n, 1);
    for (long t = 0; t < n; ++t) traj.values(t, 0) = f(t * dt);
    return traj;
}

// Reference convolution: unit-sum Hamming, reflect padding, written
// independently of the implementation.
std::vector<double> naive_hamming_smooth(const std::vector<double>& x, long window) {
    const long n = static_cast<long>(x.size());
    const long half = window / 2;
    std::vector<double> kernel(static_cast<size_t>(window));
    double sum = 0;
    for (long i = 0; i < window; ++i) {
        kernel[static_cast<size_t>(i)] =
            window == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (window - 1));
        sum += kernel[static_cast<size_t>(i)];
    }
    for (auto& k : kernel) k /= sum;
    auto fetch = [&](long i) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i;
            if (i >= n) i = 2 * (n - 1) - i;
        }
        return x[static_cast<size_t>(i)];
    };
    std::vector<double> out(static_cast<size_t>(n));
    for (long t = 0; t < n; ++t) {
        double acc = 0;
        for (long k = -half; k <= half; ++k) acc += kernel[static_cast<size_t>(k + half)] * fetch(t + k);
        out[static_cast<size_t>(t)] = acc;
    }
    return out;
}

}  // namespace

TEST_CASE("window length default") {
    CHECK(default_window_len(0.002) == 25);
    CHECK(default_window_len(0.01) == 5);
    CHECK(default_window_len(1.0) == 1);
}

TEST_CASE("window 1 is the identity and constants are fixed points") {
    Trajectory traj = sampled([](double t) { return std::sin(3 * t) + t; }, 200, 0.002);
    Trajectory out = smooth(traj, SmoothingConfig{1});
    CHECK(out.values == traj.values);

    Trajectory constant = series(std::vector<double>(64, 3.25));
    Trajectory smoothed = smooth(constant, SmoothingConfig{11});
    for (long t = 0; t < smoothed.n(); ++t)
        CHECK(smoothed.values(t, 0) == doctest::Approx(3.25).epsilon(1e-14));

    CHECK_THROWS_AS(smooth(constant, SmoothingConfig{65}), WindowTooLong);
    CHECK_THROWS_AS(smooth(constant, SmoothingConfig{10}), std::invalid_argument);
}

TEST_CASE("smoothing matches the direct convolution oracle on a sine") {
    const long n = 2000;
    Trajectory traj = sampled([](double t) { return std::sin(2 * M_PI * t); }, n, 0.002);
    Trajectory out = smooth(traj, SmoothingConfig{101});
    std::vector<double> input(traj.values.col(0).data(), traj.values.col(0).data() + n);
    const auto expected = naive_hamming_smooth(input, 101);
    for (long t = 0; t < n; ++t)
        CHECK(out.values(t, 0) == doctest::Approx(expected[static_cast<size_t>(t)]).epsilon(1e-10));
    // interior attenuation is the window's frequency response at 1 Hz
    const double mid_in = traj.values(n / 2, 0);
    const double mid_out = out.values(n / 2, 0);
    CHECK(std::abs(mid_out) < std::abs(mid_in));
}

TEST_CASE("smoothing roughly preserves the mean") {
    const long n = 500;
    Trajectory traj = sampled([](double t) { return std::sin(7 * t) + 0.2 * t; }, n, 0.01);
    Trajectory out = smooth(traj, SmoothingConfig{25});
    const double range = traj.values.col(0).maxCoeff() - traj.values.col(0).minCoeff();
    CHECK(std::abs(out.values.col(0).mean() - traj.values.col(0).mean()) <=
          25.0 / static_cast<double>(n) * range);
}

TEST_CASE("derivatives: exact on linears, 4th order on cubics, tight on sine") {
    {
        Trajectory traj = sampled([](double t) { return 2.5 * t; }, 50, 0.01);
        Mat d = estimate_derivatives(traj);
        for (long t = 0; t < 50; ++t) CHECK(d(t, 0) == doctest::Approx(2.5).epsilon(1e-12));
    }
    {
        const double dt = 0.01;
        Trajectory traj = sampled([](double t) { return t * t * t; }, 200, dt);
        Mat d = estimate_derivatives(traj);
        for (long t = 2; t < 198; ++t) {
            const double x = t * dt;
            CHECK(d(t, 0) == doctest::Approx(3 * x * x).epsilon(1e-10));
        }
    }
    {
        const double dt = 0.002;
        Trajectory traj = sampled([](double t) { return std::sin(t); }, 1000, dt);
        Mat d = estimate_derivatives(traj);
        double worst = 0;
        for (long t = 2; t < 998; ++t)
            worst = std::max(worst, std::abs(d(t, 0) - std::cos(t * dt)));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("derivative estimates on clean lorenz match the analytic rhs") {
    SystemSpec sys = make_system("lorenz");
    Trajectory traj = simulate(sys, sys.train_ics[0], 4.0, 0.002);
    Mat est = estimate_derivatives(traj);
    Mat truth(traj.n(), 3);
    for (long t = 0; t < traj.n(); ++t)
        truth.row(t) = sys.true_model.rhs(traj.values.row(t).transpose()).transpose();
    const double rel = (est - truth).norm() / truth.norm();
    CHECK(rel <= 1e-4);
}

TEST_CASE("collinear windows hit the weight cap") {
    Trajectory traj = sampled([](double t) { return 4.0 - 3.0 * t; }, 64, 0.01);
    WeightVector w = timepoint_weights(traj, 5, 0.1);
    const double cap = std::log(1.0 / 0.1 + 1.0);
    for (long t = 0; t < traj.n(); ++t)
        CHECK(w.w(t, 0) == doctest::Approx(cap).epsilon(1e-9));
}

TEST_CASE("an outlier gets a lower weight than its neighbors") {
    // five-step recipe computed directly: window [0,0,5,0,0], center point is
    // the outlier
    Trajectory traj = series({0, 0, 5, 0, 0});
    WeightVector w = timepoint_weights(traj, 2, 0.1);
    CHECK(w.w(2, 0) < w.w(1, 0));
    CHECK(w.w(2, 0) < w.w(3, 0));

    // direct evaluation for the center point: line fit over the full window
    // is y = 1 (slope 0), residuals (-1,-1,4,-1,-1), sigma = sqrt(20/5),
    // z = 4/sigma, w = ln(1/z + 1)
    const double sigma = std::sqrt(20.0 / 5.0);
    const double z = 4.0 / sigma;
    CHECK(w.w(2, 0) == doctest::Approx(std::log(1.0 / z + 1.0)).epsilon(1e-12));
}

TEST_CASE("weights stay finite and nonnegative at 300 percent noise") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 2.0, 0.002);
    Trajectory noisy = add_noise(clean, NoiseSpec{300.0, 5, false});
    WeightVector w = timepoint_weights(noisy, 12, 0.1);
    CHECK(w.w.allFinite());
    CHECK(w.w.minCoeff() >= 0.0);
    for (int j = 0; j < 3; ++j) CHECK(w.w.col(j).maxCoeff() > 0.0);
}

TEST_CASE("weights are invariant under a global linear trend") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 1.0, 0.002);
    Trajectory noisy = add_noise(clean, NoiseSpec{100.0, 5, false});
    WeightVector base = timepoint_weights(noisy, 10, 0.1);

    Trajectory trended = noisy;
    for (long t = 0; t < trended.n(); ++t)
        for (int j = 0; j < 3; ++j) trended.values(t, j) += 3.0 + 11.0 * t * trended.dt;
    WeightVector shifted = timepoint_weights(trended, 10, 0.1);

    double worst = 0;
    for (long t = 0; t < base.w.rows(); ++t)
        for (int j = 0; j < 3; ++j)
            worst = std::max(worst,
                             std::abs(shifted.w(t, j) - base.w(t, j)) / base.w(t, j));
    CHECK(worst <= 1e-8);
}

TEST_CASE("derivative weights combine the stencil") {
    {
        WeightVector w;
        w.w = Mat::Constant(20, 1, 0.7);
        WeightVector d = derivative_weights(w);
        for (long t = 0; t < 20; ++t) CHECK(d.w(t, 0) == doctest::Approx(0.7).epsilon(1e-14));
    }
    {
        WeightVector w;
        w.w.resize(5, 1);
        w.w << 0, 0, 9, 4, 4;  // center value must not contribute
        WeightVector d = derivative_weights(w);
        CHECK(d.w(2, 0) == doctest::Approx(2.0).epsilon(1e-14));
    }
    {
        WeightVector w;
        w.w = Mat::Constant(12, 1, 1.0);
        w.w(6, 0) = 0.0;
        WeightVector d = derivative_weights(w);
        long lowered = 0;
        for (long t = 0; t < 12; ++t)
            if (d.w(t, 0) < 1.0 - 1e-12) ++lowered;
        CHECK(lowered == 4);  // exactly the four stencil neighbors of t=6
        CHECK(d.w(6, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("rolling noise std tracks a known residual") {
    Trajectory noisy = series(std::vector<double>{1, -1, 1, -1, 1, -1, 1, -1, 1, -1});
    Trajectory smoothed = noisy;
    smoothed.values.setZero();
    Mat r = rolling_noise_std(noisy, smoothed, 5);
    // direct windowed population std of the residual
    for (long t = 2; t < 8; ++t) {
        double mean = 0, sq = 0;
        for (long s = t - 2; s <= t + 2; ++s) mean += noisy.values(s, 0);
        mean /= 5.0;
        for (long s = t - 2; s <= t + 2; ++s)
            sq += (noisy.values(s, 0) - mean) * (noisy.values(s, 0) - mean);
        CHECK(r(t, 0) == doctest::Approx(std::sqrt(sq / 5.0)).epsilon(1e-12));
    }
}
