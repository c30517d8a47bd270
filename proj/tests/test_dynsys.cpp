#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynfit/dynsys.hpp"

using namespace dynfit;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("lorenz simulation matches the benchmark setup") {
    SystemSpec sys = make_system("lorenz");
    Trajectory traj = simulate(sys, v3(-8, 8, 27), 10.0, 0.002);
    CHECK(traj.n() == 5001);
    CHECK(traj.dim() == 3);
    CHECK(traj.values.allFinite());
    REQUIRE(traj.clean_ref.has_value());
    CHECK(traj.clean_ref->isApprox(traj.values));
    // stays on the attractor
    CHECK(traj.values.col(2).minCoeff() > 0.0);
    CHECK(traj.values.cwiseAbs().maxCoeff() < 60.0);
}

TEST_CASE("zero dynamics gives a constant trajectory") {
    SystemSpec sys = make_system("lorenz");
    sys.true_model.lib.deactivate_all();
    sys.true_model.coef.setZero();
    Trajectory traj = simulate(sys, v3(1, 2, 3), 1.0, 0.01);
    for (long t = 0; t < traj.n(); ++t) {
        CHECK(traj.values(t, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(traj.values(t, 1) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(traj.values(t, 2) == doctest::Approx(3.0).epsilon(1e-14));
    }
}

TEST_CASE("linear3d z decays as the closed-form exponential") {
    SystemSpec sys = make_system("linear3d");
    Trajectory traj = simulate(sys, v3(0, 0, 1), 1.0, 0.002);
    const double expected = std::exp(-0.3);  // dz/dt = -0.3 z
    CHECK(std::abs(traj.values(traj.n() - 1, 2) - expected) < 1e-6);
}

TEST_CASE("simulate rejects bad arguments and bounds divergence") {
    SystemSpec sys = make_system("lorenz");
    CHECK_THROWS_AS(simulate(sys, v3(1, 2, 3), 0.001, 0.002), std::invalid_argument);
    Vec short_ic(2);
    short_ic << 1, 2;
    CHECK_THROWS_AS(simulate(sys, short_ic, 1.0, 0.002), std::invalid_argument);

    // dx/dt = x^2 escapes to the bound in finite time
    auto lib = build_polynomial_library(1, 2, false);
    SystemSpec blow;
    blow.name = "blow";
    blow.dim = 1;
    blow.true_model = make_model(lib, {{0, {2}, 1.0}});
    Vec one(1);
    one << 10.0;
    CHECK_THROWS_AS(simulate(blow, one, 5.0, 0.001), IntegrationDiverged);
}

TEST_CASE("zero target noise returns the input unchanged") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 2.0, 0.002);
    Trajectory noisy = add_noise(clean, NoiseSpec{0.0, 42, false});
    CHECK(noisy.values == clean.values);
}

TEST_CASE("noise injection is calibrated and deterministic") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 2.0, 0.002);

    Trajectory a = add_noise(clean, NoiseSpec{50.0, 7, false});
    Trajectory b = add_noise(clean, NoiseSpec{50.0, 7, false});
    CHECK(a.values == b.values);  // same seed, bit-identical

    Trajectory c = add_noise(clean, NoiseSpec{50.0, 8, false});
    CHECK(a.values != c.values);

    const Vec level = measure_noise_level(a, clean);
    for (int j = 0; j < 3; ++j) CHECK(level[j] == doctest::Approx(50.0).epsilon(0.02));

    REQUIRE(a.clean_ref.has_value());
    CHECK(a.clean_ref->isApprox(clean.values));
}

TEST_CASE("noise calibration holds from 25 to 300 percent") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 2.0, 0.002);
    for (double target : {25.0, 50.0, 100.0, 200.0, 300.0}) {
        for (bool hermitian : {false, true}) {
            Trajectory noisy = add_noise(clean, NoiseSpec{target, 3, hermitian});
            const Vec level = measure_noise_level(noisy, clean);
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(level[j] - target) / target <= 0.02);
        }
    }
}

TEST_CASE("measure_noise_level matches a direct computation") {
    Trajectory clean;
    clean.t0 = 0;
    clean.dt = 0.1;
    const long n = 400;
    clean.values.resize(n, 1);
    for (long t = 0; t < n; ++t) clean.values(t, 0) = std::sin(0.37 * t);

    // deterministic perturbation with a known sample deviation
    Trajectory noisy = clean;
    for (long t = 0; t < n; ++t)
        noisy.values(t, 0) += 0.5 * ((t % 2 == 0) ? 1.0 : -1.0);

    const Vec diff = noisy.values.col(0) - clean.values.col(0);
    const double expected = 100.0 * stddev(diff) / stddev(clean.values.col(0));
    const Vec level = measure_noise_level(noisy, clean);
    CHECK(level[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected > 40.0);  // sanity: roughly 0.5 / sigma(sin)

    CHECK(measure_noise_level(clean, clean)[0] == 0.0);

    Trajectory constant = clean;
    constant.values.setConstant(2.0);
    CHECK_THROWS_AS(measure_noise_level(noisy, constant), DegenerateReference);
}

TEST_CASE("simulation order: halving dt barely moves a smooth system") {
    SystemSpec sys = make_system("linear3d");
    Trajectory coarse = simulate(sys, v3(2, 0, 1), 1.0, 0.002);
    Trajectory fine = simulate(sys, v3(2, 0, 1), 1.0, 0.001);
    const Vec end_coarse = coarse.values.row(coarse.n() - 1).transpose();
    const Vec end_fine = fine.values.row(fine.n() - 1).transpose();
    CHECK((end_coarse - end_fine).norm() / end_fine.norm() <= 1e-8);
}

TEST_CASE("system registry") {
    for (const auto& name : system_names()) {
        SystemSpec sys = make_system(name);
        CHECK(sys.dim >= 2);
        CHECK(!sys.train_ics.empty());
        CHECK(!sys.holdout_ics.empty());
        Vec state = Vec::Constant(sys.dim, 0.7);
        CHECK(sys.true_model.rhs(state).allFinite());
    }
    CHECK_THROWS_AS(make_system("nope"), ConfigError);
}
