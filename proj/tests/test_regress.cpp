#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dynfit/dynsys.hpp"
#include "dynfit/preprocess.hpp"
#include "dynfit/regress.hpp"
#include "dynfit/rng.hpp"

using namespace dynfit;

namespace {

// Independent oracle: weighted normal equations.
Vec normal_equation_fit(const Mat& x, const Vec& y, const Vec& w) {
    Mat xtwx = x.transpose() * w.asDiagonal() * x;
    Vec xtwy = x.transpose() * w.asDiagonal() * y;
    return xtwx.ldlt().solve(xtwy);
}

Mat random_features(long n, long k, uint64_t seed) {
    Rng rng(seed);
    Mat x(n, k);
    for (long t = 0; t < n; ++t)
        for (long i = 0; i < k; ++i) x(t, i) = rng.normal();
    return x;
}

std::vector<uint8_t> all_on(long n) { return std::vector<uint8_t>(static_cast<size_t>(n), 1); }

}  // namespace

TEST_CASE("subset selection") {
    RegressionConfig cfg;
    cfg.seed = 5;
    cfg.n_subsets = 17;
    cfg.subset_fraction = 0.7;

    auto subsets = select_subsets(1000, 10, cfg);
    REQUIRE(subsets.size() == 17);
    for (const auto& s : subsets) {
        CHECK(s.size() == 700);
        std::set<long> unique(s.begin(), s.end());
        CHECK(unique.size() == 700);
        CHECK(*unique.begin() >= 0);
        CHECK(*unique.rbegin() < 1000);
    }

    auto again = select_subsets(1000, 10, cfg);
    CHECK(subsets == again);  // determinism

    cfg.subset_fraction = 1.0;
    auto full = select_subsets(50, 3, cfg);
    for (const auto& s : full) {
        REQUIRE(s.size() == 50);
        for (long t = 0; t < 50; ++t) CHECK(s[static_cast<size_t>(t)] == t);
    }

    cfg.subset_fraction = 0.1;
    CHECK_THROWS_AS(select_subsets(100, 20, cfg), SubsetTooSmall);
}

TEST_CASE("extreme ratio exclusion") {
    {
        Mat theta(3, 1);
        theta << 100, 0.001, 5;
        auto keep = exclude_extreme_ratio(theta, 30.0);
        CHECK(keep == std::vector<uint8_t>{1, 1, 1});  // single column keeps all
    }
    {
        Mat theta(2, 2);
        theta << 10, 0.1, 3, 2;
        auto keep = exclude_extreme_ratio(theta, 30.0);
        CHECK(keep[0] == 0);  // ratio 100
        CHECK(keep[1] == 1);  // ratio 1.5
    }
    {
        Mat theta(1, 3);
        theta << 3, 2, 1;
        CHECK(exclude_extreme_ratio(theta, 30.0)[0] == 1);
    }
}

TEST_CASE("fit matches the normal-equation oracle without the fft block") {
    const long n = 400, k = 2;
    Mat f = random_features(n, k, 3);
    Vec y = 2.0 * f.col(0) + 3.0 * f.col(1);
    Vec w = Vec::Ones(n);
    RegressionConfig cfg;
    cfg.fft_block_scale = 0.0;

    Vec xi = fit_coefficients(f, y, w, all_on(n), cfg);
    CHECK(xi[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(xi[1] == doctest::Approx(3.0).epsilon(1e-8));

    // inconsistent target, non-uniform weights
    Rng rng(9);
    for (long t = 0; t < n; ++t) y[t] += 0.3 * rng.normal();
    for (long t = 0; t < n; ++t) w[t] = 0.2 + rng.uniform01();
    Vec ours = fit_coefficients(f, y, w, all_on(n), cfg);
    Vec oracle = normal_equation_fit(f, y, w);
    CHECK((ours - oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("complex fft mode reproduces the time-domain fit") {
    const long n = 512, k = 3;
    Mat f = random_features(n, k, 4);
    Vec y = 1.5 * f.col(0) - 0.5 * f.col(1) + 2.25 * f.col(2);  // consistent system
    Vec w = Vec::Ones(n);

    RegressionConfig time_only;
    time_only.fft_block_scale = 0.0;
    RegressionConfig complex_mode;
    complex_mode.fft_mode = FftMode::complex_coeffs;
    complex_mode.fft_block_scale = 1.0;

    Vec a = fit_coefficients(f, y, w, all_on(n), time_only);
    Vec b = fit_coefficients(f, y, w, all_on(n), complex_mode);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("single-functional targets are recovered exactly in every mode") {
    const long n = 256;
    Mat f = random_features(n, 1, 5);
    Vec w = Vec::Ones(n);
    for (double coef : {4.2, -4.2}) {
        Vec y = coef * f.col(0);
        for (FftMode mode : {FftMode::complex_coeffs, FftMode::real_part,
                             FftMode::magnitude, FftMode::power}) {
            RegressionConfig cfg;
            cfg.fft_mode = mode;
            Vec xi = fit_coefficients(f, y, w, all_on(n), cfg);
            CHECK(xi[0] == doctest::Approx(coef).epsilon(1e-8));
        }
    }
}

TEST_CASE("scale equivariance in every mode") {
    const long n = 300, k = 3;
    Mat f = random_features(n, k, 6);
    Rng rng(7);
    Vec y = 0.7 * f.col(0) + 1.9 * f.col(1) - 1.1 * f.col(2);
    for (long t = 0; t < n; ++t) y[t] += 0.2 * rng.normal();
    Vec w(n);
    for (long t = 0; t < n; ++t) w[t] = 0.5 + rng.uniform01();

    for (FftMode mode : {FftMode::complex_coeffs, FftMode::real_part, FftMode::magnitude,
                         FftMode::power}) {
        RegressionConfig cfg;
        cfg.fft_mode = mode;
        Vec base = fit_coefficients(f, y, w, all_on(n), cfg);
        const double c = 13.7;
        Mat scaled = f;
        scaled.col(1) *= c;
        Vec shifted = fit_coefficients(scaled, y, w, all_on(n), cfg);
        CHECK(shifted[0] == doctest::Approx(base[0]).epsilon(1e-8));
        CHECK(shifted[1] * c == doctest::Approx(base[1]).epsilon(1e-8));
        CHECK(shifted[2] == doctest::Approx(base[2]).epsilon(1e-8));
    }
}

TEST_CASE("zero weight equals exclusion from the fit") {
    const long n = 200;
    Mat f = random_features(n, 2, 8);
    Rng rng(12);
    Vec y = f.col(0) - 2.0 * f.col(1);
    for (long t = 0; t < n; ++t) y[t] += 0.1 * rng.normal();
    Vec w = Vec::Ones(n);

    Vec w_zeroed = w;
    w_zeroed[17] = 0.0;
    auto mask = all_on(n);
    mask[17] = 0;

    RegressionConfig cfg;
    Vec via_weight = fit_coefficients(f, y, w_zeroed, all_on(n), cfg);
    Vec via_mask = fit_coefficients(f, y, w, mask, cfg);
    CHECK(via_weight == via_mask);  // identical inclusion path
}

TEST_CASE("rank deficiency is detected") {
    const long n = 100;
    Mat f = random_features(n, 2, 10);
    Mat dup(n, 3);
    dup << f.col(0), f.col(1), f.col(0);
    Vec y = f.col(0) + f.col(1);
    Vec w = Vec::Ones(n);
    RegressionConfig cfg;
    cfg.fft_block_scale = 0.0;
    CHECK_THROWS_AS(fit_coefficients(dup, y, w, all_on(n), cfg), RankDeficient);
}

TEST_CASE("ensemble medians") {
    const long n = 600;
    Mat f = random_features(n, 2, 13);
    Vec y = 2.0 * f.col(0) + 3.0 * f.col(1);
    Vec w = Vec::Ones(n);
    RegressionConfig cfg;
    cfg.seed = 21;
    cfg.fft_block_scale = 0.0;

    CoefficientEnsemble ens = ensemble_fit(f, y, w, cfg);
    REQUIRE(ens.draws.rows() == 17);
    // noise-free: every draw equals the median
    for (long d = 0; d < ens.draws.rows(); ++d) {
        CHECK(ens.draws(d, 0) == doctest::Approx(ens.median[0]).epsilon(1e-10));
        CHECK(ens.draws(d, 1) == doctest::Approx(ens.median[1]).epsilon(1e-10));
    }
    CHECK(ens.median[0] == doctest::Approx(2.0).epsilon(1e-8));

    CHECK(median({1.0, 2.0, 100.0}) == doctest::Approx(2.0));
    CHECK(median({4.0, 1.0}) == doctest::Approx(2.5));
}

TEST_CASE("ensemble median beats the worst draw on noisy lorenz z") {
    SystemSpec sys = make_system("lorenz");
    Trajectory clean = simulate(sys, sys.train_ics[0], 2.0, 0.002);

    auto lib = build_polynomial_library(3, 2, true);
    const long term_z = lib.find_term({0, 0, 1});
    const long term_xy = lib.find_term({1, 1, 0});

    for (uint64_t seed = 0; seed < 20; ++seed) {
        Trajectory noisy = add_noise(clean, NoiseSpec{50.0, 100 + seed, false});
        Trajectory smoothed = smooth(noisy, SmoothingConfig{25});
        Mat derivs = estimate_derivatives(smoothed);
        Mat theta = evaluate_library(lib, smoothed.values);

        Mat f(theta.rows(), 2);
        f << theta.col(term_z), theta.col(term_xy);
        Vec w = derivative_weights(timepoint_weights(noisy, 12, 0.1)).w.col(2);

        RegressionConfig cfg;
        cfg.seed = seed;
        CoefficientEnsemble ens = ensemble_fit(f, derivs.col(2), w, cfg);

        const double med_err = std::abs(ens.median[1] - 1.0);
        double worst = 0;
        for (long d = 0; d < ens.draws.rows(); ++d)
            worst = std::max(worst, std::abs(ens.draws(d, 1) - 1.0));
        CHECK(med_err <= worst);
    }
}

TEST_CASE("column gram leave-one-out r2") {
    const long n = 500;
    Mat f = random_features(n, 3, 30);
    Mat theta(n, 4);
    theta << f.col(0), f.col(1), f.col(2), 2.0 * f.col(0) - f.col(1);

    ColumnGram gram(theta, {});
    // column 3 is an exact combination of 0 and 1
    CHECK(gram.leave_one_out_r2({0, 1, 3}, 3) == doctest::Approx(1.0).epsilon(1e-9));
    // independent gaussian columns are mutually orthogonal
    CHECK(gram.leave_one_out_r2({0, 1, 2}, 2) < 0.1);

    auto fit = gram.fit({0, 1}, 3, true);
    CHECK(fit.betas[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(fit.betas[1] == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}
