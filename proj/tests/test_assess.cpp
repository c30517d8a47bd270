#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynfit/assess.hpp"
#include "dynfit/dynsys.hpp"
#include "dynfit/preprocess.hpp"
#include "dynfit/rng.hpp"

using namespace dynfit;

namespace {

Mat gaussian(long n, long k, uint64_t seed) {
    Rng rng(seed);
    Mat m(n, k);
    for (long t = 0; t < n; ++t)
        for (long i = 0; i < k; ++i) m(t, i) = rng.normal();
    return m;
}

double entry_for(const ErrorTable& table, int var, long term) {
    for (const auto& e : table.entries)
        if (e.variable == var && e.term == term) {
            if (e.kind == ErrorEntry::Kind::missing)
                return std::numeric_limits<double>::infinity();
            return e.err_pct;
        }
    return -1.0;
}

}  // namespace

TEST_CASE("coefficient errors on identical models are zero") {
    SystemSpec sys = make_system("lorenz");
    ErrorTable table = coefficient_errors(sys.true_model, sys.true_model);
    CHECK(table.entries.size() == 7);  // the seven true terms, no extras
    for (const auto& e : table.entries) {
        CHECK(e.kind == ErrorEntry::Kind::error);
        CHECK(e.err_pct == doctest::Approx(0.0));
    }
    CHECK(table.max_rel_error() == doctest::Approx(0.0));
}

TEST_CASE("coefficient errors: percents, missing, extras") {
    auto lib = build_polynomial_library(1, 2, true);
    SparseModel truth = make_model(lib, {{0, {1}, -10.0}, {0, {2}, 2.0}});
    SparseModel got = make_model(lib, {{0, {1}, -10.13}, {0, {0}, 0.8}});

    ErrorTable table = coefficient_errors(got, truth);
    const long term_x = lib.find_term({1});
    const long term_x2 = lib.find_term({2});
    const long term_1 = lib.find_term({0});

    CHECK(entry_for(table, 0, term_x) == doctest::Approx(1.3));
    CHECK(std::isinf(entry_for(table, 0, term_x2)));  // missing true term
    bool extra_found = false;
    for (const auto& e : table.entries)
        if (e.term == term_1 && e.kind == ErrorEntry::Kind::extra) extra_found = true;
    CHECK(extra_found);
    CHECK(std::isinf(table.max_rel_error()));
}

TEST_CASE("span reports flag in-span culled terms and essential retained terms") {
    const long n = 800;
    Mat base = gaussian(n, 2, 5);
    Mat theta(n, 3);
    theta << base.col(0), base.col(1), 3.0 * base.col(0) - 2.0 * base.col(1);

    FunctionalLibrary lib;
    lib.dim = 1;
    lib.terms = {FunctionalTerm{{1}}, FunctionalTerm{{2}}, FunctionalTerm{{3}}};
    lib.active.assign(1, {1, 1, 0});  // term 2 culled
    SparseModel model(lib);
    model.coef(0, 0) = 1.0;
    model.coef(0, 1) = 1.0;

    auto in_span = in_span_alternatives(model, {{0, 2}}, theta, {}, 0.95);
    REQUIRE(in_span.entries.size() == 1);
    CHECK(in_span.entries[0].r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(in_span.entries[0].alternative);
    CHECK(in_span.entries[0].betas[0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(in_span.entries[0].betas[1] == doctest::Approx(-2.0).epsilon(1e-6));

    auto loo = leave_one_out_redundancy(model, theta, {}, 0.95);
    REQUIRE(loo.entries.size() == 2);
    for (const auto& e : loo.entries) {
        CHECK(e.r2 < 0.2);  // independent columns: both essential
        CHECK(!e.alternative);
    }
}

TEST_CASE("identity transform for a correct discovery") {
    SystemSpec sys = make_system("lorenz");
    Trajectory traj = simulate(sys, sys.train_ics[0], 2.0, 0.002);
    Mat theta = evaluate_library(sys.true_model.lib, traj.values);

    TransformResult result =
        closest_to_true_transform(sys.true_model, sys.true_model, theta, {}, 0.95);
    CHECK(result.max_err_after == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(result.n_substitutions == 0);
    for (const auto& e : result.table.entries) {
        CHECK(e.kind == ErrorEntry::Kind::error);
        CHECK(e.err_pct == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("exact dependence: substitution preserves the right-hand side") {
    // Data where term f3 = 2*f1 - f2 exactly; a model using f3 must transform
    // into true terms with an identical RHS at every sampled state.
    const long n = 600;
    auto lib = build_polynomial_library(2, 2, true);
    const long t_x = lib.find_term({1, 0});
    const long t_y = lib.find_term({0, 1});
    const long t_xy = lib.find_term({1, 1});

    Mat states = gaussian(n, 2, 9);
    // force xy = 2x - y on the sample: y = 2x / (x + 1), pick safe x
    for (long t = 0; t < n; ++t) {
        const double x = 0.5 + 0.1 * std::abs(states(t, 0)) + (t % 7) * 0.3;
        states(t, 0) = x;
        states(t, 1) = 2.0 * x / (x + 1.0);
    }
    Mat theta = evaluate_library(lib, states);
    CHECK((theta.col(t_xy) - (2.0 * theta.col(t_x) - theta.col(t_y))).cwiseAbs().maxCoeff() <
          1e-12);

    SparseModel truth = make_model(lib, {{0, {1, 0}, 3.0}, {0, {0, 1}, -1.5}});
    SparseModel discovered = make_model(lib, {{0, {1, 0}, 1.0}, {0, {1, 1}, 1.0}});

    TransformResult result = closest_to_true_transform(discovered, truth, theta, {}, 0.95);
    CHECK(result.n_substitutions >= 1);
    CHECK(!result.transformed.lib.is_active(0, t_xy));

    // the transformed model evaluates identically on the sampled states
    for (long t = 0; t < n; t += 37) {
        const Vec state = states.row(t).transpose();
        const Vec raw = discovered.rhs(state);
        const Vec transformed = result.transformed.rhs(state);
        CHECK(std::abs(raw[0] - transformed[0]) < 1e-10);
    }
}

TEST_CASE("lambda shifts reduce the max error monotonically") {
    // discovered misses y and xy; y = x - xy holds exactly on the constructed
    // sample, so one shift along that relation reaches the true coefficients
    const long n = 500;
    auto lib = build_polynomial_library(2, 2, true);
    Mat states(n, 2);
    Rng rng(13);
    for (long t = 0; t < n; ++t) {
        const double x = 0.4 + std::abs(rng.normal());
        states(t, 0) = x;
        states(t, 1) = x / (1.0 + x);  // enforces y = x - x*y
    }
    Mat theta = evaluate_library(lib, states);

    SparseModel truth =
        make_model(lib, {{0, {1, 0}, 28.0}, {0, {0, 1}, -1.0}, {0, {1, 1}, -1.0}});
    SparseModel discovered = make_model(lib, {{0, {1, 0}, 27.0}});

    TransformResult result = closest_to_true_transform(discovered, truth, theta, {}, 0.95);
    for (size_t i = 1; i < result.objective_trace.size(); ++i)
        CHECK(result.objective_trace[i] <= result.objective_trace[i - 1] + 1e-12);
    CHECK(result.max_err_after <= result.max_err_before + 1e-12);
    CHECK(result.n_shifts >= 1);
    CHECK(result.max_err_after <= 1e-4);
    // the missing true terms are substituted back in
    CHECK(result.transformed.lib.is_active(0, lib.find_term({0, 1})));
    CHECK(result.transformed.lib.is_active(0, lib.find_term({1, 1})));
}

TEST_CASE("no overlap with the true library raises") {
    const long n = 400;
    auto lib = build_polynomial_library(2, 2, true);
    Mat states = gaussian(n, 2, 21);
    Mat theta = evaluate_library(lib, states);

    SparseModel truth = make_model(lib, {{0, {1, 0}, 1.0}});
    // gaussian independent coordinates: y^2 is far from span{x}
    SparseModel discovered = make_model(lib, {{0, {0, 2}, 1.0}});
    CHECK_THROWS_AS(closest_to_true_transform(discovered, truth, theta, {}, 0.95),
                    NoTrueOverlap);
}

TEST_CASE("dimension mismatch raises") {
    SystemSpec lorenz = make_system("lorenz");
    SystemSpec harm = make_system("harm_linear");
    CHECK_THROWS_AS(coefficient_errors(lorenz.true_model, harm.true_model),
                    MismatchedLibrary);
}
