#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dynfit/library.hpp"
#include "dynfit/rng.hpp"

using namespace dynfit;

namespace {

// Enumeration oracle: count exponent tuples with total degree <= max_degree.
long count_monomials(int dim, int max_degree, bool include_constant) {
    long count = 0;
    std::vector<int> exps(static_cast<size_t>(dim), 0);
    std::function<void(int, int)> walk = [&](int var, int remaining) {
        if (var == dim) {
            int degree = 0;
            for (int e : exps) degree += e;
            if (degree > 0 || include_constant) ++count;
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            exps[static_cast<size_t>(var)] = e;
            walk(var + 1, remaining - e);
        }
        exps[static_cast<size_t>(var)] = 0;
    };
    walk(0, max_degree);
    return count;
}

}  // namespace

TEST_CASE("polynomial library enumeration") {
    auto lib = build_polynomial_library(2, 1, true);
    REQUIRE(lib.n_terms() == 3);
    CHECK(term_name(lib.terms[0]) == "1");
    CHECK(term_name(lib.terms[1]) == "x");
    CHECK(term_name(lib.terms[2]) == "y");

    CHECK(build_polynomial_library(3, 2, true).n_terms() == count_monomials(3, 2, true));
    CHECK(build_polynomial_library(3, 2, true).n_terms() == 10);
    CHECK(build_polynomial_library(3, 4, true).n_terms() == count_monomials(3, 4, true));
    CHECK(build_polynomial_library(3, 4, true).n_terms() == 35);
    CHECK(build_polynomial_library(3, 2, false).n_terms() == 9);
}

TEST_CASE("terms are unique and stably ordered") {
    auto lib = build_polynomial_library(3, 4, true);
    std::set<std::vector<int>> seen;
    int prev_degree = -1;
    for (const auto& term : lib.terms) {
        CHECK(seen.insert(term.exponents).second);
        CHECK(term.degree() >= prev_degree);
        prev_degree = std::max(prev_degree, term.degree());
        CHECK(term.degree() <= 4);
    }
    auto again = build_polynomial_library(3, 4, true);
    for (long i = 0; i < lib.n_terms(); ++i)
        CHECK(lib.terms[static_cast<size_t>(i)] == again.terms[static_cast<size_t>(i)]);
}

TEST_CASE("term naming") {
    FunctionalTerm t;
    t.exponents = {2, 0, 1};
    CHECK(term_name(t) == "x^2*z");
    t.exponents = {0, 0, 0};
    CHECK(term_name(t) == "1");
    t.exponents = {1, 1, 0};
    CHECK(term_name(t) == "x*y");
}

TEST_CASE("library evaluation") {
    auto lib2 = build_polynomial_library(2, 2, true);
    Mat state(1, 2);
    state << 2, 3;
    Mat theta = evaluate_library(lib2, state);
    CHECK(theta(0, lib2.find_term({1, 1})) == doctest::Approx(6.0));
    CHECK(theta(0, lib2.find_term({0, 0})) == doctest::Approx(1.0));

    auto lib3 = build_polynomial_library(3, 4, true);
    Mat s3(1, 3);
    s3 << 2, 0, -1;
    Mat theta3 = evaluate_library(lib3, s3);
    CHECK(theta3(0, lib3.find_term({2, 0, 2})) == doctest::Approx(4.0));
}

TEST_CASE("rescale factors") {
    {
        Vec medians(3);
        medians << 5, 5, 5;
        auto rf = rescale_factors_from_medians(medians, {0, 1, 2}, 50.0);
        for (long i = 0; i < 3; ++i) CHECK(rf.v[i] == doctest::Approx(1.0));
    }
    {
        Vec medians(3);
        medians << 1, 10, 100;
        auto rf = rescale_factors_from_medians(medians, {0, 1, 2}, 50.0);
        CHECK(rf.M == doctest::Approx(10.0));
        CHECK(rf.v[0] == doctest::Approx(0.1));
        CHECK(rf.v[1] == doctest::Approx(1.0));
        CHECK(rf.v[2] == doctest::Approx(10.0));
    }
    {
        Vec medians(4);
        medians << 7, 3, 9, 100;
        auto rf = rescale_factors_from_medians(medians, {1}, 50.0);
        CHECK(rf.v[0] == doctest::Approx(1.0));  // a single term is its own percentile
    }
    {
        Vec zeros = Vec::Zero(2);
        CHECK_THROWS_AS(rescale_factors_from_medians(zeros, {0, 1}, 50.0),
                        DegeneratePercentile);
    }
}

TEST_CASE("rescale via the matrix interface") {
    Mat theta(5, 2);
    theta << 1, 10, 1, 10, 1, 10, 1, 10, 1, 10;
    std::vector<uint8_t> mask = {1, 1};
    auto rf = rescale_factors(theta, mask, {}, 50.0);
    CHECK(rf.M == doctest::Approx(1.0));  // nearest-rank 50th of {1, 10}
    CHECK(rf.v[0] == doctest::Approx(1.0));
    CHECK(rf.v[1] == doctest::Approx(10.0));
}

TEST_CASE("v-weighted contribution identity |v*xi*M| = |xi|*med") {
    Rng rng(11);
    for (int round = 0; round < 20; ++round) {
        const long k = 2 + static_cast<long>(rng.below(6));
        Vec medians(k);
        for (long i = 0; i < k; ++i) medians[i] = 0.1 + 10.0 * rng.uniform01();
        std::vector<long> active;
        for (long i = 0; i < k; ++i) active.push_back(i);
        auto rf = rescale_factors_from_medians(medians, active, 50.0);
        for (long i = 0; i < k; ++i) {
            const double xi = rng.normal();
            CHECK(std::abs(rf.v[i] * xi * rf.M) ==
                  doctest::Approx(std::abs(xi) * medians[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("culling order is invariant under column rescaling") {
    // Four terms; scaling column 2's values by c and its coefficient by 1/c
    // must not change the |v*xi| ranking when the scaled median does not set M.
    Vec medians(4);
    medians << 1, 4, 9, 20;
    std::vector<long> active = {0, 1, 2, 3};
    Vec xi(4);
    xi << 5.0, -0.5, 0.9, -0.2;

    auto rank_of = [&](const Vec& med, const Vec& coefs) {
        auto rf = rescale_factors_from_medians(med, active, 50.0);
        std::vector<std::pair<double, long>> scored;
        for (long i = 0; i < 4; ++i)
            scored.push_back({std::abs(rf.v[i] * coefs[i]), i});
        std::sort(scored.begin(), scored.end());
        std::vector<long> order;
        for (auto& [s, i] : scored) order.push_back(i);
        return order;
    };

    const auto base = rank_of(medians, xi);
    const double c = 7.0;
    Vec med2 = medians;
    med2[2] *= c;  // med2 sorted: {1,4,20,63}; M moves from 4 to 4 (rank 2)
    Vec xi2 = xi;
    xi2[2] /= c;
    CHECK(rank_of(med2, xi2) == base);
}
