#pragma once

#include <string>
#include <vector>

#include "dynfit/types.hpp"

namespace dynfit {

/// One polynomial library term: a monomial given by its per-variable exponents.
struct FunctionalTerm {
    std::vector<int> exponents;

    int degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }
    bool is_constant() const { return degree() == 0; }
    bool uses_variable(int var) const {
        return var >= 0 && var < static_cast<int>(exponents.size()) &&
               exponents[static_cast<size_t>(var)] > 0;
    }
    bool operator==(const FunctionalTerm& o) const { return exponents == o.exponents; }

    double eval(const double* state) const {
        double p = 1.0;
        for (size_t v = 0; v < exponents.size(); ++v)
            for (int e = 0; e < exponents[v]; ++e) p *= state[v];
        return p;
    }
};

/// Name of variable `v` for rendering (x, y, z, w, then v5, v6, ...).
std::string variable_name(int v);

/// Renders a term as e.g. "x^2*z"; the constant term renders as "1".
std::string term_name(const FunctionalTerm& term);

/// Ordered set of candidate terms plus per-variable active masks. A false
/// mask entry pins the corresponding coefficient to zero.
struct FunctionalLibrary {
    int dim = 0;
    std::vector<FunctionalTerm> terms;
    std::vector<std::vector<uint8_t>> active;  // [dim][n_terms]

    long n_terms() const { return static_cast<long>(terms.size()); }
    bool is_active(int var, long term) const {
        return active[static_cast<size_t>(var)][static_cast<size_t>(term)] != 0;
    }
    void set_active(int var, long term, bool on) {
        active[static_cast<size_t>(var)][static_cast<size_t>(term)] = on ? 1 : 0;
    }
    long active_count(int var) const {
        long c = 0;
        for (uint8_t a : active[static_cast<size_t>(var)]) c += a ? 1 : 0;
        return c;
    }
    long total_active() const {
        long c = 0;
        for (int j = 0; j < dim; ++j) c += active_count(j);
        return c;
    }
    std::vector<long> active_terms(int var) const {
        std::vector<long> out;
        for (long i = 0; i < n_terms(); ++i)
            if (is_active(var, i)) out.push_back(i);
        return out;
    }
    /// Index of the term with the given exponents, or -1.
    long find_term(const std::vector<int>& exponents) const;
    void activate_all();
    void deactivate_all();
};

/// All monomials of total degree <= max_degree over `dim` variables
/// (degree-0 term iff include_constant), every mask active. Terms are ordered
/// by degree, then lexicographically with earlier variables' powers first.
FunctionalLibrary build_polynomial_library(int dim, int max_degree, bool include_constant);

/// Theta[t][i] = term_i evaluated at row t of `values`.
Mat evaluate_library(const FunctionalLibrary& lib, const Mat& values);

/// Median of |theta column| over the given timepoints, for every term.
/// Empty `timepoints` means all rows.
Vec term_medians(const Mat& theta, const std::vector<long>& timepoints);

/// Per-variable coefficient rescaling for culling decisions.
struct RescaleFactors {
    std::vector<long> terms;  // active term indices, ascending
    Vec v;                    // rescale factor per entry of `terms`
    double M = 0.0;           // the percentile pivot
    double factor_for(long term) const {
        for (size_t k = 0; k < terms.size(); ++k)
            if (terms[k] == term) return v[static_cast<long>(k)];
        return 1.0;
    }
};

/// Computes v_i = med(|f_i|) / M with M the nearest-rank m-th percentile of
/// the active medians. Throws DegeneratePercentile when M == 0.
RescaleFactors rescale_factors_from_medians(const Vec& medians,
                                            const std::vector<long>& active_terms,
                                            double percentile_m);

RescaleFactors rescale_factors(const Mat& theta, const std::vector<uint8_t>& active_mask,
                               const std::vector<long>& fit_timepoints, double percentile_m);

}  // namespace dynfit
