#pragma once

#include "dynfit/library.hpp"

namespace dynfit {

/// Sparse coefficient matrix over a functional library. coef(j, i) is the
/// loading of term i in the equation for variable j; entries whose mask bit
/// is off are pinned to zero.
struct SparseModel {
    FunctionalLibrary lib;
    Mat coef;  // dim x n_terms

    SparseModel() = default;
    explicit SparseModel(FunctionalLibrary l) : lib(std::move(l)) {
        coef.setZero(lib.dim, lib.n_terms());
    }

    int dim() const { return lib.dim; }

    void set_coef(int var, long term, double value) {
        coef(var, term) = value;
        lib.set_active(var, term, value != 0.0);
    }
    void deactivate(int var, long term) {
        coef(var, term) = 0.0;
        lib.set_active(var, term, false);
    }

    void rhs(const double* state, double* dxdt) const {
        const long nt = lib.n_terms();
        for (int j = 0; j < lib.dim; ++j) dxdt[j] = 0.0;
        for (long i = 0; i < nt; ++i) {
            bool used = false;
            for (int j = 0; j < lib.dim; ++j)
                if (lib.is_active(j, i) && coef(j, i) != 0.0) { used = true; break; }
            if (!used) continue;
            const double f = lib.terms[static_cast<size_t>(i)].eval(state);
            for (int j = 0; j < lib.dim; ++j)
                if (lib.is_active(j, i)) dxdt[j] += coef(j, i) * f;
        }
    }
    Vec rhs(const Vec& state) const {
        Vec out(lib.dim);
        rhs(state.data(), out.data());
        return out;
    }

    bool finite() const { return coef.allFinite(); }
};

/// Builds a model from (variable, exponents, coefficient) triples over the
/// given library; unknown terms raise MismatchedLibrary.
SparseModel make_model(FunctionalLibrary lib,
                       const std::vector<std::tuple<int, std::vector<int>, double>>& entries);

}  // namespace dynfit
