#include "dynfit/library.hpp"

#include <algorithm>

namespace dynfit {

std::string variable_name(int v) {
    static const char* names[] = {"x", "y", "z", "w"};
    if (v >= 0 && v < 4) return names[v];
    return "v" + std::to_string(v + 1);
}

std::string term_name(const FunctionalTerm& term) {
    std::string out;
    for (size_t v = 0; v < term.exponents.size(); ++v) {
        const int e = term.exponents[v];
        if (e == 0) continue;
        if (!out.empty()) out += "*";
        out += variable_name(static_cast<int>(v));
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out.empty() ? "1" : out;
}

long FunctionalLibrary::find_term(const std::vector<int>& exponents) const {
    for (long i = 0; i < n_terms(); ++i)
        if (terms[static_cast<size_t>(i)].exponents == exponents) return i;
    return -1;
}

void FunctionalLibrary::activate_all() {
    for (auto& row : active) std::fill(row.begin(), row.end(), uint8_t{1});
}

void FunctionalLibrary::deactivate_all() {
    for (auto& row : active) std::fill(row.begin(), row.end(), uint8_t{0});
}

namespace {

void enumerate(int dim, int var, int remaining, std::vector<int>& current,
               std::vector<FunctionalTerm>& out) {
    if (var == dim) {
        out.push_back(FunctionalTerm{current});
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[static_cast<size_t>(var)] = e;
        enumerate(dim, var + 1, remaining - e, current, out);
    }
    current[static_cast<size_t>(var)] = 0;
}

}  // namespace

FunctionalLibrary build_polynomial_library(int dim, int max_degree, bool include_constant) {
    if (dim < 1) throw std::invalid_argument("library dim must be >= 1");
    if (max_degree < 1) throw std::invalid_argument("library max_degree must be >= 1");
    FunctionalLibrary lib;
    lib.dim = dim;
    std::vector<int> current(static_cast<size_t>(dim), 0);
    for (int d = include_constant ? 0 : 1; d <= max_degree; ++d) {
        std::vector<FunctionalTerm> layer;
        enumerate(dim, 0, d, current, layer);
        for (auto& t : layer)
            if (t.degree() == d) lib.terms.push_back(std::move(t));
    }
    lib.active.assign(static_cast<size_t>(dim),
                      std::vector<uint8_t>(lib.terms.size(), uint8_t{1}));
    return lib;
}

Mat evaluate_library(const FunctionalLibrary& lib, const Mat& values) {
    if (values.cols() != lib.dim)
        throw MismatchedLibrary("trajectory dim does not match library");
    const long n = values.rows();
    Mat theta(n, lib.n_terms());
    for (long i = 0; i < lib.n_terms(); ++i) {
        const auto& term = lib.terms[static_cast<size_t>(i)];
        for (long t = 0; t < n; ++t) {
            double p = 1.0;
            for (int v = 0; v < lib.dim; ++v) {
                const int e = term.exponents[static_cast<size_t>(v)];
                const double xv = values(t, v);
                for (int q = 0; q < e; ++q) p *= xv;
            }
            theta(t, i) = p;
        }
    }
    return theta;
}

Vec term_medians(const Mat& theta, const std::vector<long>& timepoints) {
    Vec med(theta.cols());
    std::vector<double> buf;
    for (long i = 0; i < theta.cols(); ++i) {
        buf.clear();
        if (timepoints.empty()) {
            buf.reserve(static_cast<size_t>(theta.rows()));
            for (long t = 0; t < theta.rows(); ++t) buf.push_back(std::abs(theta(t, i)));
        } else {
            buf.reserve(timepoints.size());
            for (long t : timepoints) buf.push_back(std::abs(theta(t, i)));
        }
        med[i] = median(std::move(buf));
    }
    return med;
}

RescaleFactors rescale_factors_from_medians(const Vec& medians,
                                            const std::vector<long>& active_terms,
                                            double percentile_m) {
    if (active_terms.empty())
        throw std::invalid_argument("rescale_factors needs at least one active term");
    std::vector<double> active_medians;
    active_medians.reserve(active_terms.size());
    for (long i : active_terms) active_medians.push_back(medians[i]);
    const double M = percentile_nearest_rank(active_medians, percentile_m);
    if (M == 0.0)
        throw DegeneratePercentile("percentile of active medians is zero");
    RescaleFactors rf;
    rf.terms = active_terms;
    rf.M = M;
    rf.v.resize(static_cast<long>(active_terms.size()));
    for (size_t k = 0; k < active_terms.size(); ++k)
        rf.v[static_cast<long>(k)] = medians[active_terms[k]] / M;
    return rf;
}

RescaleFactors rescale_factors(const Mat& theta, const std::vector<uint8_t>& active_mask,
                               const std::vector<long>& fit_timepoints, double percentile_m) {
    std::vector<long> active;
    for (long i = 0; i < static_cast<long>(active_mask.size()); ++i)
        if (active_mask[static_cast<size_t>(i)]) active.push_back(i);
    return rescale_factors_from_medians(term_medians(theta, fit_timepoints), active,
                                        percentile_m);
}

}  // namespace dynfit
