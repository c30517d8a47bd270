#include "dynfit/assess.hpp"

#include <algorithm>
#include <set>

namespace dynfit {

SpanReport in_span_alternatives(const SparseModel& model,
                                const std::vector<std::pair<int, long>>& culled_terms,
                                const Mat& theta, const std::vector<long>& timepoints,
                                double r2_threshold) {
    ColumnGram gram(theta, timepoints);
    SpanReport report;
    report.r2_threshold = r2_threshold;
    for (const auto& [var, term] : culled_terms) {
        const auto basis = model.lib.active_terms(var);
        if (basis.empty()) continue;
        auto fit = gram.fit(basis, term, true);
        SpanEntry entry;
        entry.variable = var;
        entry.term = term;
        entry.basis = basis;
        entry.betas = fit.betas;
        entry.intercept = fit.intercept;
        entry.r2 = fit.r2;
        entry.alternative = fit.r2 >= r2_threshold;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

SpanReport leave_one_out_redundancy(const SparseModel& model, const Mat& theta,
                                    const std::vector<long>& timepoints,
                                    double r2_threshold) {
    ColumnGram gram(theta, timepoints);
    SpanReport report;
    report.r2_threshold = r2_threshold;
    for (int j = 0; j < model.dim(); ++j) {
        const auto active = model.lib.active_terms(j);
        if (active.size() < 2) continue;
        for (long term : active) {
            std::vector<long> basis;
            for (long i : active)
                if (i != term) basis.push_back(i);
            auto fit = gram.fit(basis, term, true);
            SpanEntry entry;
            entry.variable = j;
            entry.term = term;
            entry.basis = basis;
            entry.betas = fit.betas;
            entry.intercept = fit.intercept;
            entry.r2 = fit.r2;
            entry.alternative = fit.r2 >= r2_threshold;
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

double ErrorTable::max_rel_error() const {
    double worst = 0.0;
    for (const auto& e : entries) {
        if (e.kind == ErrorEntry::Kind::missing)
            return std::numeric_limits<double>::infinity();
        if (e.kind == ErrorEntry::Kind::error)
            worst = std::max(worst, e.err_pct / 100.0);
    }
    return worst;
}

std::vector<double> ErrorTable::true_term_errors_pct() const {
    std::vector<double> out;
    for (const auto& e : entries) {
        if (e.kind == ErrorEntry::Kind::error) out.push_back(e.err_pct);
        if (e.kind == ErrorEntry::Kind::missing)
            out.push_back(std::numeric_limits<double>::infinity());
    }
    return out;
}

namespace {

/// Maps each active term of `from` into `universe` term indices by exponents.
std::vector<long> map_terms(const FunctionalLibrary& universe,
                            const FunctionalLibrary& from, int var) {
    std::vector<long> mapped;
    for (long i : from.active_terms(var)) {
        const long idx = universe.find_term(from.terms[static_cast<size_t>(i)].exponents);
        if (idx < 0)
            throw MismatchedLibrary("term " + term_name(from.terms[static_cast<size_t>(i)]) +
                                    " not in the assessed library universe");
        mapped.push_back(idx);
    }
    std::sort(mapped.begin(), mapped.end());
    return mapped;
}

}  // namespace

ErrorTable coefficient_errors(const SparseModel& assessed, const SparseModel& true_model) {
    if (assessed.dim() != true_model.dim())
        throw MismatchedLibrary("model dimensions differ");
    ErrorTable table;
    for (int j = 0; j < assessed.dim(); ++j) {
        const auto true_terms = map_terms(assessed.lib, true_model.lib, j);
        std::set<long> true_set(true_terms.begin(), true_terms.end());
        for (long t_assessed : true_terms) {
            const auto& exps = assessed.lib.terms[static_cast<size_t>(t_assessed)].exponents;
            const long t_true = true_model.lib.find_term(exps);
            const double xi = true_model.coef(j, t_true);
            const double xi_hat = assessed.coef(j, t_assessed);
            ErrorEntry entry;
            entry.variable = j;
            entry.term = t_assessed;
            if (!assessed.lib.is_active(j, t_assessed) || xi_hat == 0.0) {
                entry.kind = ErrorEntry::Kind::missing;
            } else {
                entry.kind = ErrorEntry::Kind::error;
                entry.err_pct = std::abs((xi_hat - xi) / xi) * 100.0;
                entry.coef_hat = xi_hat;
            }
            table.entries.push_back(entry);
        }
        for (long term : assessed.lib.active_terms(j)) {
            if (true_set.count(term)) continue;
            ErrorEntry entry;
            entry.variable = j;
            entry.term = term;
            entry.kind = ErrorEntry::Kind::extra;
            entry.coef_hat = assessed.coef(j, term);
            table.entries.push_back(entry);
        }
    }
    return table;
}

namespace {

struct Relation {
    long left_out = -1;
    Vec direction;  // over the library universe: -1 at left_out, +beta elsewhere
    double r2 = 0.0;
};

double max_rel_error(const Vec& xi, const std::vector<long>& true_terms,
                     const Vec& xi_true) {
    double worst = 0.0;
    for (long f : true_terms) {
        const double denom = xi_true[f];
        worst = std::max(worst, std::abs((xi[f] - denom) / denom));
    }
    return worst;
}

// 1-D minimization of the (convex, piecewise-linear) max relative error
// along a relation direction: 41-point grid then golden-section to 1e-6.
double best_lambda(const Vec& xi, const Vec& direction, const std::vector<long>& true_terms,
                   const Vec& xi_true, double radius) {
    auto eval = [&](double lam) {
        return max_rel_error(xi + lam * direction, true_terms, xi_true);
    };
    const int grid_points = 41;
    double best = 0.0, best_val = eval(0.0);
    for (int g = 0; g < grid_points; ++g) {
        const double lam = -radius + 2.0 * radius * g / (grid_points - 1);
        const double val = eval(lam);
        if (val < best_val) {
            best_val = val;
            best = lam;
        }
    }
    const double spacing = 2.0 * radius / (grid_points - 1);
    double lo = best - spacing, hi = best + spacing;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = eval(c), fd = eval(d);
    while (hi - lo > 1e-6) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = eval(d);
        }
    }
    const double mid = 0.5 * (lo + hi);
    return eval(mid) < best_val ? mid : best;
}

}  // namespace

TransformResult closest_to_true_transform(const SparseModel& discovered,
                                          const SparseModel& true_model, const Mat& theta,
                                          const std::vector<long>& timepoints,
                                          double r2_threshold) {
    if (discovered.dim() != true_model.dim())
        throw MismatchedLibrary("model dimensions differ");
    const FunctionalLibrary& universe = discovered.lib;
    ColumnGram gram(theta, timepoints);

    TransformResult result;
    result.transformed = discovered;
    SparseModel& model = result.transformed;

    for (int j = 0; j < discovered.dim(); ++j) {
        const std::vector<long> true_terms = map_terms(universe, true_model.lib, j);
        if (true_terms.empty()) continue;  // nothing to match for this variable
        if (discovered.lib.active_terms(j).empty()) continue;  // all MISSING
        Vec xi_true = Vec::Zero(universe.n_terms());
        for (long f : true_terms) {
            const long t = true_model.lib.find_term(
                universe.terms[static_cast<size_t>(f)].exponents);
            xi_true[f] = true_model.coef(j, t);
        }

        Vec xi = discovered.coef.row(j).transpose();
        result.max_err_before = std::max(result.max_err_before,
                                         max_rel_error(xi, true_terms, xi_true));

        // Substitution: discovered-but-not-true terms in the span of the true
        // library are replaced by their fitted combination. Constant terms
        // stay put.
        std::set<long> true_set(true_terms.begin(), true_terms.end());
        for (long g = 0; g < universe.n_terms(); ++g) {
            if (xi[g] == 0.0 || true_set.count(g)) continue;
            if (universe.terms[static_cast<size_t>(g)].is_constant()) continue;
            auto fit = gram.fit(true_terms, g, false);
            if (fit.r2 < r2_threshold) continue;
            for (size_t k = 0; k < true_terms.size(); ++k)
                xi[true_terms[k]] += xi[g] * fit.betas[static_cast<long>(k)];
            xi[g] = 0.0;
            ++result.n_substitutions;
        }

        bool overlap = false;
        for (long f : true_terms)
            if (xi[f] != 0.0) overlap = true;
        if (!overlap) throw NoTrueOverlap(j);

        // Relation set: leave-one-out dependencies over the union of the
        // transformed active set and the true terms, so missing true
        // functionals can be substituted back in.
        std::set<long> union_set(true_set);
        for (long i = 0; i < universe.n_terms(); ++i)
            if (xi[i] != 0.0) union_set.insert(i);
        std::vector<long> union_terms(union_set.begin(), union_set.end());

        std::vector<Relation> relations;
        for (long k : union_terms) {
            std::vector<long> basis;
            for (long i : union_terms)
                if (i != k) basis.push_back(i);
            if (basis.empty()) continue;
            auto fit = gram.fit(basis, k, false);
            if (fit.r2 < r2_threshold) continue;
            Relation rel;
            rel.left_out = k;
            rel.r2 = fit.r2;
            rel.direction = Vec::Zero(universe.n_terms());
            rel.direction[k] = -1.0;
            for (size_t i = 0; i < basis.size(); ++i)
                rel.direction[basis[i]] = fit.betas[static_cast<long>(i)];
            relations.push_back(std::move(rel));
        }

        double radius = std::max(xi.cwiseAbs().maxCoeff(), xi_true.cwiseAbs().maxCoeff());
        if (radius <= 0) radius = 1.0;

        double current = max_rel_error(xi, true_terms, xi_true);
        result.objective_trace.push_back(current);
        for (int step = 0; step < 200 && !relations.empty(); ++step) {
            double best_val = current;
            double best_lam = 0.0;
            const Relation* best_rel = nullptr;
            for (const auto& rel : relations) {
                const double lam =
                    best_lambda(xi, rel.direction, true_terms, xi_true, radius);
                const double val = max_rel_error(xi + lam * rel.direction, true_terms, xi_true);
                if (val < best_val - 1e-12) {
                    best_val = val;
                    best_lam = lam;
                    best_rel = &rel;
                }
            }
            if (!best_rel) break;
            xi += best_lam * best_rel->direction;
            current = best_val;
            ++result.n_shifts;
            result.objective_trace.push_back(current);
        }

        // Drop numerically dead coefficients introduced by the shifts.
        const double tiny = 1e-11 * std::max(1.0, xi.cwiseAbs().maxCoeff());
        for (long i = 0; i < universe.n_terms(); ++i) {
            if (std::abs(xi[i]) <= tiny) xi[i] = 0.0;
            model.coef(j, i) = xi[i];
            model.lib.set_active(j, i, xi[i] != 0.0);
        }
        result.max_err_after = std::max(result.max_err_after,
                                        max_rel_error(xi, true_terms, xi_true));
    }

    result.table = coefficient_errors(result.transformed, true_model);
    return result;
}

}  // namespace dynfit
