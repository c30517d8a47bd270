#pragma once

#include "dynfit/model.hpp"
#include "dynfit/regress.hpp"

namespace dynfit {

struct SpanEntry {
    int variable = -1;
    long term = -1;             // the fitted (candidate or left-out) term
    std::vector<long> basis;    // retained terms used as features
    Vec betas;
    double intercept = 0.0;
    double r2 = 0.0;
    bool alternative = false;   // r2 >= threshold
};

struct SpanReport {
    double r2_threshold = 0.95;
    std::vector<SpanEntry> entries;
};

/// Each culled term's column regressed (with intercept) on the variable's
/// retained active columns.
SpanReport in_span_alternatives(const SparseModel& model,
                                const std::vector<std::pair<int, long>>& culled_terms,
                                const Mat& theta, const std::vector<long>& timepoints,
                                double r2_threshold);

/// Each retained term fitted by the other retained terms of its variable.
SpanReport leave_one_out_redundancy(const SparseModel& model, const Mat& theta,
                                    const std::vector<long>& timepoints,
                                    double r2_threshold);

struct ErrorEntry {
    enum class Kind { error, missing, extra };
    int variable = -1;
    long term = -1;
    Kind kind = Kind::error;
    double err_pct = 0.0;   // |(xi_hat - xi) / xi| * 100, for kind == error
    double coef_hat = 0.0;  // assessed coefficient (reported for extras)
};

struct ErrorTable {
    std::vector<ErrorEntry> entries;
    /// Largest per-true-term relative error (fraction, not percent); missing
    /// terms count as +inf.
    double max_rel_error() const;
    std::vector<double> true_term_errors_pct() const;
};

/// Percent errors per true term, MISSING for absent true terms, EXTRA flags
/// for surplus active terms. Models are matched term-by-exponents; a dim
/// mismatch or a true term outside the assessed universe raises
/// MismatchedLibrary.
ErrorTable coefficient_errors(const SparseModel& assessed, const SparseModel& true_model);

struct TransformResult {
    SparseModel transformed;
    ErrorTable table;
    double max_err_before = 0.0;  // fractions
    double max_err_after = 0.0;
    long n_substitutions = 0;
    long n_shifts = 0;
    /// Objective value after every accepted lambda step, for monotonicity
    /// checks; starts with the post-substitution value.
    std::vector<double> objective_trace;
};

/// The oracle assessment transform: substitutes discovered-but-not-true terms
/// that sit in the span of the true library, then greedily applies
/// linear-dependence shifts (1-D grid + golden-section in lambda) to shrink
/// the maximum relative coefficient error against the true model. Theta spans
/// the discovered model's library universe, evaluated on the fit timepoints.
TransformResult closest_to_true_transform(const SparseModel& discovered,
                                          const SparseModel& true_model, const Mat& theta,
                                          const std::vector<long>& timepoints,
                                          double r2_threshold);

}  // namespace dynfit
