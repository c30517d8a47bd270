#include "dynfit/cull.hpp"

namespace dynfit {

std::string to_string(CullEvent::Kind kind) {
    switch (kind) {
        case CullEvent::Kind::lin_dep: return "lin_dep";
        case CullEvent::Kind::threshold: return "threshold";
        case CullEvent::Kind::restore: return "restore";
        case CullEvent::Kind::none: return "none";
    }
    return "?";
}

std::optional<CullEvent> lin_dep_cull(const ColumnGram& gram, const FunctionalLibrary& lib,
                                      const Mat& coef,
                                      const std::vector<RescaleFactors>& rescale,
                                      const CullState& state) {
    std::optional<CullEvent> best;
    double best_score = 0.0;
    for (int j = 0; j < lib.dim; ++j) {
        const auto active = lib.active_terms(j);
        if (active.size() < 2) continue;
        for (long term : active) {
            if (state.is_protected(j, term)) continue;
            // A pair that burned through its restore budget has proven itself
            // dynamically necessary; structural near-dependence no longer
            // re-culls it (the threshold path still can).
            auto used = state.restores_used.find({j, term});
            if (used != state.restores_used.end() && used->second >= state.restore_budget)
                continue;
            const double r2 = gram.leave_one_out_r2(active, term);
            if (r2 < state.r2_threshold) continue;
            const double score =
                std::abs(rescale[static_cast<size_t>(j)].factor_for(term) * coef(j, term));
            if (!best || score < best_score) {
                best = CullEvent{CullEvent::Kind::lin_dep, j, term, r2};
                best_score = score;
            }
        }
    }
    return best;
}

std::optional<CullEvent> threshold_cull(const FunctionalLibrary& lib, const Mat& coef,
                                        const std::vector<RescaleFactors>& rescale,
                                        const CullState& state) {
    std::vector<long> counts(static_cast<size_t>(lib.dim));
    long max_count = 0;
    for (int j = 0; j < lib.dim; ++j) {
        counts[static_cast<size_t>(j)] = lib.active_count(j);
        max_count = std::max(max_count, counts[static_cast<size_t>(j)]);
    }

    std::optional<CullEvent> best;
    double best_score = 0.0;
    for (int j = 0; j < lib.dim; ++j) {
        const long count = counts[static_cast<size_t>(j)];
        if (count == 0) continue;
        if (state.balance_limit >= 0) {
            // Gap evaluated after the prospective cull.
            long other_max = count - 1;
            for (int h = 0; h < lib.dim; ++h)
                if (h != j) other_max = std::max(other_max, counts[static_cast<size_t>(h)]);
            if (other_max - (count - 1) > state.balance_limit) continue;
        }
        for (long term : lib.active_terms(j)) {
            if (state.is_protected(j, term)) continue;
            const double score =
                std::abs(rescale[static_cast<size_t>(j)].factor_for(term) * coef(j, term));
            if (!best || score < best_score) {
                best = CullEvent{CullEvent::Kind::threshold, j, term, std::nullopt};
                best_score = score;
            }
        }
    }
    if (!best) throw NoCandidates("every active pair is protected or balance-shielded");
    return best;
}

namespace {

// Floors below which a FoM carries no signal: relative drops of a tiny
// in-envelope fraction, or relative growth of an already-small std error,
// are jitter rather than degradation.
constexpr double kEnvelopeFloor = 0.05;
constexpr double kStdErrFloor = 0.1;

bool degraded(const FomSuite& before, const FomSuite& after, double fraction) {
    if (before.skipped || after.skipped) return false;
    if (!before.evolution_ok) return false;
    if (!after.evolution_ok) return true;  // cull broke the evolution outright
    for (long j = 0; j < before.in_envelope_frac.size(); ++j) {
        const double b = before.in_envelope_frac[j], a = after.in_envelope_frac[j];
        if (std::isfinite(b) && std::isfinite(a) && b >= kEnvelopeFloor &&
            a < (1.0 - fraction) * b)
            return true;
        const double be = std::abs(before.std_rel_err[j]);
        const double ae = std::abs(after.std_rel_err[j]);
        if (std::isfinite(be) && std::isfinite(ae) &&
            ae > (1.0 + fraction) * std::max(be, kStdErrFloor))
            return true;
    }
    return false;
}

}  // namespace

std::optional<CullEvent> restore_check(const FomSuite& before, const FomSuite& after,
                                       CullState& state) {
    if (!state.last_cull) return std::nullopt;
    const CullEvent cull = *state.last_cull;
    if (cull.kind != CullEvent::Kind::lin_dep && cull.kind != CullEvent::Kind::threshold)
        return std::nullopt;
    if (!degraded(before, after, state.degradation_fraction)) return std::nullopt;

    const auto key = std::make_pair(cull.variable, cull.term);
    int& used = state.restores_used[key];
    if (used >= state.restore_budget) return std::nullopt;
    ++used;
    state.protections[key] = state.protect_span;
    return CullEvent{CullEvent::Kind::restore, cull.variable, cull.term, std::nullopt};
}

}  // namespace dynfit
