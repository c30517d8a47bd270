#pragma once

#include <map>
#include <optional>

#include "dynfit/evolve.hpp"
#include "dynfit/regress.hpp"

namespace dynfit {

struct CullEvent {
    enum class Kind { lin_dep, threshold, restore, none };
    Kind kind = Kind::none;
    int variable = -1;
    long term = -1;
    std::optional<double> r2;
};

std::string to_string(CullEvent::Kind kind);

/// Per-run culling state: protection counters, restore bookkeeping, and the
/// thresholds that shape cull decisions.
struct CullState {
    std::map<std::pair<int, long>, int> protections;    // remaining iterations
    std::map<std::pair<int, long>, int> restores_used;  // per (variable, term)
    std::optional<CullEvent> last_cull;                 // cull from the previous iteration

    int balance_limit = 3;  // negative disables the balance constraint
    double r2_threshold = 0.95;
    int protect_span = 4;
    double degradation_fraction = 0.5;
    int restore_budget = 5;  // restores allowed per (variable, term)

    bool is_protected(int var, long term) const {
        auto it = protections.find({var, term});
        return it != protections.end() && it->second > 0;
    }
    /// Decrement all protection counters; call once at the end of an iteration.
    void tick() {
        for (auto& [key, count] : protections)
            if (count > 0) --count;
    }
};

/// Leave-one-out linear-dependence scan over each variable's active set.
/// Among unprotected (variable, term) pairs with R^2 >= threshold, culls the
/// one with the smallest rescaled |v * xi|. Returns nullopt when no
/// dependence is found.
std::optional<CullEvent> lin_dep_cull(const ColumnGram& gram, const FunctionalLibrary& lib,
                                      const Mat& coef,
                                      const std::vector<RescaleFactors>& rescale,
                                      const CullState& state);

/// Global argmin of |v * xi| over active pairs, excluding protected pairs and
/// every pair of any variable that the balance constraint shields. Throws
/// NoCandidates when everything is excluded.
std::optional<CullEvent> threshold_cull(const FunctionalLibrary& lib, const Mat& coef,
                                        const std::vector<RescaleFactors>& rescale,
                                        const CullState& state);

/// Compares the tracked home-trajectory FoMs (in-envelope and std-error)
/// before and after the last cull. A drop beyond degradation_fraction (or a
/// newly failing evolution) restores the culled pair under protection, bounded
/// by the per-pair restore budget.
std::optional<CullEvent> restore_check(const FomSuite& before, const FomSuite& after,
                                       CullState& state);

}  // namespace dynfit
