#include "dynfit/pipeline.hpp"

#include <algorithm>
#include <set>

#include "dynfit/io.hpp"
#include "dynfit/rng.hpp"

namespace dynfit {

namespace {

long resolved_window(const RunConfig& cfg) {
    return cfg.smooth_window > 0 ? cfg.smooth_window : default_window_len(cfg.dt);
}

long resolved_halfwidth(const RunConfig& cfg) {
    if (cfg.weight_halfwidth > 0) return cfg.weight_halfwidth;
    return std::max<long>(2, resolved_window(cfg) / 2);
}

uint64_t iteration_tag(int home, int pass, long iteration) {
    return static_cast<uint64_t>(home + 1) * 1000003ULL +
           static_cast<uint64_t>(pass) * 101ULL + static_cast<uint64_t>(iteration) * 7919ULL;
}

}  // namespace

PreparedTrajectory prepare_trajectory(const Trajectory& noisy, const FunctionalLibrary& lib,
                                      long smooth_window, long weight_halfwidth,
                                      double z_floor) {
    PreparedTrajectory prep;
    prep.noisy = noisy;
    prep.smoothed = smooth(noisy, SmoothingConfig{smooth_window});
    prep.derivatives = estimate_derivatives(prep.smoothed);
    prep.weights = timepoint_weights(noisy, weight_halfwidth, z_floor);
    prep.reg_weights = derivative_weights(prep.weights);
    prep.noise_std = rolling_noise_std(noisy, prep.smoothed, smooth_window);
    prep.theta = evaluate_library(lib, prep.smoothed.values);
    prep.medians = term_medians(prep.theta, {});
    return prep;
}

RunData prepare_run_data(const RunConfig& cfg) {
    RunData data;
    data.smooth_window = resolved_window(cfg);
    const long halfwidth = resolved_halfwidth(cfg);

    std::vector<Trajectory> train_raw, val_raw;
    int dim = 0;
    if (!cfg.system.empty()) {
        SystemSpec sys = make_system(cfg.system);
        data.truth = sys;
        dim = sys.dim;
        const double duration = cfg.duration > 0 ? cfg.duration : sys.default_duration;
        std::vector<Vec> train_ics = cfg.train_ics.empty() ? sys.train_ics : cfg.train_ics;
        std::vector<Vec> val_ics = cfg.val_ics.empty() ? sys.holdout_ics : cfg.val_ics;
        uint64_t traj_tag = 0;
        for (const Vec& ic : train_ics) {
            Trajectory clean = simulate(sys, ic, duration, cfg.dt);
            NoiseSpec noise{cfg.noise_pct, mix_seed(cfg.seed, 777 + traj_tag++),
                            cfg.noise_hermitian};
            train_raw.push_back(add_noise(clean, noise));
        }
        for (const Vec& ic : val_ics) {
            Trajectory clean = simulate(sys, ic, duration, cfg.dt);
            NoiseSpec noise{cfg.noise_pct, mix_seed(cfg.seed, 777 + traj_tag++),
                            cfg.noise_hermitian};
            val_raw.push_back(add_noise(clean, noise));
        }
    } else {
        if (cfg.train_files.empty())
            throw ConfigError("no training data: set `system` or `train.files`");
        for (const auto& path : cfg.train_files) train_raw.push_back(read_trajectory_csv(path));
        for (const auto& path : cfg.val_files) val_raw.push_back(read_trajectory_csv(path));
        dim = train_raw.front().dim();
    }

    data.lib0 = build_polynomial_library(dim, cfg.max_degree, cfg.include_constant);
    for (const auto& traj : train_raw)
        data.train.push_back(prepare_trajectory(traj, data.lib0, data.smooth_window,
                                                halfwidth, cfg.z_floor));
    for (const auto& traj : val_raw)
        data.val.push_back(prepare_trajectory(traj, data.lib0, data.smooth_window, halfwidth,
                                              cfg.z_floor));
    return data;
}

namespace {

struct FomTarget {
    std::string key;
    const PreparedTrajectory* prep;
    int repeats;
};

std::vector<FomTarget> fom_targets(const RunData& data, int home, int n_repeats) {
    std::vector<FomTarget> targets;
    targets.push_back({"home", &data.train[static_cast<size_t>(home)], n_repeats});
    for (size_t k = 0; k < data.train.size(); ++k)
        if (static_cast<int>(k) != home)
            targets.push_back({"train" + std::to_string(k), &data.train[k], 1});
    for (size_t k = 0; k < data.val.size(); ++k)
        targets.push_back({"val" + std::to_string(k), &data.val[k], 1});
    return targets;
}

Mat active_columns(const Mat& theta, const std::vector<long>& terms) {
    Mat sub(theta.rows(), static_cast<long>(terms.size()));
    for (size_t c = 0; c < terms.size(); ++c) sub.col(static_cast<long>(c)) = theta.col(terms[c]);
    return sub;
}

}  // namespace

FunctionalLibrary library_without_variable(const FunctionalLibrary& lib, int removed_var) {
    FunctionalLibrary out = lib;
    for (long i = 0; i < out.n_terms(); ++i) {
        if (out.terms[static_cast<size_t>(i)].uses_variable(removed_var))
            for (int j = 0; j < out.dim; ++j) out.set_active(j, i, false);
        out.set_active(removed_var, i, false);
    }
    return out;
}

TrajectoryRunLog run_fit_single(const RunData& data, int home_index,
                                const FunctionalLibrary& start_lib, const RunConfig& cfg,
                                int pass) {
    const PreparedTrajectory& home = data.train[static_cast<size_t>(home_index)];
    const long n = home.noisy.n();
    const int dim = start_lib.dim;

    TrajectoryRunLog log;
    log.home_index = home_index;
    log.pass = pass;
    if (home.noisy.clean_ref) {
        Trajectory clean = home.noisy;
        clean.values = *home.noisy.clean_ref;
        log.measured_noise_pct = measure_noise_level(home.noisy, clean);
    }

    FunctionalLibrary lib = start_lib;
    SparseModel model(lib);

    CullState state;
    state.balance_limit = cfg.balance_limit;
    state.r2_threshold = cfg.r2_threshold;
    state.protect_span = cfg.protect_span;
    state.degradation_fraction = cfg.degradation_fraction;
    state.restore_budget = cfg.restore_budget;

    ColumnGram home_gram(home.theta, {});

    const long initial_active = lib.total_active();
    const long max_iter =
        cfg.max_iterations > 0 ? cfg.max_iterations : 4 * initial_active + 60;

    int restarts_used = 0;
    std::optional<FomSuite> prev_home_fom;

    for (long iter = 0; iter < max_iter; ++iter) {
        // --- Regression over each variable's active set.
        RegressionConfig reg = cfg.regress;
        reg.seed = mix_seed(cfg.seed, iteration_tag(home_index, pass, iter));
        bool rank_trouble = false;
        for (int j = 0; j < dim; ++j) {
            const auto active = lib.active_terms(j);
            if (active.empty()) continue;
            const Mat theta_active = active_columns(home.theta, active);
            try {
                CoefficientEnsemble ens = ensemble_fit(
                    theta_active, home.derivatives.col(j), home.reg_weights.w.col(j), reg);
                for (size_t k = 0; k < active.size(); ++k)
                    model.coef(j, active[k]) = ens.median[static_cast<long>(k)];
            } catch (const RankDeficient&) {
                rank_trouble = true;  // keep the previous coefficients
            } catch (const SubsetTooSmall&) {
                rank_trouble = true;
            }
        }
        model.lib = lib;
        for (int j = 0; j < dim; ++j)
            for (long i = 0; i < lib.n_terms(); ++i)
                if (!lib.is_active(j, i)) model.coef(j, i) = 0.0;

        // --- Record skeleton.
        IterationRecord record;
        record.iteration = iter;
        record.pass = pass;
        record.model = model;
        record.rank_trouble = rank_trouble;
        for (int j = 0; j < dim; ++j) record.active_counts.push_back(lib.active_count(j));

        // Union of this iteration's subsets; kept for assessment fits.
        {
            const auto subsets = select_subsets(n, 0, reg);
            std::set<long> uni;
            for (const auto& s : subsets) uni.insert(s.begin(), s.end());
            log.final_fit_timepoints.assign(uni.begin(), uni.end());
        }

        // --- FoMs (skipped while any variable's active set is dense).
        long max_count = 0;
        for (int j = 0; j < dim; ++j) max_count = std::max(max_count, lib.active_count(j));
        const bool skip_foms = max_count > cfg.density_threshold;
        record.foms_skipped = skip_foms;
        if (!skip_foms) {
            for (const auto& target : fom_targets(data, home_index, cfg.n_repeats)) {
                record.foms[target.key] = compute_foms(
                    model, target.prep->noisy, target.prep->smoothed, target.prep->noise_std,
                    target.prep->weights, cfg.limits, target.repeats, cfg.ic_k);
            }
        }

        // --- Restoration check against the previous iteration's cull.
        if (prev_home_fom && !skip_foms && record.foms.count("home")) {
            if (auto restore = restore_check(*prev_home_fom, record.foms.at("home"), state)) {
                lib.set_active(restore->variable, restore->term, true);
                record.event = *restore;
                state.last_cull.reset();
                state.tick();
                prev_home_fom = record.foms.at("home");
                log.records.push_back(std::move(record));
                continue;
            }
        }
        if (!skip_foms && record.foms.count("home")) prev_home_fom = record.foms.at("home");

        // --- Rescale factors per variable (medians fixed at preparation).
        std::vector<RescaleFactors> rescale(static_cast<size_t>(dim));
        bool degenerate_median = false;
        std::optional<CullEvent> forced_cull;
        for (int j = 0; j < dim && !degenerate_median; ++j) {
            const auto active = lib.active_terms(j);
            if (active.empty()) continue;
            try {
                rescale[static_cast<size_t>(j)] =
                    rescale_factors_from_medians(home.medians, active, cfg.percentile_m);
            } catch (const DegeneratePercentile&) {
                // All-zero functional columns cannot be ranked; cull the worst
                // offender outright.
                degenerate_median = true;
                long worst = active.front();
                for (long i : active)
                    if (home.medians[i] < home.medians[worst]) worst = i;
                forced_cull = CullEvent{CullEvent::Kind::threshold, j, worst, std::nullopt};
            }
        }

        // --- Cull decision: linear dependence first, then threshold.
        std::optional<CullEvent> cull;
        if (forced_cull) {
            cull = forced_cull;
        } else {
            cull = lin_dep_cull(home_gram, lib, model.coef, rescale, state);
            if (!cull) {
                try {
                    cull = threshold_cull(lib, model.coef, rescale, state);
                } catch (const NoCandidates&) {
                    cull.reset();
                }
            }
        }

        if (cull) {
            lib.set_active(cull->variable, cull->term, false);
            record.event = *cull;
            state.last_cull = *cull;
        } else {
            record.event = CullEvent{};
            state.last_cull.reset();
            if (rank_trouble) {
                record.event = CullEvent{};
                log.records.push_back(std::move(record));
                log.aborted = true;
                log.abort_reason = "rank-deficient regression with no linear-dependence cull";
                return log;
            }
        }
        state.tick();
        log.records.push_back(std::move(record));

        // --- Stop / restart when a variable empties.
        if (cull && lib.active_count(cull->variable) == 0) {
            long alive = 0;
            for (int j = 0; j < dim; ++j)
                if (lib.active_count(j) > 0) ++alive;
            if (cfg.restart_enabled && restarts_used < cfg.max_restarts && alive >= 1) {
                const int removed = cull->variable;
                log.removed_variables.push_back(removed);
                ++restarts_used;
                FunctionalLibrary rebuilt = start_lib;
                for (int r : log.removed_variables)
                    rebuilt = library_without_variable(rebuilt, r);
                lib = rebuilt;
                model = SparseModel(lib);
                state = CullState();
                state.balance_limit = cfg.balance_limit;
                state.r2_threshold = cfg.r2_threshold;
                state.protect_span = cfg.protect_span;
                state.degradation_fraction = cfg.degradation_fraction;
                state.restore_budget = cfg.restore_budget;
                prev_home_fom.reset();
                continue;
            }
            return log;
        }
    }
    log.aborted = true;
    log.abort_reason = "iteration cap reached";
    return log;
}

std::vector<TrajectoryRunLog> run_fit(const RunConfig& cfg, const RunData& data,
                                      const FunctionalLibrary& start_lib, int pass) {
    std::vector<TrajectoryRunLog> logs;
    for (size_t k = 0; k < data.train.size(); ++k)
        logs.push_back(run_fit_single(data, static_cast<int>(k), start_lib, cfg, pass));
    return logs;
}

long select_best_model(const TrajectoryRunLog& log, double tie_eps) {
    struct Candidate {
        long index;
        double score;
        long active;
    };
    std::vector<Candidate> candidates;
    for (size_t r = 0; r < log.records.size(); ++r) {
        const IterationRecord& record = log.records[r];
        if (record.foms_skipped || record.foms.empty()) continue;
        bool ok = true;
        double weighted = 0.0, weight_sum = 0.0;
        for (const auto& [key, fom] : record.foms) {
            if (!fom.evolution_ok) { ok = false; break; }
            double acc = 0.0;
            long alive = 0;
            for (long j = 0; j < fom.in_envelope_frac.size(); ++j) {
                if (record.active_counts[static_cast<size_t>(j)] == 0) continue;
                const double part = fom.in_envelope_frac[j] + fom.hist_corr[j] +
                                    fom.fft_power_corr[j] - std::abs(fom.std_rel_err[j]);
                if (!std::isfinite(part)) { ok = false; break; }
                acc += part;
                ++alive;
            }
            if (!ok || alive == 0) { ok = false; break; }
            const double w = key == "home" ? 1.0 : 2.0;
            weighted += w * acc / static_cast<double>(alive);
            weight_sum += w;
        }
        if (!ok || weight_sum == 0.0) continue;
        long active = 0;
        for (long c : record.active_counts) active += c;
        candidates.push_back({static_cast<long>(r), weighted / weight_sum, active});
    }
    if (candidates.empty()) throw NoViableModel("no iteration with valid FoMs");

    double best_score = candidates.front().score;
    for (const auto& c : candidates) best_score = std::max(best_score, c.score);
    // Near-tie window scales with the score level, so the sparser-model
    // preference behaves consistently across noise regimes.
    const double window = std::max(tie_eps, 0.3 * best_score);
    const Candidate* chosen = nullptr;
    for (const auto& c : candidates) {
        if (c.score < best_score - window) continue;
        if (!chosen || c.active < chosen->active ||
            (c.active == chosen->active && c.score > chosen->score))
            chosen = &c;
    }
    return chosen->index;
}

FunctionalLibrary union_of_libraries(const std::vector<SparseModel>& models) {
    if (models.empty()) throw std::invalid_argument("no models to union");
    FunctionalLibrary out = models.front().lib;
    out.deactivate_all();
    for (const auto& model : models) {
        if (model.lib.n_terms() != out.n_terms() || model.lib.dim != out.dim)
            throw MismatchedLibrary("models span different library universes");
        for (int j = 0; j < out.dim; ++j)
            for (long i = 0; i < out.n_terms(); ++i)
                if (model.lib.is_active(j, i) && model.coef(j, i) != 0.0)
                    out.set_active(j, i, true);
    }
    return out;
}

FullRunResult run_full(const RunConfig& cfg) {
    FullRunResult result;
    result.data = prepare_run_data(cfg);
    const RunData& data = result.data;

    result.pass1 = run_fit(cfg, data, data.lib0, 1);

    std::vector<SparseModel> pass1_models;
    result.best1.assign(result.pass1.size(), -1);
    for (size_t k = 0; k < result.pass1.size(); ++k) {
        try {
            result.best1[k] = select_best_model(result.pass1[k], cfg.select_tie_eps);
            pass1_models.push_back(
                result.pass1[k].records[static_cast<size_t>(result.best1[k])].model);
        } catch (const NoViableModel&) {
        }
    }
    if (pass1_models.empty())
        throw NoViableModel("no trajectory produced a viable pass-1 model");

    result.union_lib = union_of_libraries(pass1_models);
    for (const auto& [var, exponents] : cfg.reinstate) {
        const long term = result.union_lib.find_term(exponents);
        if (term < 0) throw ConfigError("reinstate term not in library");
        result.union_lib.set_active(var, term, true);
    }

    result.pass2 = run_fit(cfg, data, result.union_lib, 2);

    result.best2.assign(result.pass2.size(), -1);
    for (size_t k = 0; k < result.pass2.size(); ++k) {
        try {
            result.best2[k] = select_best_model(result.pass2[k], cfg.select_tie_eps);
        } catch (const NoViableModel&) {
        }
        // Fall back to the pass-1 selection when pass 2 collapses.
        if (result.best2[k] >= 0) {
            result.models.push_back(
                result.pass2[k].records[static_cast<size_t>(result.best2[k])].model);
        } else if (result.best1[k] >= 0) {
            result.models.push_back(
                result.pass1[k].records[static_cast<size_t>(result.best1[k])].model);
        } else {
            result.models.push_back(SparseModel(data.lib0));
        }
    }

    // Assessment reports per home trajectory.
    for (size_t k = 0; k < result.models.size(); ++k) {
        const PreparedTrajectory& home = data.train[k];
        const SparseModel& model = result.models[k];
        const std::vector<long>& T = result.pass2[k].final_fit_timepoints.empty()
                                         ? result.pass1[k].final_fit_timepoints
                                         : result.pass2[k].final_fit_timepoints;

        std::vector<std::pair<int, long>> culled;
        for (int j = 0; j < data.lib0.dim; ++j)
            for (long i = 0; i < data.lib0.n_terms(); ++i)
                if (data.lib0.is_active(j, i) && !model.lib.is_active(j, i))
                    culled.emplace_back(j, i);
        result.alternatives.push_back(
            in_span_alternatives(model, culled, home.theta, T, cfg.r2_threshold));
        result.redundancy.push_back(
            leave_one_out_redundancy(model, home.theta, T, cfg.r2_threshold));

        if (data.truth) {
            result.raw_errors.push_back(
                coefficient_errors(model, data.truth->true_model));
            std::optional<TransformResult> transform;
            double behavior_dev = std::numeric_limits<double>::quiet_NaN();
            try {
                transform = closest_to_true_transform(model, data.truth->true_model,
                                                      home.theta, T, cfg.r2_threshold);
                const Vec ic =
                    initial_condition_estimate(home.noisy, home.weights, cfg.ic_k, 0);
                auto raw_evolution =
                    evolve_model(model, ic, home.noisy.t0, home.noisy.dt, home.noisy.n(),
                                 cfg.limits);
                auto transformed_evolution =
                    evolve_model(transform->transformed, ic, home.noisy.t0, home.noisy.dt,
                                 home.noisy.n(), cfg.limits);
                if (raw_evolution.ok && transformed_evolution.ok)
                    behavior_dev = relative_rms_deviation(raw_evolution.pred.values,
                                                          transformed_evolution.pred.values);
            } catch (const NoTrueOverlap&) {
            } catch (const MismatchedLibrary&) {
            }
            result.transforms.push_back(std::move(transform));
            result.transform_behavior_dev.push_back(behavior_dev);
        }
    }
    return result;
}

}  // namespace dynfit
