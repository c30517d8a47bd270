#pragma once

#include <map>
#include <optional>

#include "dynfit/assess.hpp"
#include "dynfit/cull.hpp"
#include "dynfit/dynsys.hpp"

namespace dynfit {

struct RunConfig {
    // Data source: a registry system (simulated + noise) or CSV files.
    std::string system;
    std::vector<Vec> train_ics;  // empty with a system: registry defaults
    std::vector<Vec> val_ics;
    double duration = 0.0;  // 0: system default
    double dt = 0.002;
    double noise_pct = 0.0;
    bool noise_hermitian = false;
    std::vector<std::string> train_files;
    std::vector<std::string> val_files;

    // Library.
    int max_degree = 4;
    bool include_constant = true;

    // Preprocessing.
    long smooth_window = 0;     // 0: default_window_len(dt)
    long weight_halfwidth = 0;  // 0: half the smoothing window (>= 2)
    double z_floor = 0.1;

    // Regression.
    RegressionConfig regress;  // seed is derived per iteration from `seed`
    double percentile_m = 50.0;

    // Culling.
    int balance_limit = 3;
    double r2_threshold = 0.95;
    int protect_span = 4;
    double degradation_fraction = 0.5;
    int restore_budget = 5;

    // Evolution + FoMs.
    EvolutionLimits limits;
    int n_repeats = 3;
    long ic_k = 5;
    long density_threshold = 12;

    // Final steps.
    bool restart_enabled = false;
    int max_restarts = 1;
    std::vector<std::pair<int, std::vector<int>>> reinstate;  // (var, exponents)
    long max_iterations = 0;  // 0: 4 * initial active pairs + 60
    double select_tie_eps = 0.25;

    uint64_t seed = 1;
    std::string out_dir;
};

/// Model snapshot + per-trajectory FoMs + the cull/restore event for one
/// iteration.
struct IterationRecord {
    long iteration = 0;
    int pass = 1;
    SparseModel model;
    CullEvent event;
    std::map<std::string, FomSuite> foms;
    std::vector<long> active_counts;
    bool foms_skipped = false;
    bool rank_trouble = false;
};

struct TrajectoryRunLog {
    int home_index = 0;
    int pass = 1;
    std::vector<IterationRecord> records;
    std::vector<int> removed_variables;
    bool aborted = false;
    std::string abort_reason;
    std::vector<long> final_fit_timepoints;  // union of the last iteration's subsets
    Vec measured_noise_pct;                  // empty when no clean reference
};

/// Per-trajectory preprocessing products shared by every iteration.
struct PreparedTrajectory {
    Trajectory noisy;
    Trajectory smoothed;
    Mat derivatives;
    WeightVector weights;      // timepoint weights (IC estimation)
    WeightVector reg_weights;  // derivative-stencil combination (regression)
    Mat noise_std;             // rolling local noise sigma
    Mat theta;                 // library columns on the smoothed values
    Vec medians;               // median |theta| per term, all timepoints
};

struct RunData {
    FunctionalLibrary lib0;  // full starting library, all active
    std::vector<PreparedTrajectory> train;
    std::vector<PreparedTrajectory> val;
    std::optional<SystemSpec> truth;  // set when the source is a registry system
    long smooth_window = 0;
};

RunData prepare_run_data(const RunConfig& cfg);
PreparedTrajectory prepare_trajectory(const Trajectory& noisy, const FunctionalLibrary& lib,
                                      long smooth_window, long weight_halfwidth,
                                      double z_floor);

/// One home trajectory's full iteration loop (regress -> FoMs -> restore ->
/// cull), stopping when a variable's active set empties (with optional
/// restarts that drop the emptied variable).
TrajectoryRunLog run_fit_single(const RunData& data, int home_index,
                                const FunctionalLibrary& start_lib, const RunConfig& cfg,
                                int pass);

/// run_fit over every training trajectory with the full starting library.
std::vector<TrajectoryRunLog> run_fit(const RunConfig& cfg, const RunData& data,
                                      const FunctionalLibrary& start_lib, int pass);

/// Automated stand-in for expert model choice: maximizes mean in-envelope +
/// histogram correlation + spectrum correlation - |relative std error| with
/// validation trajectories double-weighted; near-ties go to the sparser
/// model. Returns an index into log.records. Throws NoViableModel.
long select_best_model(const TrajectoryRunLog& log, double tie_eps = 0.02);

/// Per-variable union of the active masks of the given models.
FunctionalLibrary union_of_libraries(const std::vector<SparseModel>& models);

/// Rebuilds `lib` with every term involving `removed_var` deactivated and the
/// removed variable's own row emptied.
FunctionalLibrary library_without_variable(const FunctionalLibrary& lib, int removed_var);

struct FullRunResult {
    RunData data;
    std::vector<TrajectoryRunLog> pass1;
    std::vector<TrajectoryRunLog> pass2;
    std::vector<long> best1;  // selected iteration per home, -1 when none
    std::vector<long> best2;
    std::vector<SparseModel> models;  // final model per home (pass 2 selection)
    FunctionalLibrary union_lib;

    // Oracle assessment per home; filled when ground truth is known.
    std::vector<ErrorTable> raw_errors;
    std::vector<std::optional<TransformResult>> transforms;
    std::vector<double> transform_behavior_dev;  // evolve(raw) vs evolve(transformed)
    std::vector<SpanReport> alternatives;
    std::vector<SpanReport> redundancy;
};

/// Pass 1 -> best models -> library union -> pass 2 -> selection -> reports.
FullRunResult run_full(const RunConfig& cfg);

}  // namespace dynfit
