#pragma once

#include <string>

#include "dynfit/assess.hpp"
#include "dynfit/model.hpp"

namespace dynfit {

struct RunConfig;
struct TrajectoryRunLog;
struct IterationRecord;

// ---- trajectory CSV: header t,x1,...,xn[,clean_x1,...,clean_xn] ----
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

// ---- canonical model files (dump -> parse -> dump is byte-identical) ----
std::string dump_model(const SparseModel& model);
SparseModel parse_model(const std::string& text);
void write_model(const std::string& path, const SparseModel& model);
SparseModel read_model(const std::string& path);

/// Display rendering, one equation per line: "dx/dt = -10.13 x + 10.16 y".
std::string render_equations(const SparseModel& model, int precision = 4);

/// "(1, inf, 7, *)" for one variable, true-term errors and extras in library
/// term order, integer-rounded percents.
std::string render_error_tuple(const ErrorTable& table, int variable,
                               const FunctionalLibrary& lib);
std::string render_error_table(const ErrorTable& table, const SparseModel& assessed);

std::string render_span_report(const SpanReport& report, const FunctionalLibrary& lib);

// ---- iteration logs: one self-describing JSON record per line ----
std::string record_to_json(const IterationRecord& record);
std::string run_log_to_string(const TrajectoryRunLog& log);
void write_run_log(const std::string& path, const TrajectoryRunLog& log);
TrajectoryRunLog parse_run_log(const std::string& path);

/// Model-per-iteration text dump ("The model at each iteration...").
std::string iteration_models_text(const TrajectoryRunLog& log);

// ---- run configuration: flat `section.key = value` text ----
RunConfig parse_config_file(const std::string& path);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);
std::string dump_config(const RunConfig& cfg);

// ---- plots: static SVG plus the raw CSV behind every panel ----
void write_fom_mosaic(const std::string& svg_path, const std::string& csv_path,
                      const TrajectoryRunLog& log);
void write_overlay_plot(const std::string& svg_path, const std::string& csv_path,
                        const Trajectory& reference, const Trajectory& prediction);

std::string format_double(double v);  // %.17g, canonical

}  // namespace dynfit
