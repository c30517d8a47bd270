// Command-line surface: simulate | fit | assess | report.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dynfit/io.hpp"
#include "dynfit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dynfit;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;

std::string resolve_out_dir(std::string requested) {
    if (requested.empty()) {
        if (const char* env = std::getenv("DYNFIT_OUT")) requested = env;
    }
    if (requested.empty()) requested = ".";
    fs::create_directories(requested);
    return requested;
}

Vec parse_ic(const std::string& text) {
    std::vector<double> values;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) values.push_back(std::stod(token));
    return Eigen::Map<const Vec>(values.data(), static_cast<long>(values.size()));
}

int cmd_simulate(const std::string& system_name, const std::string& ic_text, double duration,
                 double dt, double noise, uint64_t seed, bool hermitian,
                 const std::string& out_dir_arg) {
    const std::string out_dir = resolve_out_dir(out_dir_arg);
    SystemSpec sys = make_system(system_name);
    const Vec ic = ic_text.empty() ? sys.train_ics.front() : parse_ic(ic_text);
    if (duration <= 0) duration = sys.default_duration;

    Trajectory clean = simulate(sys, ic, duration, dt);
    NoiseSpec spec{noise, seed, hermitian};
    Trajectory noisy = add_noise(clean, spec);

    const std::string clean_path = out_dir + "/" + system_name + "_clean.csv";
    const std::string noisy_path = out_dir + "/" + system_name + "_noisy.csv";
    Trajectory clean_only = clean;
    clean_only.clean_ref.reset();
    write_trajectory_csv(clean_path, clean_only);
    write_trajectory_csv(noisy_path, noisy);

    const Vec measured = noise > 0 ? measure_noise_level(noisy, clean) : Vec::Zero(sys.dim);
    std::cout << "wrote " << clean_path << " and " << noisy_path << " (" << noisy.n()
              << " rows)\n";
    std::cout << "measured noise pct:";
    for (int j = 0; j < measured.size(); ++j) std::cout << " " << measured[j];
    std::cout << "\n";
    return 0;
}

void write_fit_artifacts(const RunConfig& cfg, const FullRunResult& result,
                         const std::string& out_dir) {
    {
        std::ofstream cfg_out(out_dir + "/config_used.cfg");
        cfg_out << dump_config(cfg);
    }
    for (size_t k = 0; k < result.data.train.size(); ++k)
        write_trajectory_csv(out_dir + "/train" + std::to_string(k) + "_noisy.csv",
                             result.data.train[k].noisy);
    for (size_t k = 0; k < result.data.val.size(); ++k)
        write_trajectory_csv(out_dir + "/val" + std::to_string(k) + "_noisy.csv",
                             result.data.val[k].noisy);

    auto dump_pass = [&](const std::vector<TrajectoryRunLog>& logs, int pass) {
        for (size_t k = 0; k < logs.size(); ++k) {
            const std::string stem =
                "_pass" + std::to_string(pass) + "_traj" + std::to_string(k);
            write_run_log(out_dir + "/log" + stem + ".jsonl", logs[k]);
            std::ofstream models(out_dir + "/models" + stem + ".txt");
            models << iteration_models_text(logs[k]);
            write_fom_mosaic(out_dir + "/fom" + stem + ".svg", out_dir + "/fom" + stem + ".csv",
                             logs[k]);
        }
    };
    dump_pass(result.pass1, 1);
    dump_pass(result.pass2, 2);

    std::ofstream summary(out_dir + "/summary.txt");
    for (size_t k = 0; k < result.models.size(); ++k) {
        const SparseModel& model = result.models[k];
        write_model(out_dir + "/final_model_traj" + std::to_string(k) + ".txt", model);

        summary << "== model " << k << " (home trajectory " << k << ") ==\n";
        summary << "pass1 iteration " << result.best1[k] << ", pass2 iteration "
                << result.best2[k] << "\n";
        summary << render_equations(model);

        const PreparedTrajectory& home = result.data.train[k];
        const Vec ic = initial_condition_estimate(home.noisy, home.weights, cfg.ic_k, 0);
        auto evolution =
            evolve_model(model, ic, home.noisy.t0, home.noisy.dt, home.noisy.n(), cfg.limits);
        if (evolution.ok)
            write_overlay_plot(out_dir + "/overlay_traj" + std::to_string(k) + ".svg",
                               out_dir + "/overlay_traj" + std::to_string(k) + ".csv",
                               home.smoothed, evolution.pred);

        std::ofstream span(out_dir + "/span_traj" + std::to_string(k) + ".txt");
        span << "candidate alternatives (culled terms on the retained basis)\n"
             << render_span_report(result.alternatives[k], model.lib)
             << "\nleave-one-out redundancy of retained terms\n"
             << render_span_report(result.redundancy[k], model.lib);

        if (!result.raw_errors.empty()) {
            std::ofstream err(out_dir + "/error_table_traj" + std::to_string(k) + ".txt");
            err << "raw model\n"
                << render_equations(model) << render_error_table(result.raw_errors[k], model);
            summary << "raw errors:\n" << render_error_table(result.raw_errors[k], model);
            if (result.transforms[k]) {
                const auto& tr = *result.transforms[k];
                err << "\nclosest-to-true model\n"
                    << render_equations(tr.transformed)
                    << render_error_table(tr.table, tr.transformed);
                err << "\nevolved raw-vs-transformed relative rms deviation: "
                    << result.transform_behavior_dev[k] << "\n";
                summary << "closest-to-true errors:\n"
                        << render_error_table(tr.table, tr.transformed);
            }
        }
        summary << "\n";
    }
    std::cout << "artifacts written to " << out_dir << "\n";
}

int cmd_fit(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& out_dir_arg) {
    RunConfig cfg = parse_config_file(config_path);
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got " + item);
        apply_config_entry(cfg, item.substr(0, eq), item.substr(eq + 1));
    }
    if (!out_dir_arg.empty()) cfg.out_dir = out_dir_arg;
    const std::string out_dir = resolve_out_dir(cfg.out_dir);

    FullRunResult result = run_full(cfg);
    write_fit_artifacts(cfg, result, out_dir);
    for (size_t k = 0; k < result.models.size(); ++k) {
        std::cout << "model " << k << ":\n" << render_equations(result.models[k]);
    }
    return 0;
}

int cmd_assess(const std::string& model_path, const std::string& reference_path,
               const std::string& traj_path, double r2, long window,
               const std::string& out_dir_arg) {
    const std::string out_dir = resolve_out_dir(out_dir_arg);
    SparseModel model = read_model(model_path);
    SparseModel reference = read_model(reference_path);
    Trajectory noisy = read_trajectory_csv(traj_path);

    if (window <= 0) window = default_window_len(noisy.dt);
    Trajectory smoothed = smooth(noisy, SmoothingConfig{window});
    Mat theta = evaluate_library(model.lib, smoothed.values);
    std::vector<long> all_points;

    ErrorTable raw = coefficient_errors(model, reference);
    TransformResult transform =
        closest_to_true_transform(model, reference, theta, all_points, r2);

    std::vector<std::pair<int, long>> culled;
    for (int j = 0; j < model.dim(); ++j)
        for (long i = 0; i < model.lib.n_terms(); ++i)
            if (!model.lib.is_active(j, i)) culled.emplace_back(j, i);
    SpanReport alternatives = in_span_alternatives(model, culled, theta, all_points, r2);
    SpanReport redundancy = leave_one_out_redundancy(model, theta, all_points, r2);

    std::ofstream err(out_dir + "/error_table.txt");
    err << "raw model\n" << render_equations(model) << render_error_table(raw, model);
    err << "\nclosest-to-true model\n"
        << render_equations(transform.transformed)
        << render_error_table(transform.table, transform.transformed);

    std::ofstream span(out_dir + "/span_report.txt");
    span << "candidate alternatives\n"
         << render_span_report(alternatives, model.lib) << "\nleave-one-out redundancy\n"
         << render_span_report(redundancy, model.lib);

    std::cout << "raw errors:\n" << render_error_table(raw, model);
    std::cout << "closest-to-true errors:\n"
              << render_error_table(transform.table, transform.transformed);
    std::cout << "max relative error " << transform.max_err_before << " -> "
              << transform.max_err_after << "\n";
    return 0;
}

int cmd_report(const std::string& log_path, const std::string& out_dir_arg) {
    const std::string out_dir = resolve_out_dir(out_dir_arg);
    TrajectoryRunLog log = parse_run_log(log_path);
    const std::string stem =
        "_pass" + std::to_string(log.pass) + "_traj" + std::to_string(log.home_index);
    write_fom_mosaic(out_dir + "/fom" + stem + ".svg", out_dir + "/fom" + stem + ".csv", log);
    std::ofstream models(out_dir + "/models" + stem + ".txt");
    models << iteration_models_text(log);
    std::cout << "re-rendered " << log.records.size() << " iterations to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse dynamics discovery from noisy time-series"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a benchmark system and add noise");
    std::string sim_system, sim_ic, sim_out;
    double sim_duration = 0, sim_dt = 0.002, sim_noise = 0;
    uint64_t sim_seed = 1;
    bool sim_hermitian = false;
    sim->add_option("--system", sim_system, "registry name")->required();
    sim->add_option("--ic", sim_ic, "comma-separated initial condition");
    sim->add_option("--duration", sim_duration, "seconds (default: system preset)");
    sim->add_option("--dt", sim_dt, "timestep seconds");
    sim->add_option("--noise", sim_noise, "target noise level percent");
    sim->add_option("--seed", sim_seed, "noise seed");
    sim->add_flag("--hermitian", sim_hermitian, "Hermitian-symmetrize spectrum noise");
    sim->add_option("--out", sim_out, "output directory");

    // fit
    auto* fit = app.add_subcommand("fit", "run the full discovery pipeline");
    std::string fit_config, fit_out;
    std::vector<std::string> fit_overrides;
    fit->add_option("--config", fit_config, "run configuration file")->required();
    fit->add_option("--set", fit_overrides, "key=value config override (repeatable)");
    fit->add_option("--out", fit_out, "output directory");

    // assess
    auto* assess = app.add_subcommand("assess", "compare a model against a reference model");
    std::string as_model, as_reference, as_traj, as_out;
    double as_r2 = 0.95;
    long as_window = 0;
    assess->add_option("--model", as_model, "model file")->required();
    assess->add_option("--reference", as_reference, "reference model file")->required();
    assess->add_option("--trajectory", as_traj, "trajectory csv")->required();
    assess->add_option("--r2", as_r2, "substitution R^2 threshold");
    assess->add_option("--window", as_window, "smoothing window (0 = default)");
    assess->add_option("--out", as_out, "output directory");

    // report
    auto* report = app.add_subcommand("report", "re-render artifacts from an iteration log");
    std::string rep_log, rep_out;
    report->add_option("--log", rep_log, "iteration log (jsonl)")->required();
    report->add_option("--out", rep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_system, sim_ic, sim_duration, sim_dt, sim_noise, sim_seed,
                                sim_hermitian, sim_out);
        if (fit->parsed()) return cmd_fit(fit_config, fit_overrides, fit_out);
        if (assess->parsed())
            return cmd_assess(as_model, as_reference, as_traj, as_r2, as_window, as_out);
        if (report->parsed()) return cmd_report(rep_log, rep_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitUsage;
}
