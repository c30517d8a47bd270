#include "dynfit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dynfit/pipeline.hpp"

namespace dynfit {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string format_short(double v, int precision) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (c == sep) {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t";
    for (int j = 0; j < traj.dim(); ++j) out << ",x" << (j + 1);
    if (traj.clean_ref)
        for (int j = 0; j < traj.dim(); ++j) out << ",clean_x" << (j + 1);
    out << "\n";
    for (long t = 0; t < traj.n(); ++t) {
        out << format_double(traj.time_at(t));
        for (int j = 0; j < traj.dim(); ++j) out << "," << format_double(traj.values(t, j));
        if (traj.clean_ref)
            for (int j = 0; j < traj.dim(); ++j)
                out << "," << format_double((*traj.clean_ref)(t, j));
        out << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty csv: " + path);
    const auto cols = split(trim(header), ',');
    if (cols.empty() || cols[0] != "t")
        throw std::runtime_error("csv header must start with t: " + path);
    int dim = 0, clean = 0;
    for (size_t c = 1; c < cols.size(); ++c) {
        if (cols[c].rfind("clean_", 0) == 0)
            ++clean;
        else
            ++dim;
    }
    if (dim == 0 || (clean != 0 && clean != dim))
        throw std::runtime_error("csv header malformed: " + path);

    std::vector<double> times;
    std::vector<double> data;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (static_cast<int>(fields.size()) != 1 + dim + clean)
            throw std::runtime_error("csv row width mismatch: " + path);
        times.push_back(std::stod(fields[0]));
        for (size_t f = 1; f < fields.size(); ++f) data.push_back(std::stod(fields[f]));
    }
    const long n = static_cast<long>(times.size());
    if (n < 5) throw std::runtime_error("trajectory too short: " + path);

    Trajectory traj;
    traj.t0 = times[0];
    traj.dt = n > 1 ? (times.back() - times.front()) / static_cast<double>(n - 1) : 1.0;
    traj.values.resize(n, dim);
    Mat clean_values;
    if (clean) clean_values.resize(n, dim);
    const long width = dim + clean;
    for (long t = 0; t < n; ++t) {
        for (int j = 0; j < dim; ++j) traj.values(t, j) = data[static_cast<size_t>(t * width + j)];
        if (clean)
            for (int j = 0; j < dim; ++j)
                clean_values(t, j) = data[static_cast<size_t>(t * width + dim + j)];
    }
    if (clean) traj.clean_ref = clean_values;
    traj.validate();
    return traj;
}

// ---- model files ----

namespace {

std::string term_token(const FunctionalTerm& term) { return term_name(term); }

FunctionalTerm parse_term_token(const std::string& token, int dim) {
    FunctionalTerm term;
    term.exponents.assign(static_cast<size_t>(dim), 0);
    if (token == "1") return term;
    for (const auto& factor : split(token, '*')) {
        const auto caret = factor.find('^');
        const std::string name = caret == std::string::npos ? factor : factor.substr(0, caret);
        const int power =
            caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
        int var = -1;
        for (int v = 0; v < dim; ++v)
            if (variable_name(v) == name) var = v;
        if (var < 0) throw std::runtime_error("unknown variable in term: " + token);
        term.exponents[static_cast<size_t>(var)] += power;
    }
    return term;
}

}  // namespace

std::string dump_model(const SparseModel& model) {
    std::ostringstream out;
    int max_degree = 1;
    bool constant = false;
    for (const auto& term : model.lib.terms) {
        max_degree = std::max(max_degree, term.degree());
        if (term.is_constant()) constant = true;
    }
    out << "model v1\n";
    out << "dim " << model.dim() << " degree " << max_degree << " constant "
        << (constant ? 1 : 0) << "\n";
    for (int j = 0; j < model.dim(); ++j) {
        out << "eq " << variable_name(j) << " =";
        const auto active = model.lib.active_terms(j);
        if (active.empty()) {
            out << " 0";
        } else {
            bool first = true;
            for (long i : active) {
                out << (first ? " " : " + ") << format_double(model.coef(j, i)) << "*"
                    << term_token(model.lib.terms[static_cast<size_t>(i)]);
                first = false;
            }
        }
        out << "\n";
    }
    out << "end\n";
    return out.str();
}

SparseModel parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "model v1")
        throw std::runtime_error("not a model file");
    if (!std::getline(in, line)) throw std::runtime_error("truncated model file");
    int dim = 0, degree = 0, constant = 0;
    if (std::sscanf(line.c_str(), "dim %d degree %d constant %d", &dim, &degree, &constant) != 3)
        throw std::runtime_error("bad model header: " + line);

    SparseModel model(build_polynomial_library(dim, degree, constant != 0));
    model.lib.deactivate_all();
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line == "end") break;
        if (line.rfind("eq ", 0) != 0) throw std::runtime_error("bad model line: " + line);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad model line: " + line);
        const std::string lhs = trim(line.substr(3, eq - 3));
        int var = -1;
        for (int v = 0; v < dim; ++v)
            if (variable_name(v) == lhs) var = v;
        if (var < 0) throw std::runtime_error("unknown equation variable: " + lhs);
        const std::string rhs = trim(line.substr(eq + 1));
        if (rhs == "0") continue;
        for (const auto& piece : split(rhs, '+')) {
            const std::string entry = trim(piece);
            const auto star = entry.find('*');
            if (star == std::string::npos)
                throw std::runtime_error("bad model term: " + entry);
            const double coef = std::stod(entry.substr(0, star));
            const FunctionalTerm term = parse_term_token(entry.substr(star + 1), dim);
            const long idx = model.lib.find_term(term.exponents);
            if (idx < 0) throw MismatchedLibrary("term outside library: " + entry);
            model.lib.set_active(var, idx, true);
            model.coef(var, idx) = coef;
        }
    }
    return model;
}

void write_model(const std::string& path, const SparseModel& model) {
    open_out(path) << dump_model(model);
}

SparseModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string render_equations(const SparseModel& model, int precision) {
    std::ostringstream out;
    for (int j = 0; j < model.dim(); ++j) {
        out << "d" << variable_name(j) << "/dt =";
        const auto active = model.lib.active_terms(j);
        if (active.empty()) {
            out << " 0";
        } else {
            bool first = true;
            for (long i : active) {
                const double c = model.coef(j, i);
                const auto& term = model.lib.terms[static_cast<size_t>(i)];
                if (first) {
                    out << " " << format_short(c, precision);
                } else {
                    out << (c < 0 ? " - " : " + ") << format_short(std::abs(c), precision);
                }
                if (!term.is_constant()) out << " " << term_token(term);
                first = false;
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string render_error_tuple(const ErrorTable& table, int variable,
                               const FunctionalLibrary& lib) {
    // True-term errors and extras interleaved in library term order, matching
    // the printed equation's term order.
    std::map<long, std::string> slots;
    for (const auto& e : table.entries) {
        if (e.variable != variable) continue;
        switch (e.kind) {
            case ErrorEntry::Kind::error:
                slots[e.term] = std::to_string(static_cast<long long>(std::llround(e.err_pct)));
                break;
            case ErrorEntry::Kind::missing: slots[e.term] = "inf"; break;
            case ErrorEntry::Kind::extra: slots[e.term] = "*"; break;
        }
    }
    std::string out = "(";
    bool first = true;
    for (const auto& [term, text] : slots) {
        (void)term;
        if (!first) out += ", ";
        out += text;
        first = false;
    }
    out += ")";
    (void)lib;
    return out;
}

std::string render_error_table(const ErrorTable& table, const SparseModel& assessed) {
    std::ostringstream out;
    for (int j = 0; j < assessed.dim(); ++j) {
        out << "d" << variable_name(j) << "/dt  ";
        out << render_error_tuple(table, j, assessed.lib) << "\n";
    }
    return out.str();
}

std::string render_span_report(const SpanReport& report, const FunctionalLibrary& lib) {
    std::ostringstream out;
    out << "r2 threshold " << format_short(report.r2_threshold, 6) << "\n";
    for (const auto& entry : report.entries) {
        out << variable_name(entry.variable) << ": "
            << term_token(lib.terms[static_cast<size_t>(entry.term)]) << " ~";
        for (size_t k = 0; k < entry.basis.size(); ++k) {
            out << (k == 0 ? " " : " + ") << format_short(entry.betas[static_cast<long>(k)], 4)
                << "*" << term_token(lib.terms[static_cast<size_t>(entry.basis[k])]);
        }
        if (entry.intercept != 0.0) out << " + " << format_short(entry.intercept, 4);
        out << "  r2=" << format_short(entry.r2, 4);
        if (entry.alternative) out << "  IN-SPAN";
        out << "\n";
    }
    return out.str();
}

// ---- iteration log ----

namespace {

json fom_to_json(const FomSuite& fom) {
    json out;
    out["ok"] = fom.evolution_ok;
    if (!fom.evolution_ok) return out;
    auto vec = [](const Vec& v) {
        std::vector<double> data(v.data(), v.data() + v.size());
        return data;
    };
    out["stability"] = std::isfinite(fom.stability) ? json(fom.stability) : json();
    out["in_bounds"] = vec(fom.in_bounds_frac);
    out["in_env"] = vec(fom.in_envelope_frac);
    out["std_rel_err"] = vec(fom.std_rel_err);
    out["fft_corr"] = vec(fom.fft_power_corr);
    out["hist_corr"] = vec(fom.hist_corr);
    return out;
}

}  // namespace

std::string record_to_json(const IterationRecord& record) {
    json out;
    out["iter"] = record.iteration;
    out["pass"] = record.pass;
    json event;
    event["kind"] = to_string(record.event.kind);
    if (record.event.kind != CullEvent::Kind::none) {
        event["var"] = variable_name(record.event.variable);
        event["term"] =
            term_token(record.model.lib.terms[static_cast<size_t>(record.event.term)]);
        if (record.event.r2) event["r2"] = *record.event.r2;
    }
    out["event"] = event;
    out["counts"] = record.active_counts;
    out["skipped"] = record.foms_skipped;
    if (record.rank_trouble) out["rank_trouble"] = true;

    json model;
    for (int j = 0; j < record.model.dim(); ++j) {
        json row = json::array();
        for (long i : record.model.lib.active_terms(j)) {
            row.push_back(json::array(
                {term_token(record.model.lib.terms[static_cast<size_t>(i)]),
                 record.model.coef(j, i)}));
        }
        model[variable_name(j)] = row;
    }
    out["model"] = model;

    if (!record.foms_skipped) {
        json foms;
        for (const auto& [key, fom] : record.foms) foms[key] = fom_to_json(fom);
        out["foms"] = foms;
    }
    return out.dump();
}

std::string run_log_to_string(const TrajectoryRunLog& log) {
    std::ostringstream out;
    json header;
    header["type"] = "run_header";
    header["home"] = log.home_index;
    header["pass"] = log.pass;
    if (!log.records.empty()) {
        const FunctionalLibrary& lib = log.records.front().model.lib;
        int degree = 1;
        bool constant = false;
        for (const auto& term : lib.terms) {
            degree = std::max(degree, term.degree());
            if (term.is_constant()) constant = true;
        }
        header["dim"] = lib.dim;
        header["degree"] = degree;
        header["constant"] = constant;
    }
    if (log.measured_noise_pct.size() > 0) {
        std::vector<double> levels(log.measured_noise_pct.data(),
                                   log.measured_noise_pct.data() + log.measured_noise_pct.size());
        header["measured_noise_pct"] = levels;
    }
    out << header.dump() << "\n";
    for (const auto& record : log.records) out << record_to_json(record) << "\n";
    json footer;
    footer["type"] = "run_footer";
    footer["aborted"] = log.aborted;
    if (log.aborted) footer["reason"] = log.abort_reason;
    if (!log.removed_variables.empty()) {
        std::vector<std::string> removed;
        for (int v : log.removed_variables) removed.push_back(variable_name(v));
        footer["removed_variables"] = removed;
    }
    out << footer.dump() << "\n";
    return out.str();
}

void write_run_log(const std::string& path, const TrajectoryRunLog& log) {
    open_out(path) << run_log_to_string(log);
}

TrajectoryRunLog parse_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    TrajectoryRunLog log;
    FunctionalLibrary lib;
    bool have_lib = false;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        if (j.contains("type") && j["type"] == "run_header") {
            log.home_index = j.value("home", 0);
            log.pass = j.value("pass", 1);
            if (j.contains("dim")) {
                lib = build_polynomial_library(j["dim"].get<int>(), j["degree"].get<int>(),
                                               j["constant"].get<bool>());
                have_lib = true;
            }
            if (j.contains("measured_noise_pct")) {
                const auto levels = j["measured_noise_pct"].get<std::vector<double>>();
                log.measured_noise_pct =
                    Eigen::Map<const Vec>(levels.data(), static_cast<long>(levels.size()));
            }
            continue;
        }
        if (j.contains("type") && j["type"] == "run_footer") {
            log.aborted = j.value("aborted", false);
            log.abort_reason = j.value("reason", std::string());
            if (j.contains("removed_variables"))
                for (const auto& name : j["removed_variables"]) {
                    for (int v = 0; v < lib.dim; ++v)
                        if (variable_name(v) == name.get<std::string>())
                            log.removed_variables.push_back(v);
                }
            continue;
        }
        if (!have_lib) throw std::runtime_error("log record before header: " + path);

        IterationRecord record;
        record.iteration = j["iter"].get<long>();
        record.pass = j["pass"].get<int>();
        record.active_counts = j["counts"].get<std::vector<long>>();
        record.foms_skipped = j.value("skipped", false);
        record.rank_trouble = j.value("rank_trouble", false);

        SparseModel model(lib);
        model.lib.deactivate_all();
        for (int var = 0; var < lib.dim; ++var) {
            const std::string key = variable_name(var);
            if (!j["model"].contains(key)) continue;
            for (const auto& pair : j["model"][key]) {
                const FunctionalTerm term =
                    parse_term_token(pair[0].get<std::string>(), lib.dim);
                const long idx = model.lib.find_term(term.exponents);
                if (idx < 0) throw std::runtime_error("log term outside library");
                model.lib.set_active(var, idx, true);
                model.coef(var, idx) = pair[1].get<double>();
            }
        }
        record.model = std::move(model);

        const auto& ev = j["event"];
        const std::string kind = ev["kind"].get<std::string>();
        if (kind != "none") {
            record.event.kind = kind == "lin_dep"    ? CullEvent::Kind::lin_dep
                                : kind == "threshold" ? CullEvent::Kind::threshold
                                                      : CullEvent::Kind::restore;
            for (int v = 0; v < lib.dim; ++v)
                if (variable_name(v) == ev["var"].get<std::string>()) record.event.variable = v;
            const FunctionalTerm term = parse_term_token(ev["term"].get<std::string>(), lib.dim);
            record.event.term = record.model.lib.find_term(term.exponents);
            if (ev.contains("r2")) record.event.r2 = ev["r2"].get<double>();
        }

        if (j.contains("foms")) {
            for (const auto& [key, fj] : j["foms"].items()) {
                FomSuite fom;
                fom.evolution_ok = fj.value("ok", false);
                if (fom.evolution_ok) {
                    auto vec = [&fj](const char* name) {
                        const auto v = fj[name].get<std::vector<double>>();
                        return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()))
                            .eval();
                    };
                    fom.stability = fj["stability"].is_null()
                                        ? std::numeric_limits<double>::infinity()
                                        : fj["stability"].get<double>();
                    fom.in_bounds_frac = vec("in_bounds");
                    fom.in_envelope_frac = vec("in_env");
                    fom.std_rel_err = vec("std_rel_err");
                    fom.fft_power_corr = vec("fft_corr");
                    fom.hist_corr = vec("hist_corr");
                }
                record.foms[key] = std::move(fom);
            }
        }
        log.records.push_back(std::move(record));
    }
    return log;
}

std::string iteration_models_text(const TrajectoryRunLog& log) {
    std::ostringstream out;
    for (const auto& record : log.records) {
        out << "iteration " << record.iteration;
        if (record.event.kind != CullEvent::Kind::none) {
            out << "  [" << to_string(record.event.kind) << " "
                << variable_name(record.event.variable) << ": "
                << term_token(record.model.lib.terms[static_cast<size_t>(record.event.term)])
                << "]";
        }
        out << "\n" << render_equations(record.model) << "\n";
    }
    return out.str();
}

// ---- configuration ----

namespace {

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("not a boolean: " + v);
}

std::vector<Vec> parse_ic_list(const std::string& v) {
    std::vector<Vec> out;
    for (const auto& group : split(v, ';')) {
        const std::string g = trim(group);
        if (g.empty()) continue;
        const auto parts = split(g, ',');
        Vec ic(static_cast<long>(parts.size()));
        for (size_t i = 0; i < parts.size(); ++i) ic[static_cast<long>(i)] = std::stod(trim(parts[i]));
        out.push_back(ic);
    }
    return out;
}

std::vector<std::string> parse_file_list(const std::string& v) {
    std::vector<std::string> out;
    for (const auto& item : split(v, ';')) {
        const std::string s = trim(item);
        if (!s.empty()) out.push_back(s);
    }
    return out;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "system") cfg.system = value;
    else if (key == "duration") cfg.duration = std::stod(value);
    else if (key == "dt") cfg.dt = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "train.ics") cfg.train_ics = parse_ic_list(value);
    else if (key == "val.ics") cfg.val_ics = parse_ic_list(value);
    else if (key == "train.files") cfg.train_files = parse_file_list(value);
    else if (key == "val.files") cfg.val_files = parse_file_list(value);
    else if (key == "noise.level") cfg.noise_pct = std::stod(value);
    else if (key == "noise.hermitian") cfg.noise_hermitian = parse_bool(value);
    else if (key == "library.degree") cfg.max_degree = std::stoi(value);
    else if (key == "library.constant") cfg.include_constant = parse_bool(value);
    else if (key == "smooth.window") cfg.smooth_window = std::stol(value);
    else if (key == "weights.halfwidth") cfg.weight_halfwidth = std::stol(value);
    else if (key == "weights.z_floor") cfg.z_floor = std::stod(value);
    else if (key == "regress.n_subsets") cfg.regress.n_subsets = std::stoi(value);
    else if (key == "regress.subset_fraction") cfg.regress.subset_fraction = std::stod(value);
    else if (key == "regress.fft_mode") cfg.regress.fft_mode = fft_mode_from_string(value);
    else if (key == "regress.fft_block_scale") cfg.regress.fft_block_scale = std::stod(value);
    else if (key == "regress.ratio_threshold") cfg.regress.ratio_threshold = std::stod(value);
    else if (key == "regress.rank_rcond") cfg.regress.rank_rcond = std::stod(value);
    else if (key == "rescale.percentile") cfg.percentile_m = std::stod(value);
    else if (key == "cull.balance_limit")
        cfg.balance_limit = value == "none" ? -1 : std::stoi(value);
    else if (key == "cull.r2_threshold") cfg.r2_threshold = std::stod(value);
    else if (key == "cull.protect_span") cfg.protect_span = std::stoi(value);
    else if (key == "cull.degradation_fraction") cfg.degradation_fraction = std::stod(value);
    else if (key == "cull.restore_budget") cfg.restore_budget = std::stoi(value);
    else if (key == "evolve.state_bound") cfg.limits.state_bound = std::stod(value);
    else if (key == "evolve.wall_clock_cap") cfg.limits.wall_clock_cap = std::stod(value);
    else if (key == "evolve.max_steps") cfg.limits.max_steps = std::stol(value);
    else if (key == "evolve.abs_tol") cfg.limits.abs_tol = std::stod(value);
    else if (key == "evolve.rel_tol") cfg.limits.rel_tol = std::stod(value);
    else if (key == "evolve.n_repeats") cfg.n_repeats = std::stoi(value);
    else if (key == "evolve.ic_k") cfg.ic_k = std::stol(value);
    else if (key == "pipeline.density_threshold") cfg.density_threshold = std::stol(value);
    else if (key == "pipeline.restart") cfg.restart_enabled = parse_bool(value);
    else if (key == "pipeline.max_restarts") cfg.max_restarts = std::stoi(value);
    else if (key == "pipeline.max_iterations") cfg.max_iterations = std::stol(value);
    else if (key == "pipeline.tie_eps") cfg.select_tie_eps = std::stod(value);
    else if (key == "pipeline.reinstate") {
        cfg.reinstate.clear();
        for (const auto& item : split(value, ';')) {
            const std::string s = trim(item);
            if (s.empty()) continue;
            const auto colon = s.find(':');
            if (colon == std::string::npos)
                throw ConfigError("reinstate entries look like var:term, got " + s);
            const std::string var_name = trim(s.substr(0, colon));
            int var = -1;
            for (int v = 0; v < 8; ++v)
                if (variable_name(v) == var_name) var = v;
            if (var < 0) throw ConfigError("unknown variable: " + var_name);
            // Dimension is unknown while parsing; exponents are padded later.
            FunctionalTerm term = parse_term_token(trim(s.substr(colon + 1)), 8);
            while (!term.exponents.empty() && term.exponents.back() == 0)
                term.exponents.pop_back();
            cfg.reinstate.emplace_back(var, term.exponents);
        }
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    RunConfig cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto kv = [&out](const std::string& key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    if (!cfg.system.empty()) kv("system", cfg.system);
    kv("duration", format_double(cfg.duration));
    kv("dt", format_double(cfg.dt));
    kv("seed", std::to_string(cfg.seed));
    auto ics = [](const std::vector<Vec>& list) {
        std::string s;
        for (size_t i = 0; i < list.size(); ++i) {
            if (i) s += "; ";
            for (long j = 0; j < list[i].size(); ++j) {
                if (j) s += ",";
                s += format_double(list[i][j]);
            }
        }
        return s;
    };
    if (!cfg.train_ics.empty()) kv("train.ics", ics(cfg.train_ics));
    if (!cfg.val_ics.empty()) kv("val.ics", ics(cfg.val_ics));
    auto files = [](const std::vector<std::string>& list) {
        std::string s;
        for (size_t i = 0; i < list.size(); ++i) {
            if (i) s += "; ";
            s += list[i];
        }
        return s;
    };
    if (!cfg.train_files.empty()) kv("train.files", files(cfg.train_files));
    if (!cfg.val_files.empty()) kv("val.files", files(cfg.val_files));
    kv("noise.level", format_double(cfg.noise_pct));
    kv("noise.hermitian", cfg.noise_hermitian ? "true" : "false");
    kv("library.degree", std::to_string(cfg.max_degree));
    kv("library.constant", cfg.include_constant ? "true" : "false");
    kv("smooth.window", std::to_string(cfg.smooth_window));
    kv("weights.halfwidth", std::to_string(cfg.weight_halfwidth));
    kv("weights.z_floor", format_double(cfg.z_floor));
    kv("regress.n_subsets", std::to_string(cfg.regress.n_subsets));
    kv("regress.subset_fraction", format_double(cfg.regress.subset_fraction));
    kv("regress.fft_mode", to_string(cfg.regress.fft_mode));
    kv("regress.fft_block_scale", format_double(cfg.regress.fft_block_scale));
    kv("regress.ratio_threshold", format_double(cfg.regress.ratio_threshold));
    kv("regress.rank_rcond", format_double(cfg.regress.rank_rcond));
    kv("rescale.percentile", format_double(cfg.percentile_m));
    kv("cull.balance_limit",
       cfg.balance_limit < 0 ? "none" : std::to_string(cfg.balance_limit));
    kv("cull.r2_threshold", format_double(cfg.r2_threshold));
    kv("cull.protect_span", std::to_string(cfg.protect_span));
    kv("cull.degradation_fraction", format_double(cfg.degradation_fraction));
    kv("cull.restore_budget", std::to_string(cfg.restore_budget));
    kv("evolve.state_bound", format_double(cfg.limits.state_bound));
    kv("evolve.wall_clock_cap", format_double(cfg.limits.wall_clock_cap));
    kv("evolve.max_steps", std::to_string(cfg.limits.max_steps));
    kv("evolve.abs_tol", format_double(cfg.limits.abs_tol));
    kv("evolve.rel_tol", format_double(cfg.limits.rel_tol));
    kv("evolve.n_repeats", std::to_string(cfg.n_repeats));
    kv("evolve.ic_k", std::to_string(cfg.ic_k));
    kv("pipeline.density_threshold", std::to_string(cfg.density_threshold));
    kv("pipeline.restart", cfg.restart_enabled ? "true" : "false");
    kv("pipeline.max_restarts", std::to_string(cfg.max_restarts));
    kv("pipeline.max_iterations", std::to_string(cfg.max_iterations));
    kv("pipeline.tie_eps", format_double(cfg.select_tie_eps));
    if (!cfg.out_dir.empty()) kv("out", cfg.out_dir);
    return out.str();
}

}  // namespace dynfit
