#include <fstream>
#include <sstream>

#include "dynfit/io.hpp"
#include "dynfit/pipeline.hpp"

namespace dynfit {

namespace {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::vector<Series> series;
    std::optional<double> ideal;  // dotted horizontal reference
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// A grid of line panels, two columns wide.
void write_panels(const std::string& path, const std::vector<Panel>& panels,
                  const std::string& heading) {
    const int cols = 2;
    const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
    const double pw = 430, ph = 210, margin = 55, top = 40;
    const double width = cols * (pw + margin) + margin;
    const double height = top + rows * (ph + margin) + margin;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "' font-family='sans-serif' font-size='11'>\n";
    out << "<text x='" << margin << "' y='22' font-size='15'>" << heading << "</text>\n";

    for (size_t p = 0; p < panels.size(); ++p) {
        const Panel& panel = panels[p];
        const double ox = margin + (p % cols) * (pw + margin);
        const double oy = top + (p / cols) * (ph + margin);

        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool any = false;
        for (const auto& s : panel.series)
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                if (!any) {
                    xmin = xmax = s.x[i];
                    ymin = ymax = s.y[i];
                    any = true;
                } else {
                    xmin = std::min(xmin, s.x[i]);
                    xmax = std::max(xmax, s.x[i]);
                    ymin = std::min(ymin, s.y[i]);
                    ymax = std::max(ymax, s.y[i]);
                }
            }
        if (panel.ideal) {
            ymin = std::min(ymin, *panel.ideal);
            ymax = std::max(ymax, *panel.ideal);
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;

        auto sx = [&](double x) { return ox + (x - xmin) / (xmax - xmin) * pw; };
        auto sy = [&](double y) { return oy + ph - (y - ymin) / (ymax - ymin) * ph; };

        out << "<rect x='" << ox << "' y='" << oy << "' width='" << pw << "' height='" << ph
            << "' fill='none' stroke='#888'/>\n";
        out << "<text x='" << ox << "' y='" << oy - 6 << "'>" << panel.title << "</text>\n";
        out << "<text x='" << ox - 8 << "' y='" << sy(ymin) << "' text-anchor='end'>"
            << fmt(ymin) << "</text>\n";
        out << "<text x='" << ox - 8 << "' y='" << sy(ymax) + 8 << "' text-anchor='end'>"
            << fmt(ymax) << "</text>\n";
        out << "<text x='" << sx(xmax) << "' y='" << oy + ph + 14 << "' text-anchor='end'>"
            << fmt(xmax) << "</text>\n";

        if (panel.ideal) {
            out << "<line x1='" << ox << "' y1='" << sy(*panel.ideal) << "' x2='" << ox + pw
                << "' y2='" << sy(*panel.ideal)
                << "' stroke='#444' stroke-dasharray='3,4' stroke-width='1'/>\n";
        }
        double legend_y = oy + 14;
        for (const auto& s : panel.series) {
            std::ostringstream points;
            bool pen_up = true;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) {
                    pen_up = true;
                    continue;
                }
                points << (pen_up ? "M" : "L") << fmt(sx(s.x[i])) << " " << fmt(sy(s.y[i]))
                       << " ";
                pen_up = false;
            }
            out << "<path d='" << points.str() << "' fill='none' stroke='" << s.color
                << "' stroke-width='1.3'"
                << (s.dashed ? " stroke-dasharray='5,3'" : "") << "/>\n";
            if (!s.label.empty()) {
                out << "<text x='" << ox + pw - 6 << "' y='" << legend_y
                    << "' text-anchor='end' fill='" << s.color << "'>" << s.label
                    << "</text>\n";
                legend_y += 13;
            }
        }
    }
    out << "</svg>\n";
}

void write_panels_csv(const std::string& path, const std::vector<Panel>& panels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "panel,series,x,y\n";
    for (const auto& panel : panels)
        for (const auto& s : panel.series)
            for (size_t i = 0; i < s.x.size(); ++i)
                out << panel.title << "," << s.label << "," << format_double(s.x[i]) << ","
                    << format_double(s.y[i]) << "\n";
}

}  // namespace

void write_fom_mosaic(const std::string& svg_path, const std::string& csv_path,
                      const TrajectoryRunLog& log) {
    const int dim = log.records.empty() ? 0 : static_cast<int>(log.records[0].active_counts.size());

    std::vector<std::string> traj_keys;
    for (const auto& record : log.records)
        for (const auto& [key, fom] : record.foms)
            if (std::find(traj_keys.begin(), traj_keys.end(), key) == traj_keys.end())
                traj_keys.push_back(key);
    std::sort(traj_keys.begin(), traj_keys.end());

    enum Metric { kInEnv, kStdErr, kHist, kFft };
    const char* metric_names[] = {"in-envelope", "std rel err", "hist corr", "fft power corr"};
    const double ideals[] = {1.0, 0.0, 1.0, 1.0};

    std::vector<Panel> panels;
    Panel counts;
    counts.title = "active terms per variable";
    for (int j = 0; j < dim; ++j) {
        Series s;
        s.label = variable_name(j);
        s.color = kPalette[j % 8];
        for (const auto& record : log.records) {
            s.x.push_back(static_cast<double>(record.iteration));
            s.y.push_back(static_cast<double>(record.active_counts[static_cast<size_t>(j)]));
        }
        counts.series.push_back(std::move(s));
    }
    panels.push_back(std::move(counts));
    panels.push_back(Panel{"", {}, std::nullopt});  // spacer keeps home/val columns aligned

    for (int metric = kInEnv; metric <= kFft; ++metric) {
        for (int side = 0; side < 2; ++side) {  // 0 = home, 1 = others
            Panel panel;
            panel.title = std::string(metric_names[metric]) + (side == 0 ? " (home)" : " (val)");
            panel.ideal = ideals[metric];
            int color_index = 0;
            for (const auto& key : traj_keys) {
                const bool is_home = key == "home";
                if ((side == 0) != is_home) continue;
                for (int j = 0; j < dim; ++j) {
                    Series s;
                    s.label = key + ":" + variable_name(j);
                    s.color = kPalette[color_index % 8];
                    ++color_index;
                    for (const auto& record : log.records) {
                        auto it = record.foms.find(key);
                        double v = std::numeric_limits<double>::quiet_NaN();
                        if (it != record.foms.end() && it->second.evolution_ok) {
                            switch (metric) {
                                case kInEnv: v = it->second.in_envelope_frac[j]; break;
                                case kStdErr: v = it->second.std_rel_err[j]; break;
                                case kHist: v = it->second.hist_corr[j]; break;
                                default: v = it->second.fft_power_corr[j]; break;
                            }
                        }
                        s.x.push_back(static_cast<double>(record.iteration));
                        s.y.push_back(v);
                    }
                    panel.series.push_back(std::move(s));
                }
            }
            panels.push_back(std::move(panel));
        }
    }
    write_panels(svg_path, panels,
                 "FoM history, home trajectory " + std::to_string(log.home_index) + " pass " +
                     std::to_string(log.pass));
    write_panels_csv(csv_path, panels);
}

void write_overlay_plot(const std::string& svg_path, const std::string& csv_path,
                        const Trajectory& reference, const Trajectory& prediction) {
    std::vector<Panel> panels;
    for (int j = 0; j < reference.dim(); ++j) {
        Panel panel;
        panel.title = variable_name(j) + std::string("(t)");
        Series ref;
        ref.label = "reference";
        ref.color = "#555555";
        Series pred;
        pred.label = "model";
        pred.color = "#d62728";
        for (long t = 0; t < reference.n(); ++t) {
            ref.x.push_back(reference.time_at(t));
            ref.y.push_back(reference.values(t, j));
        }
        for (long t = 0; t < prediction.n(); ++t) {
            pred.x.push_back(prediction.time_at(t));
            pred.y.push_back(prediction.values(t, j));
        }
        panel.series.push_back(std::move(ref));
        panel.series.push_back(std::move(pred));
        panels.push_back(std::move(panel));
    }
    write_panels(svg_path, panels, "evolved model vs smoothed reference");
    write_panels_csv(csv_path, panels);
}

}  // namespace dynfit
