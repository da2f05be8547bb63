#pragma once

// Experiment tables (markdown + JSON) and SVG line plots of per-subject
// feature values across conditions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hepot/config.hpp"
#include "hepot/evaluation.hpp"
#include "hepot/selection.hpp"

namespace hepot::report {

inline std::string pct(double x) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * x);
    return buf;
}

inline std::string num(double x, int digits = 1) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

/// Confusion matrix with totals; rows are ground truth.
inline std::string confusion_table(const ConfusionMatrix& c) {
    static const char* names[] = {"Normal", "Time", "Multi"};
    std::ostringstream o;
    o << "| GT \\ Estimated | Normal | Time | Multi | Total |\n|---|---:|---:|---:|---:|\n";
    Eigen::Vector3d col = Eigen::Vector3d::Zero();
    for (int r = 0; r < 3; ++r) {
        o << "| " << names[r];
        double row = 0.0;
        for (int k = 0; k < 3; ++k) {
            o << " | " << num(c.m(r, k));
            row += c.m(r, k);
            col(k) += c.m(r, k);
        }
        o << " | " << num(row) << " |\n";
    }
    o << "| Total | " << num(col(0)) << " | " << num(col(1)) << " | " << num(col(2)) << " | " << num(col.sum())
      << " |\n";
    return o.str();
}

struct Row {
    std::vector<std::string> cells;
    std::optional<EvalReport> eval;
};

struct Table {
    std::string key;
    std::string title;
    std::vector<std::string> header;
    std::vector<Row> rows;
    std::string note;
};

inline std::string render(const Table& t) {
    std::ostringstream o;
    o << "## " << t.title << "\n\n|";
    for (const auto& h : t.header) o << ' ' << h << " |";
    o << "\n|";
    for (std::size_t i = 0; i < t.header.size(); ++i) o << "---|";
    o << '\n';
    for (const auto& r : t.rows) {
        o << '|';
        for (const auto& c : r.cells) o << ' ' << c << " |";
        o << '\n';
    }
    if (!t.note.empty()) o << '\n' << t.note << '\n';
    o << '\n';
    return o.str();
}

inline nlohmann::json to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json j{{"cells", r.cells}};
        if (r.eval) j["acc3"] = r.eval->mean.acc3, j["acc2"] = r.eval->mean.acc2;
        rows.push_back(std::move(j));
    }
    return {{"title", t.title}, {"header", t.header}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// SVG

inline std::string svg_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

/// One polyline per subject through its cycle-averaged values under each
/// condition. Missing values break the line.
inline std::string feature_plot_svg(const FeatureTable& t, std::size_t feature) {
    std::map<std::string, std::array<std::pair<double, int>, kConditionCount>> per_subject;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : t.rows) {
        if (!r.condition || !r.values[feature]) continue;
        auto& cell = per_subject[r.subject][static_cast<std::size_t>(*r.condition)];
        cell.first += *r.values[feature];
        cell.second += 1;
    }
    for (auto& [s, cells] : per_subject)
        for (auto& c : cells)
            if (c.second) {
                c.first /= c.second;
                lo = std::min(lo, c.first);
                hi = std::max(hi, c.first);
            }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;

    const double W = 420, H = 300, L = 70, R = 20, T = 36, B = 40;
    auto xs = [&](std::size_t k) { return L + (W - L - R) * (0.1 + 0.4 * static_cast<double>(k)); };
    auto ys = [&](double v) { return T + (H - T - B) * (1.0 - (v - lo) / (hi - lo)); };
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << svg_escape(feature_registry()[feature].name) << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        o << "<text x=\"" << L - 6 << "\" y=\"" << ys(v) + 4 << "\" text-anchor=\"end\">" << num(v, 3) << "</text>\n";
        o << "<line x1=\"" << L - 3 << "\" y1=\"" << ys(v) << "\" x2=\"" << L << "\" y2=\"" << ys(v) << "\" stroke=\"black\"/>\n";
    }
    for (std::size_t k = 0; k < kConditionCount; ++k)
        o << "<text x=\"" << xs(k) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
          << short_label(kConditions[k]) << "</text>\n";
    std::size_t idx = 0;
    for (const auto& [s, cells] : per_subject) {
        const char* color = palette[idx++ % 10];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        for (std::size_t k = 0; k < kConditionCount; ++k) {
            if (!cells[k].second) {
                flush();
                continue;
            }
            pts += num(xs(k), 1) + "," + num(ys(cells[k].first), 1) + " ";
            o << "<circle cx=\"" << num(xs(k), 1) << "\" cy=\"" << num(ys(cells[k].first), 1) << "\" r=\"2.5\" fill=\""
              << color << "\"><title>" << svg_escape(s) << "</title></circle>\n";
        }
        flush();
    }
    o << "</svg>\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// Study

struct Inputs {
    FeatureTable relative;
    std::optional<FeatureTable> absolute;
    RunConfig cfg;
    bool greedy = false;  // greedy search is by far the slowest row
};

struct Output {
    std::vector<Table> tables;
    std::optional<EvalReport> main, loso;
    std::string markdown;
    nlohmann::json json;
};

inline std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    for (auto x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) out.push_back(x);
    return out;
}

inline Output run(const Inputs& in) {
    const auto& cfg = in.cfg;
    const std::size_t workers = cfg.worker_count();
    const auto fixed = fixed_list(cfg.fixed_features).columns();
    const auto live = sensor_mask(cfg.sensor_groups());

    FitConfig base;
    base.model = cfg.model;
    auto eval = [&](const FeatureTable& t, std::vector<std::size_t> cols, std::optional<int> pca = {},
                    std::optional<ModelConfig> model = {}) {
        FitConfig f = base;
        f.columns = std::move(cols);
        f.pca_components = pca;
        if (model) f.model = *model;
        return cv_by_cycle(t, f, workers);
    };
    auto row = [](std::vector<std::string> cells, const EvalReport& r) {
        cells.push_back(pct(r.mean.acc3));
        cells.push_back(pct(r.mean.acc2));
        return Row{std::move(cells), r};
    };

    Output out;
    const auto main_cols = intersect(fixed, live).empty() ? live : intersect(fixed, live);
    out.main = eval(in.relative, main_cols);
    out.main->selection = "analysis-based";

    {
        Table t{"preprocessing", "Feature pre-processing", {"Pre-processing", "3 classes", "2 classes"}, {}, {}};
        if (in.absolute) t.rows.push_back(row({"Absolute"}, eval(*in.absolute, main_cols)));
        else t.note = "Absolute features were not supplied; only the relative row is shown.";
        t.rows.push_back(row({"Relative"}, *out.main));
        out.tables.push_back(std::move(t));
    }
    {
        Table t{"ablation", "Feature selection (FS) and movement features (MF)",
                {"#", "FS", "MF", "#F", "3 classes", "2 classes"}, {}, {}};
        const auto bio = biometric_columns();
        const auto bio_fixed = intersect(fixed, bio);
        t.rows.push_back(row({"1", "", "", std::to_string(bio.size())}, eval(in.relative, bio)));
        if (!bio_fixed.empty())
            t.rows.push_back(row({"2", "x", "", std::to_string(bio_fixed.size())}, eval(in.relative, bio_fixed)));
        t.rows.push_back(row({"3", "", "x", std::to_string(kFeatureCount)}, eval(in.relative, all_columns())));
        t.rows.push_back(row({"4", "x", "x", std::to_string(fixed.size())}, eval(in.relative, fixed)));
        out.tables.push_back(std::move(t));
    }
    {
        Table t{"selection", "Feature-selection methods", {"#", "Feature selection", "#F", "3 classes", "2 classes"}, {}, {}};
        t.rows.push_back(row({"1", "All features", std::to_string(live.size())}, eval(in.relative, live)));
        const int k = std::min<int>(cfg.pca_components, static_cast<int>(live.size()));
        t.rows.push_back(row({"2", "PCA", std::to_string(k)}, eval(in.relative, live, k)));
        if (in.greedy) {
            FitConfig f = base;
            const auto sel = greedy_select(
                live, cfg.select_n,
                [&](const std::vector<std::size_t>& cols) {
                    FitConfig g = f;
                    g.columns = cols;
                    return cv_by_cycle(in.relative, g, 1).mean.acc3;
                },
                workers);
            t.rows.push_back(row({"3", "Greedy", std::to_string(sel.features.size())}, eval(in.relative, sel.columns())));
        } else {
            t.note = "Greedy row skipped (enable with --greedy).";
        }
        t.rows.push_back(row({"4", "Analysis-based", std::to_string(fixed.size())}, eval(in.relative, fixed)));
        out.tables.push_back(std::move(t));
    }
    {
        Table t{"models", "Classification methods", {"Classification method", "3 classes", "2 classes"}, {}, {}};
        ModelConfig knn = cfg.model;
        knn.kind = ModelKind::Knn;
        ModelConfig mlp = cfg.model;
        mlp.kind = ModelKind::Mlp;
        t.rows.push_back(row({"k nearest neighbor (k=" + std::to_string(knn.knn_k) + ")"}, eval(in.relative, main_cols, {}, knn)));
        t.rows.push_back(row({"Neural network"}, eval(in.relative, main_cols, {}, mlp)));
        out.tables.push_back(std::move(t));
    }
    {
        Table t{"sensors", "Sensor combinations",
                {"#", "Fixed camera", "Smart watch", "EOG", "EEG", "ETG", "ECG", "#F", "3 classes", "2 classes"}, {}, {}};
        const std::vector<std::vector<std::string>> combos = {
            {"camera"}, {"smartwatch"}, {"camera", "smartwatch"}, {"camera", "smartwatch", "eog"},
            {"camera", "smartwatch", "eeg"}, {"camera", "smartwatch", "etg"}, {"camera", "smartwatch", "ecg"},
            {"camera", "smartwatch", "eog", "eeg", "etg", "ecg"}};
        for (std::size_t i = 0; i < combos.size(); ++i) {
            const auto groups = parse_sensor_groups(combos[i]);
            const auto mask = sensor_mask(groups);
            auto cols = intersect(fixed, mask);
            if (cols.empty()) cols = mask;
            std::vector<std::string> cells{std::to_string(i + 1)};
            for (const char* d : {"camera", "smartwatch", "eog", "eeg", "etg", "ecg"})
                cells.push_back(std::find(combos[i].begin(), combos[i].end(), d) != combos[i].end() ? "x" : "");
            cells.push_back(std::to_string(cols.size()));
            t.rows.push_back(row(std::move(cells), eval(in.relative, cols)));
        }
        t.note = "Each combination uses the analysis-based features of its sensors, or all of them when none is listed.";
        out.tables.push_back(std::move(t));
    }
    {
        FitConfig f = base;
        f.columns = main_cols;
        out.loso = loso_cv(in.relative, f, cfg.exclude_subjects, workers);
        out.loso->selection = "analysis-based";
    }

    std::ostringstream md;
    md << "# Evaluation report\n\n";
    md << "Cycle-split cross validation, analysis-based features (" << main_cols.size() << "). 3 classes: "
       << pct(out.main->mean.acc3) << "%, 2 classes: " << pct(out.main->mean.acc2) << "%.\n\n";
    md << "## Fold-averaged confusion matrix (cycle split)\n\n" << confusion_table(out.main->mean_confusion) << '\n';
    for (const auto& t : out.tables) md << render(t);
    md << "## Fold-averaged confusion matrix (leave one subject out)\n\n"
       << confusion_table(out.loso->mean_confusion) << "\n3 classes: " << pct(out.loso->mean.acc3)
       << "%, 2 classes: " << pct(out.loso->mean.acc2) << "%.\n";
    out.markdown = md.str();

    out.json = {{"cycle3", hepot::to_json(*out.main)}, {"loso", hepot::to_json(*out.loso)}};
    for (const auto& t : out.tables) out.json["tables"][t.key] = to_json(t);
    return out;
}

/// Writes report.md, report.json and one SVG per plotted feature.
inline void write(const Output& out, const FeatureTable& plotted, const std::vector<std::size_t>& features,
                  const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "plots", ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream md(dir / "report.md");
        if (!md) throw IoError("cannot write report.md");
        md << out.markdown;
        md << "\n## Feature plots\n\n";
        for (auto f : features) md << "![" << feature_registry()[f].name << "](plots/" << feature_registry()[f].name << ".svg)\n";
    }
    write_json_file(dir / "report.json", out.json);
    for (auto f : features) {
        std::ofstream svg(dir / "plots" / (feature_registry()[f].name + ".svg"));
        if (!svg) throw IoError("cannot write plot for " + feature_registry()[f].name);
        svg << feature_plot_svg(plotted, f);
    }
}

}  // namespace hepot::report
