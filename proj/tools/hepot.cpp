// hepot: command-line driver for the synthetic-data, feature, selection,
// training and evaluation pipeline.
//
// Exit status: 0 success, 1 module error (JSON on stderr), 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hepot/config.hpp"
#include "hepot/evaluation.hpp"
#include "hepot/io.hpp"
#include "hepot/peak_detect.hpp"
#include "hepot/pipeline.hpp"
#include "hepot/report.hpp"
#include "hepot/selection.hpp"
#include "hepot/synth.hpp"

namespace fs = std::filesystem;
using namespace hepot;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string config;
};

RunConfig load_run_config(const Globals& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(g.config));
    if (!g.config.empty() && !cfg.manifest.empty() && cfg.manifest.is_relative())
        cfg.manifest = fs::path(g.config).parent_path() / cfg.manifest;
    if (g.seed) cfg.seed = *g.seed;
    if (g.workers) cfg.workers = *g.workers;
    cfg.propagate_seed();
    return cfg;
}

void write_rows(const fs::path& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << header << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << hepot::detail::format_double(r[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

/// Columns and PCA setting implied by a selection file.
FitConfig fit_config_for(const SelectionResult& sel, const RunConfig& cfg) {
    FitConfig f;
    f.model = cfg.model;
    f.columns = sel.columns();
    if (sel.method == SelectionMethod::Pca) f.pca_components = sel.pca_components;
    return f;
}

SelectionResult default_selection(const RunConfig& cfg) {
    switch (cfg.selection) {
        case SelectionMethod::Fixed: return fixed_list(cfg.fixed_features);
        case SelectionMethod::All:
        case SelectionMethod::Pca:
        case SelectionMethod::Greedy: {
            SelectionResult s;
            s.method = SelectionMethod::All;
            for (auto c : sensor_mask(cfg.sensor_groups())) s.features.push_back(feature_registry()[c].name);
            if (cfg.selection == SelectionMethod::Pca) {
                s.method = SelectionMethod::Pca;
                s.pca_components = std::min<int>(cfg.pca_components, static_cast<int>(s.features.size()));
            }
            return s;
        }
    }
    return fixed_list(cfg.fixed_features);
}

/// Drops columns outside the configured sensor groups.
void apply_mask(FitConfig& f, const RunConfig& cfg) {
    if (cfg.sensors.empty()) return;
    const auto live = sensor_mask(cfg.sensor_groups(), f.columns);
    if (live.empty()) throw ConfigError("no selected feature belongs to the chosen sensors");
    f.columns = live;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-error potential estimation from wearable and camera sensors"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random component");
    app.add_option("--workers", g.workers, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_option("--config", g.config, "Run configuration JSON")->check(CLI::ExistingFile);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
    std::string synth_out;
    std::optional<int> synth_subjects;
    std::optional<double> synth_duration;
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--subjects", synth_subjects, "Number of subjects");
    synth_cmd->add_option("--duration", synth_duration, "Trial and calm duration in seconds");

    // rri / blinks
    auto* rri_cmd = app.add_subcommand("rri", "Detect R-peaks and RR intervals in an ECG file");
    auto* blink_cmd = app.add_subcommand("blinks", "Detect blinks in an EOG file");
    std::string det_in, det_out, det_cfg;
    for (auto* c : {rri_cmd, blink_cmd}) {
        c->add_option("--in", det_in, "Signal CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--out", det_out, "Output CSV")->required();
        c->add_option("--config", det_cfg, "Detector configuration JSON")->check(CLI::ExistingFile);
    }

    // features
    auto* feat_cmd = app.add_subcommand("features", "Extract the per-trial feature table");
    std::string feat_manifest, feat_out, feat_mode, feat_long;
    feat_cmd->add_option("--manifest", feat_manifest, "Dataset manifest JSON");
    feat_cmd->add_option("--out", feat_out, "features.csv path")->required();
    feat_cmd->add_option("--mode", feat_mode, "absolute or relative");
    feat_cmd->add_option("--long-dir", feat_long, "Also write one long-format CSV per trial here");

    // select
    auto* sel_cmd = app.add_subcommand("select", "Choose a feature subset");
    std::string sel_features, sel_method, sel_out;
    std::optional<int> sel_n;
    std::vector<std::string> sel_sensors;
    sel_cmd->add_option("--features", sel_features, "features.csv")->required()->check(CLI::ExistingFile);
    sel_cmd->add_option("--method", sel_method, "greedy, pca, fixed or all");
    sel_cmd->add_option("--n", sel_n, "Maximum features (greedy) or components (pca)")->check(CLI::PositiveNumber);
    sel_cmd->add_option("--sensors", sel_sensors, "Restrict to these sensors")->delimiter(',');
    sel_cmd->add_option("--out", sel_out, "selection.json")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a classifier on every row of a feature table");
    std::string train_features, train_sel, train_out;
    train_cmd->add_option("--features", train_features, "features.csv")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--selection", train_sel, "selection.json")->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_out, "model.json")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Cross-validate the configured pipeline");
    std::string eval_features, eval_sel, eval_protocol, eval_report, eval_model;
    std::vector<std::string> eval_exclude, eval_sensors;
    eval_cmd->add_option("--features", eval_features, "features.csv")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--selection", eval_sel, "selection.json")->check(CLI::ExistingFile);
    eval_cmd->add_option("--protocol", eval_protocol, "cycle3 or loso");
    eval_cmd->add_option("--model", eval_model, "mlp or knn");
    eval_cmd->add_option("--exclude", eval_exclude, "Subjects left out of testing (loso)")->delimiter(',');
    eval_cmd->add_option("--sensors", eval_sensors, "Restrict to these sensors")->delimiter(',');
    eval_cmd->add_option("--report", eval_report, "report.json")->required();

    // report
    auto* rep_cmd = app.add_subcommand("report", "Run the comparison study and write tables and plots");
    std::string rep_features, rep_absolute, rep_manifest, rep_out;
    bool rep_greedy = false;
    rep_cmd->add_option("--features", rep_features, "Relative features.csv")->check(CLI::ExistingFile);
    rep_cmd->add_option("--absolute", rep_absolute, "Absolute features.csv")->check(CLI::ExistingFile);
    rep_cmd->add_option("--manifest", rep_manifest, "Extract both feature modes from this manifest")
        ->check(CLI::ExistingFile);
    rep_cmd->add_option("--out", rep_out, "Output directory")->required();
    rep_cmd->add_flag("--greedy", rep_greedy, "Include the greedy selection row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_run_config(g);
        const std::size_t workers = cfg.worker_count();

        if (*synth_cmd) {
            if (synth_subjects) cfg.synth.subjects = *synth_subjects;
            if (synth_duration) cfg.synth.trial_duration = cfg.synth.calm_duration = *synth_duration;
            const auto m = synth::gen_dataset(cfg.synth, synth_out, workers);
            std::cout << "wrote " << m.trials.size() << " trials and " << m.calm.size() << " calm segments to "
                      << synth_out << "\n";
        } else if (*rri_cmd) {
            const auto det = det_cfg.empty() ? cfg.features.ecg
                                             : detector_from_json(read_json_file(det_cfg), cfg.features.ecg);
            const auto rri = peaks::detect_rri_sequence(load_signal(det_in, sensor_channels(Sensor::Ecg)), det);
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < rri.intervals.size(); ++i) rows.push_back(std::vector<double>{rri.interval_times[i], rri.intervals[i]});
            write_rows(det_out, "t_peak,interval_s", rows);
            std::cout << rri.intervals.size() << " intervals, " << rri.dropouts.size() << " dropouts\n";
        } else if (*blink_cmd) {
            const auto det = det_cfg.empty() ? cfg.features.blink
                                             : detector_from_json(read_json_file(det_cfg), cfg.features.blink);
            const auto eog = load_signal(det_in, sensor_channels(Sensor::Eog));
            const auto blinks = peaks::detect_blinks(eog, det);
            std::vector<std::vector<double>> rows;
            for (double t : blinks.timestamps()) rows.push_back(std::vector<double>{t});
            write_rows(det_out, "t_blink", rows);
            std::cout << blinks.size() << " blinks (" << bio::blink_rate(blinks, eog.duration()) << " per minute)\n";
        } else if (*feat_cmd) {
            const fs::path manifest = feat_manifest.empty() ? cfg.manifest : fs::path(feat_manifest);
            if (manifest.empty()) throw ConfigError("no manifest given (--manifest or paths.manifest)");
            if (!feat_mode.empty()) cfg.mode = parse_relative_mode(feat_mode);
            const auto m = load_manifest(manifest);
            const auto table = extract_dataset(m, cfg.features, cfg.mode, workers);
            write_features_wide(feat_out, table);
            if (!feat_long.empty()) {
                fs::create_directories(feat_long);
                for (const auto& r : table.rows) write_features_long(fs::path(feat_long) / (r.trial_id + ".csv"), r);
            }
            std::size_t missing = 0;
            for (const auto& r : table.rows) missing += r.missing_count();
            std::cout << table.rows.size() << " trials, " << missing << " missing values\n";
        } else if (*sel_cmd) {
            if (!sel_method.empty()) cfg.selection = parse_selection_method(sel_method);
            if (!sel_sensors.empty()) cfg.sensors = sel_sensors;
            const auto table = read_features_wide(sel_features);
            const auto live = sensor_mask(cfg.sensor_groups());
            SelectionResult sel;
            switch (cfg.selection) {
                case SelectionMethod::Greedy: {
                    FitConfig base;
                    base.model = cfg.model;
                    sel = greedy_select(
                        live, sel_n.value_or(cfg.select_n),
                        [&](const std::vector<std::size_t>& cols) {
                            FitConfig f = base;
                            f.columns = cols;
                            return cv_by_cycle(table, f, 1).mean.acc3;
                        },
                        workers);
                    break;
                }
                case SelectionMethod::Pca:
                    cfg.pca_components = sel_n.value_or(cfg.pca_components);
                    sel = default_selection(cfg);
                    break;
                case SelectionMethod::Fixed: {
                    sel = fixed_list(cfg.fixed_features);
                    if (!cfg.sensors.empty()) {
                        SelectionResult masked{SelectionMethod::Fixed, {}, {}, {}, -1.0, 0};
                        for (auto c : sensor_mask(cfg.sensor_groups(), sel.columns()))
                            masked.features.push_back(feature_registry()[c].name);
                        sel = masked;
                    }
                    break;
                }
                case SelectionMethod::All: sel = default_selection(cfg); break;
            }
            write_json_file(sel_out, to_json(sel));
            std::cout << sel.features.size() << " features selected (" << to_string(sel.method) << ")\n";
        } else if (*train_cmd) {
            const auto table = read_features_wide(train_features);
            const auto sel = train_sel.empty() ? default_selection(cfg) : selection_from_json(read_json_file(train_sel));
            auto fit = fit_config_for(sel, cfg);
            apply_mask(fit, cfg);
            const auto model = fit_model(table, fit);
            auto j = to_json(model, cfg.model);
            j["selection"] = to_json(sel);
            write_json_file(train_out, j);
            std::cout << "trained on " << table.rows.size() << " trials with " << fit.columns.size() << " features\n";
        } else if (*eval_cmd) {
            if (!eval_protocol.empty()) cfg.protocol = parse_protocol(eval_protocol);
            if (!eval_model.empty()) cfg.model.kind = parse_model_kind(eval_model);
            if (!eval_sensors.empty()) cfg.sensors = eval_sensors;
            for (const auto& s : eval_exclude) cfg.exclude_subjects.insert(s);
            const auto table = read_features_wide(eval_features);
            const auto sel = eval_sel.empty() ? default_selection(cfg) : selection_from_json(read_json_file(eval_sel));
            auto fit = fit_config_for(sel, cfg);
            apply_mask(fit, cfg);
            auto rep = cfg.protocol == Protocol::Cycle3 ? cv_by_cycle(table, fit, workers)
                                                        : loso_cv(table, fit, cfg.exclude_subjects, workers);
            rep.selection = std::string(to_string(sel.method));
            auto j = to_json(rep);
            j["model"] = to_string(cfg.model.kind);
            j["seed"] = cfg.seed;
            write_json_file(eval_report, j);
            std::cout << to_string(rep.protocol) << ": acc3 " << rep.mean.acc3 << ", acc2 " << rep.mean.acc2 << "\n";
        } else if (*rep_cmd) {
            report::Inputs in;
            in.cfg = cfg;
            in.greedy = rep_greedy;
            if (!rep_manifest.empty()) {
                const auto m = load_manifest(rep_manifest);
                in.relative = extract_dataset(m, cfg.features, RelativeMode::Relative, workers);
                in.absolute = extract_dataset(m, cfg.features, RelativeMode::Absolute, workers);
            } else if (!rep_features.empty()) {
                in.relative = read_features_wide(rep_features);
                if (!rep_absolute.empty()) in.absolute = read_features_wide(rep_absolute);
            } else {
                throw ConfigError("report needs --features or --manifest");
            }
            const auto out = report::run(in);
            report::write(out, in.relative, fixed_list(cfg.fixed_features).columns(), rep_out);
            std::cout << "cycle3 acc3 " << out.main->mean.acc3 << ", loso acc3 " << out.loso->mean.acc3
                      << "; report written to " << rep_out << "\n";
        }
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
