#pragma once

// Single JSON run configuration shared by every CLI subcommand.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hepot/evaluation.hpp"
#include "hepot/pipeline.hpp"
#include "hepot/selection.hpp"
#include "hepot/synth.hpp"

namespace hepot {

inline peaks::DetectorConfig detector_from_json(const nlohmann::json& j, peaks::DetectorConfig c) {
    try {
        c.alpha = j.value("alpha", c.alpha);
        c.beta = j.value("beta", c.beta);
        c.gamma = j.value("gamma", c.gamma);
        c.sigma1 = j.value("sigma1", c.sigma1);
        c.sigma2 = j.value("sigma2", c.sigma2);
        c.y_min = j.value("y_min", c.y_min);
        c.y_max = j.value("y_max", c.y_max);
        c.fft_window = j.value("fft_window", c.fft_window);
        c.amp_window = j.value("amp_window", c.amp_window);
        c.amp_floor = j.value("amp_floor", c.amp_floor);
        c.amp_gate = j.value("amp_gate", c.amp_gate);
        c.detrend_window = j.value("detrend_window", c.detrend_window);
        c.noise_gate = j.value("noise_gate", c.noise_gate);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid detector config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json to_json(const peaks::DetectorConfig& c) {
    return {{"alpha", c.alpha},           {"beta", c.beta},         {"gamma", c.gamma},
            {"sigma1", c.sigma1},         {"sigma2", c.sigma2},     {"y_min", c.y_min},
            {"y_max", c.y_max},           {"fft_window", c.fft_window}, {"amp_window", c.amp_window},
            {"amp_floor", c.amp_floor},   {"amp_gate", c.amp_gate}, {"detrend_window", c.detrend_window},
            {"noise_gate", c.noise_gate}};
}

inline bio::BandConfig bands_from_json(const nlohmann::json& j) {
    bio::BandConfig b = j.value("literal", false) ? bio::BandConfig::literal() : bio::BandConfig{};
    try {
        if (j.contains("lf")) {
            const auto lf = j.at("lf").get<std::vector<double>>();
            if (lf.size() != 2) throw ConfigError("lf band needs [lo, hi]");
            b.lf_lo = lf[0];
            b.lf_hi = lf[1];
        }
        if (j.contains("hf")) {
            const auto hf = j.at("hf").get<std::vector<double>>();
            if (hf.size() != 2) throw ConfigError("hf band needs [lo, hi]");
            b.hf_lo = hf[0];
            b.hf_hi = hf[1];
        }
        b.grid_rate = j.value("grid_rate", b.grid_rate);
        b.min_span = j.value("min_span", b.min_span);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid band config: ") + e.what());
    }
    if (!(b.lf_lo < b.lf_hi) || !(b.hf_lo < b.hf_hi) || !(b.grid_rate > 0.0))
        throw ConfigError("band edges must be increasing and the grid rate positive");
    return b;
}

struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t workers = 0;  // 0: all cores
    std::filesystem::path manifest;
    std::filesystem::path output = "out";

    synth::SynthConfig synth;
    FeatureConfig features;
    RelativeMode mode = RelativeMode::Relative;

    SelectionMethod selection = SelectionMethod::Fixed;
    int select_n = 10;
    std::vector<std::string> fixed_features = default_fixed_features();
    int pca_components = 10;

    ModelConfig model;
    Protocol protocol = Protocol::Cycle3;
    std::set<std::string> exclude_subjects;
    std::vector<std::string> sensors;  // empty: every group

    std::size_t worker_count() const { return workers ? workers : default_workers(); }

    std::set<SensorGroup> sensor_groups() const {
        if (sensors.empty()) return {kSensorGroups.begin(), kSensorGroups.end()};
        return parse_sensor_groups(sensors);
    }

    /// Applies the run seed to every seeded component.
    void propagate_seed() {
        synth.seed = seed;
        model.mlp.seed = seed;
    }
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            if (p.contains("manifest")) c.manifest = p.at("manifest").get<std::string>();
            if (p.contains("output")) c.output = p.at("output").get<std::string>();
        }
        if (j.contains("synth")) c.synth = synth::config_from_json(j.at("synth"));
        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            if (d.contains("ecg")) c.features.ecg = detector_from_json(d.at("ecg"), c.features.ecg);
            if (d.contains("blink")) c.features.blink = detector_from_json(d.at("blink"), c.features.blink);
        }
        if (j.contains("bands")) c.features.bands = bands_from_json(j.at("bands"));
        if (j.contains("features")) {
            const auto& f = j.at("features");
            if (f.contains("mode")) c.mode = parse_relative_mode(f.at("mode").get<std::string>());
            if (f.contains("large_step_threshold") && !f.at("large_step_threshold").is_null())
                c.features.large_step_threshold = f.at("large_step_threshold").get<double>();
            c.features.large_step_factor = f.value("large_step_factor", c.features.large_step_factor);
            if (f.contains("gravity")) {
                const auto g = f.at("gravity").get<std::string>();
                if (g == "norm") c.features.gravity = movement::GravityMode::NormDeviation;
                else if (g == "axis_mean") c.features.gravity = movement::GravityMode::AxisMean;
                else throw ConfigError("gravity must be 'norm' or 'axis_mean'");
            }
        }
        if (j.contains("selection")) {
            const auto& s = j.at("selection");
            if (s.contains("method")) c.selection = parse_selection_method(s.at("method").get<std::string>());
            c.select_n = s.value("n", c.select_n);
            if (s.contains("features")) c.fixed_features = s.at("features").get<std::vector<std::string>>();
            c.pca_components = s.value("pca_components", c.pca_components);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("kind")) c.model.kind = parse_model_kind(m.at("kind").get<std::string>());
            if (m.contains("mlp")) c.model.mlp = mlp_config_from_json(m.at("mlp"));
            c.model.knn_k = m.value("knn_k", c.model.knn_k);
        }
        if (j.contains("protocol")) c.protocol = parse_protocol(j.at("protocol").get<std::string>());
        if (j.contains("exclude_subjects"))
            for (const auto& s : j.at("exclude_subjects")) c.exclude_subjects.insert(s.get<std::string>());
        if (j.contains("sensors")) c.sensors = j.at("sensors").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    if (c.select_n < 1) throw ConfigError("selection n must be >= 1");
    if (c.pca_components < 1) throw ConfigError("pca_components must be >= 1");
    if (c.model.knn_k < 1) throw ConfigError("knn_k must be >= 1");
    c.sensor_groups();  // validates names
    for (const auto& n : c.fixed_features) feature_index(n);
    c.propagate_seed();
    return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hepot
