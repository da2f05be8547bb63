#pragma once

// Per-trial feature assembly, calm-state relativization, and the
// fold-scoped preprocessing (median imputation then standardization).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hepot/biofeatures.hpp"
#include "hepot/dataset.hpp"
#include "hepot/errors.hpp"
#include "hepot/io.hpp"
#include "hepot/movement.hpp"
#include "hepot/parallel.hpp"
#include "hepot/peak_detect.hpp"
#include "hepot/registry.hpp"

namespace hepot {

struct FeatureVector {
    std::string trial_id;
    std::string subject;
    int cycle = 0;
    std::optional<Condition> condition;
    std::vector<std::optional<double>> values = std::vector<std::optional<double>>(kFeatureCount);

    bool missing(std::size_t k) const { return !values[k].has_value(); }
    std::size_t missing_count() const {
        std::size_t n = 0;
        for (const auto& v : values) n += !v.has_value();
        return n;
    }
};

struct FeatureConfig {
    peaks::DetectorConfig ecg = peaks::DetectorConfig::ecg_defaults();
    peaks::DetectorConfig blink = peaks::DetectorConfig::blink_defaults();
    bio::BandConfig bands;
    std::optional<double> large_step_threshold;  // pixels; default 2x calm median step
    double large_step_factor = 2.0;
    movement::GravityMode gravity = movement::GravityMode::NormDeviation;
};

namespace detail {

inline void put(FeatureVector& v, std::string_view name, std::optional<double> x) {
    if (x && std::isfinite(*x)) v.values[feature_index(name)] = *x;
}

inline void put_hrv(FeatureVector& v, std::string_view prefix, const bio::HrvFeatures& h) {
    const std::string p(prefix);
    put(v, p + "_mean_rri", h.mean_rri);
    put(v, p + "_lf", h.lf_power);
    put(v, p + "_hf", h.hf_power);
    put(v, p + "_lf_hf", h.lf_hf_ratio);
}

}  // namespace detail

/// Default large-step threshold: factor x median inter-frame step of the
/// calm segment, falling back to the recording's own gaze.
inline std::optional<double> gaze_threshold(const FeatureConfig& cfg, const TrialSignals* calm,
                                            const TrialSignals& trial) {
    if (cfg.large_step_threshold) return cfg.large_step_threshold;
    try {
        if (calm && calm->gaze && calm->gaze->xy.size() >= 2)
            return cfg.large_step_factor * bio::median_step(*calm->gaze);
        if (trial.gaze && trial.gaze->xy.size() >= 2)
            return cfg.large_step_factor * bio::median_step(*trial.gaze);
    } catch (const Error&) {
    }
    return std::nullopt;
}

/// Fills each registry slot a sensor can provide; every failure (absent
/// sensor, too-short signal) leaves the affected slots missing.
inline FeatureVector assemble(const TrialSignals& s, const FeatureConfig& cfg,
                              std::optional<double> large_step_threshold) {
    FeatureVector v;
    if (s.ecg) {
        try {
            detail::put_hrv(v, "ecg", bio::hrv_features(peaks::detect_rri_sequence(*s.ecg, cfg.ecg), cfg.bands));
        } catch (const Error&) {
        }
    }
    if (s.hr) {
        try {
            detail::put_hrv(v, "watch", bio::hrv_features(bio::rri_from_hr(*s.hr), cfg.bands));
        } catch (const Error&) {
        }
    }
    if (s.eog) {
        try {
            detail::put(v, "blink_rate",
                        bio::blink_rate(peaks::detect_blinks(*s.eog, cfg.blink), s.eog->duration()));
        } catch (const Error&) {
        }
    }
    if (s.gaze && large_step_threshold) {
        try {
            const auto g = bio::gaze_features(*s.gaze, *large_step_threshold);
            detail::put(v, "gaze_std_x", g.std_gx);
            detail::put(v, "gaze_std_y", g.std_gy);
            detail::put(v, "gaze_step_mean", g.mean_step);
            detail::put(v, "gaze_step_std", g.std_step);
            detail::put(v, "gaze_large_step_rate", g.large_step_rate);
            detail::put(v, "visual_intake_ratio", g.visual_intake_ratio);
            detail::put(v, "saccade_ratio", g.saccade_ratio);
        } catch (const Error&) {
        }
    }
    if (s.eeg) {
        try {
            const auto e = bio::eeg_features(*s.eeg);
            for (std::size_t k = 0; k < bio::kEegStreams; ++k) {
                const std::string base = "eeg_" + std::string(kEegStreamNames[k]);
                detail::put(v, base + "_mean", e.mean[k]);
                detail::put(v, base + "_std", e.std[k]);
            }
        } catch (const Error&) {
        }
    }
    try {
        const auto m = movement::movement_trial_features(s.acc, s.pose, cfg.gravity);
        detail::put(v, "acc_move_mean", m[0]);
        detail::put(v, "acc_move_nograv_mean", m[1]);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "pose_move_mean_j%02zu", j);
            detail::put(v, buf, m[2 + j]);
        }
    } catch (const Error&) {
    }
    return v;
}

struct CalmBaseline {
    std::string subject;
    std::vector<std::optional<double>> means = std::vector<std::optional<double>>(kFeatureCount);
};

/// Per-feature mean over one or more calm windows, ignoring missing slots.
inline CalmBaseline calm_baseline(std::span<const FeatureVector> windows, std::string subject) {
    CalmBaseline b;
    b.subject = std::move(subject);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& w : windows)
            if (w.values[k]) {
                s += *w.values[k];
                ++n;
            }
        if (n) b.means[k] = s / static_cast<double>(n);
    }
    return b;
}

enum class RelativeMode { Absolute, Relative };

inline std::string_view to_string(RelativeMode m) {
    return m == RelativeMode::Absolute ? "absolute" : "relative";
}

inline RelativeMode parse_relative_mode(std::string_view s) {
    if (s == "absolute") return RelativeMode::Absolute;
    if (s == "relative") return RelativeMode::Relative;
    throw ConfigError("relativization mode must be 'absolute' or 'relative'");
}

struct Relativized {
    FeatureVector vector;
    std::vector<std::size_t> unadjusted;  // present features whose baseline is missing
};

/// Deviation from the calm state. Missing values stay missing; features
/// without a baseline pass through unchanged and are reported.
inline Relativized relativize(const FeatureVector& v, const CalmBaseline& b,
                              RelativeMode mode = RelativeMode::Relative) {
    Relativized r{v, {}};
    if (mode == RelativeMode::Absolute) return r;
    if (v.subject != b.subject)
        throw SubjectMismatchError("baseline of subject '" + b.subject + "' applied to '" + v.subject + "'");
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        if (!v.values[k]) continue;
        if (b.means[k]) r.vector.values[k] = *v.values[k] - *b.means[k];
        else r.unadjusted.push_back(k);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Feature tables

struct FeatureTable {
    std::vector<FeatureVector> rows;

    /// rows x 55 matrix with NaN marking missing values.
    Eigen::MatrixXd matrix(std::span<const std::size_t> columns) const {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const auto& v = rows[i].values[columns[c]];
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    v ? *v : std::numeric_limits<double>::quiet_NaN();
            }
        return m;
    }

    std::vector<int> labels() const {
        std::vector<int> y;
        for (const auto& r : rows) {
            if (!r.condition) throw DomainError("row '" + r.trial_id + "' has no condition label");
            y.push_back(static_cast<int>(*r.condition));
        }
        return y;
    }
};

/// Extracts features for every trial of a manifest, relativized against the
/// subject's calm segment when `mode` is Relative.
inline FeatureTable extract_dataset(const DatasetManifest& m, const FeatureConfig& cfg, RelativeMode mode,
                                    std::size_t workers = 1) {
    std::map<std::string, TrialSignals> calm_signals;
    std::vector<std::string> calm_ids;
    for (const auto& c : m.calm) calm_ids.push_back(c.id);
    std::vector<TrialSignals> loaded(calm_ids.size());
    parallel_for(calm_ids.size(), workers, [&](std::size_t i) { loaded[i] = load_signals(m.calm[i].signals); });
    for (std::size_t i = 0; i < calm_ids.size(); ++i) calm_signals[calm_ids[i]] = std::move(loaded[i]);

    std::map<std::string, CalmBaseline> baselines;
    {
        std::vector<CalmBaseline> b(m.calm.size());
        parallel_for(m.calm.size(), workers, [&](std::size_t i) {
            const auto& sig = calm_signals.at(m.calm[i].id);
            const auto v = assemble(sig, cfg, gaze_threshold(cfg, &sig, sig));
            b[i] = calm_baseline(std::span(&v, 1), m.calm[i].subject);
        });
        for (std::size_t i = 0; i < m.calm.size(); ++i) baselines[m.calm[i].id] = std::move(b[i]);
    }

    FeatureTable table;
    table.rows.resize(m.trials.size());
    parallel_for(m.trials.size(), workers, [&](std::size_t i) {
        const auto& t = m.trials[i];
        const auto sig = load_signals(t.signals);
        const TrialSignals* calm = calm_signals.count(t.calm_id) ? &calm_signals.at(t.calm_id) : nullptr;
        FeatureVector v = assemble(sig, cfg, gaze_threshold(cfg, calm, sig));
        v.trial_id = t.id;
        v.subject = t.subject;
        v.cycle = t.cycle;
        v.condition = t.condition;
        table.rows[i] = relativize(v, baselines.at(t.calm_id), mode).vector;
    });
    return table;
}

// ---------------------------------------------------------------------------
// Fold-scoped preprocessing

/// Median with the mean-of-middle-pair convention for even counts.
inline double median(std::vector<double> v) {
    if (v.empty()) throw AllMissingError("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Per-column training medians over non-missing (non-NaN) entries.
inline Eigen::VectorXd fit_medians(const Eigen::MatrixXd& train) {
    Eigen::VectorXd med(train.cols());
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        std::vector<double> vals;
        for (Eigen::Index r = 0; r < train.rows(); ++r)
            if (!std::isnan(train(r, c))) vals.push_back(train(r, c));
        if (vals.empty()) throw AllMissingError("feature column " + std::to_string(c) + " has no training value");
        med(c) = median(std::move(vals));
    }
    return med;
}

inline Eigen::MatrixXd fill_missing(Eigen::MatrixXd x, const Eigen::VectorXd& medians) {
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            if (std::isnan(x(r, c))) x(r, c) = medians(c);
    return x;
}

/// Median imputation fit on `train` and applied to both sets.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> impute(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply) {
    const auto med = fit_medians(train);
    return {fill_missing(train, med), fill_missing(apply, med)};
}

struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  // population std, or 1 for constant columns

    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    }
};

inline Standardizer fit_standardizer(const Eigen::MatrixXd& train) {
    Standardizer s;
    const auto n = static_cast<double>(train.rows());
    s.mean = train.colwise().sum().transpose() / n;
    s.scale.resize(train.cols());
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const double var = (train.col(c).array() - s.mean(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.scale(c) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(c))) ? sd : 1.0;
    }
    return s;
}

struct StandardizeResult {
    Eigen::MatrixXd train, apply;
    Standardizer scaler;
};

inline StandardizeResult standardize(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply) {
    auto s = fit_standardizer(train);
    return {s.transform(train), s.transform(apply), std::move(s)};
}

/// Imputation medians plus standardization, fit on a training fold.
struct Preprocessor {
    std::vector<std::size_t> columns;  // registry indices
    Eigen::VectorXd medians;
    Standardizer scaler;

    Eigen::MatrixXd transform(const Eigen::MatrixXd& raw) const {
        return scaler.transform(fill_missing(raw, medians));
    }
};

inline Preprocessor fit_preprocessor(const Eigen::MatrixXd& raw_train, std::vector<std::size_t> columns) {
    Preprocessor p;
    p.columns = std::move(columns);
    p.medians = fit_medians(raw_train);
    p.scaler = fit_standardizer(fill_missing(raw_train, p.medians));
    return p;
}

namespace detail {

inline nlohmann::json vec_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd json_vec(const nlohmann::json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json to_json(const Preprocessor& p) {
    std::vector<std::string> names;
    for (auto c : p.columns) names.push_back(feature_registry()[c].name);
    return {{"features", names},
            {"medians", detail::vec_json(p.medians)},
            {"means", detail::vec_json(p.scaler.mean)},
            {"stds", detail::vec_json(p.scaler.scale)},
            {"registry_hash", registry_hash()}};
}

inline Preprocessor preprocessor_from_json(const nlohmann::json& j) {
    if (j.at("registry_hash").get<std::string>() != registry_hash())
        throw ConfigError("scaler was fit against a different feature registry");
    Preprocessor p;
    for (const auto& n : j.at("features")) p.columns.push_back(feature_index(n.get<std::string>()));
    p.medians = detail::json_vec(j.at("medians"));
    p.scaler.mean = detail::json_vec(j.at("means"));
    p.scaler.scale = detail::json_vec(j.at("stds"));
    return p;
}

// ---------------------------------------------------------------------------
// features.csv

/// Wide layout: trial,subject,cycle,condition,<55 features>; empty = missing.
inline void write_features_wide(const std::filesystem::path& path, const FeatureTable& t) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "trial,subject,cycle,condition";
    for (const auto& f : feature_registry()) out << ',' << f.name;
    out << '\n';
    for (const auto& r : t.rows) {
        out << r.trial_id << ',' << r.subject << ',' << r.cycle << ','
            << (r.condition ? to_string(*r.condition) : std::string_view("calm"));
        for (const auto& v : r.values) {
            out << ',';
            if (v) out << detail::format_double(*v);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

inline FeatureTable read_features_wide(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    auto header = detail::split(detail::trim(line));
    if (header.size() != 4 + kFeatureCount) throw ParseError(path.string() + ": expected 59 columns");
    for (std::size_t k = 0; k < kFeatureCount; ++k)
        if (header[4 + k] != feature_registry()[k].name)
            throw ParseError(path.string() + ": column '" + std::string(header[4 + k]) + "' out of registry order");
    FeatureTable t;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto sv = detail::trim(line);
        if (sv.empty()) continue;
        auto cells = detail::split(sv);
        const std::string at = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != header.size()) throw ParseError(at + ": wrong cell count");
        FeatureVector v;
        v.trial_id = std::string(cells[0]);
        v.subject = std::string(cells[1]);
        v.cycle = static_cast<int>(detail::parse_double(cells[2], at));
        if (cells[3] != "calm") v.condition = parse_condition(cells[3]);
        for (std::size_t k = 0; k < kFeatureCount; ++k)
            if (!detail::trim(cells[4 + k]).empty()) v.values[k] = detail::parse_double(cells[4 + k], at);
        t.rows.push_back(std::move(v));
    }
    return t;
}

/// Long layout for a single trial: trial,feature,value,missing.
inline void write_features_long(const std::filesystem::path& path, const FeatureVector& v) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "trial,feature,value,missing\n";
    const auto& reg = feature_registry();
    for (std::size_t k = 0; k < kFeatureCount; ++k)
        out << v.trial_id << ',' << reg[k].name << ','
            << (v.values[k] ? detail::format_double(*v.values[k]) : std::string()) << ','
            << (v.values[k] ? 0 : 1) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hepot
