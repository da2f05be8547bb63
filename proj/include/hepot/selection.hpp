#pragma once

// Feature subset selection: greedy forward search, PCA projection, a fixed
// analysis-based list, and sensor-group masking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hepot/errors.hpp"
#include "hepot/parallel.hpp"
#include "hepot/registry.hpp"

namespace hepot {

enum class SelectionMethod { Greedy, Pca, Fixed, All };

inline std::string_view to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::Greedy: return "greedy";
        case SelectionMethod::Pca: return "pca";
        case SelectionMethod::Fixed: return "analysis-based";
        case SelectionMethod::All: return "all";
    }
    return "all";
}

inline SelectionMethod parse_selection_method(std::string_view s) {
    if (s == "greedy") return SelectionMethod::Greedy;
    if (s == "pca") return SelectionMethod::Pca;
    if (s == "fixed" || s == "analysis-based") return SelectionMethod::Fixed;
    if (s == "all") return SelectionMethod::All;
    throw ConfigError("unknown selection method '" + std::string(s) + "'");
}

struct SelectionResult {
    SelectionMethod method = SelectionMethod::All;
    std::vector<std::string> features;      // ordered, registry names
    std::vector<double> step_accuracy;      // greedy only: best accuracy after each step
    std::vector<std::string> step_feature;  // greedy only: feature added at each step
    double best_accuracy = -1.0;            // greedy only
    int pca_components = 0;                 // pca only

    std::vector<std::size_t> columns() const {
        std::vector<std::size_t> c;
        for (const auto& n : features) c.push_back(feature_index(n));
        return c;
    }
};

inline nlohmann::json to_json(const SelectionResult& s) {
    nlohmann::json j{{"method", to_string(s.method)}, {"features", s.features}};
    if (s.method == SelectionMethod::Greedy) {
        j["step_accuracy"] = s.step_accuracy;
        j["step_feature"] = s.step_feature;
        j["best_accuracy"] = s.best_accuracy;
    }
    if (s.method == SelectionMethod::Pca) j["components"] = s.pca_components;
    return j;
}

inline SelectionResult selection_from_json(const nlohmann::json& j) {
    SelectionResult s;
    try {
        s.method = parse_selection_method(j.at("method").get<std::string>());
        s.features = j.at("features").get<std::vector<std::string>>();
        s.step_accuracy = j.value("step_accuracy", std::vector<double>{});
        s.step_feature = j.value("step_feature", std::vector<std::string>{});
        s.best_accuracy = j.value("best_accuracy", -1.0);
        s.pca_components = j.value("components", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid selection file: ") + e.what());
    }
    for (const auto& n : s.features) feature_index(n);
    return s;
}

/// Accuracy of a model trained on the given registry columns.
using SubsetEvaluator = std::function<double(const std::vector<std::size_t>&)>;

/// Greedy forward selection. Each step adds the candidate with the highest
/// accuracy (first in candidate order on ties); the returned feature list is
/// the prefix with the strictly best step accuracy.
inline SelectionResult greedy_select(std::vector<std::size_t> candidates, int max_features,
                                     const SubsetEvaluator& evaluate, std::size_t workers = 1) {
    if (max_features < 1) throw ConfigError("greedy selection needs N >= 1");
    if (candidates.empty()) throw ConfigError("greedy selection needs at least one candidate feature");
    std::set<std::size_t> seen(candidates.begin(), candidates.end());
    if (seen.size() != candidates.size()) throw ConfigError("duplicate candidate feature");

    SelectionResult r;
    r.method = SelectionMethod::Greedy;
    std::vector<std::size_t> selected;
    std::size_t best_len = 0;
    double a_best = -1.0;
    for (int n = 1; n <= max_features && !candidates.empty(); ++n) {
        std::vector<double> acc(candidates.size());
        parallel_for(candidates.size(), workers, [&](std::size_t i) {
            auto trial = selected;
            trial.push_back(candidates[i]);
            acc[i] = evaluate(trial);
        });
        double a_step = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (acc[i] > a_step) {
                a_step = acc[i];
                pick = i;
            }
        selected.push_back(candidates[pick]);
        r.step_feature.push_back(feature_registry()[candidates[pick]].name);
        r.step_accuracy.push_back(a_step);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        if (a_step > a_best) {
            a_best = a_step;
            best_len = selected.size();
        }
    }
    for (std::size_t i = 0; i < best_len; ++i) r.features.push_back(feature_registry()[selected[i]].name);
    r.best_accuracy = a_best;
    return r;
}

inline SelectionResult fixed_list(const std::vector<std::string>& names) {
    SelectionResult r;
    r.method = SelectionMethod::Fixed;
    std::set<std::string> seen;
    for (const auto& n : names) {
        feature_index(n);
        if (!seen.insert(n).second) throw ConfigError("feature '" + n + "' listed twice");
        r.features.push_back(n);
    }
    return r;
}

/// Default analysis-based list. Only the two eye-event ratios are fixed by
/// the original analysis; the rest is a configurable choice.
inline std::vector<std::string> default_fixed_features() {
    return {"ecg_mean_rri",         "ecg_hf",         "blink_rate",
            "visual_intake_ratio",  "saccade_ratio",  "eeg_attention_mean",
            "acc_move_mean",        "acc_move_nograv_mean",
            "pose_move_mean_j13",   "pose_move_mean_j16"};
}

/// Registry columns that stay live under a sensor-group mask, in registry order.
inline std::vector<std::size_t> sensor_mask(const std::set<SensorGroup>& groups,
                                            const std::vector<std::size_t>& columns = all_columns()) {
    if (groups.empty()) throw ConfigError("sensor mask needs at least one group");
    std::vector<std::size_t> out;
    for (auto c : columns)
        if (groups.count(feature_registry()[c].group)) out.push_back(c);
    return out;
}

inline std::set<SensorGroup> parse_sensor_groups(const std::vector<std::string>& names) {
    std::set<SensorGroup> g;
    for (const auto& n : names) {
        const auto d = device_groups(n);
        g.insert(d.begin(), d.end());
    }
    return g;
}

// ---------------------------------------------------------------------------
// PCA

struct Pca {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // d x k, columns are unit eigenvectors
    Eigen::VectorXd variances;   // eigenvalues, descending
    int requested = 0;

    int k() const { return static_cast<int>(components.cols()); }

    Eigen::MatrixXd project(const Eigen::MatrixXd& x) const {
        if (x.cols() != mean.size()) throw DimensionError("PCA input has the wrong feature count");
        return (x.rowwise() - mean.transpose()) * components;
    }
};

/// Eigen-decomposition of the (population) training covariance. When the
/// covariance has fewer than k non-negligible eigenvalues, k is reduced if
/// `reduce_rank` is set and RankError is thrown otherwise.
inline Pca pca_fit(const Eigen::MatrixXd& train, int k, bool reduce_rank = true) {
    const auto d = train.cols();
    if (k < 1 || k > d) throw ConfigError("PCA dimension must be in [1, feature count]");
    if (train.rows() < 1) throw InsufficientDataError("PCA needs at least one row");
    Pca p;
    p.requested = k;
    p.mean = train.colwise().mean().transpose();
    const Eigen::MatrixXd c = train.rowwise() - p.mean.transpose();
    const Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(train.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();

    const double tol = std::max(ev(0), 0.0) * 1e-10 + 1e-300;
    int rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev(i) > tol;
    if (rank < k) {
        if (!reduce_rank || rank == 0)
            throw RankError("covariance rank " + std::to_string(rank) + " is below the requested " +
                            std::to_string(k) + " components");
        k = rank;
    }
    p.components = vecs.leftCols(k);
    p.variances = ev.head(k);
    for (int j = 0; j < k; ++j) {
        Eigen::Index idx;
        p.components.col(j).cwiseAbs().maxCoeff(&idx);
        if (p.components(idx, j) < 0.0) p.components.col(j) *= -1.0;
    }
    return p;
}

inline nlohmann::json to_json(const Pca& p) {
    std::vector<std::vector<double>> comps;
    for (Eigen::Index j = 0; j < p.components.cols(); ++j)
        comps.emplace_back(p.components.col(j).data(), p.components.col(j).data() + p.components.rows());
    return {{"mean", std::vector<double>(p.mean.data(), p.mean.data() + p.mean.size())},
            {"components", comps},
            {"variances", std::vector<double>(p.variances.data(), p.variances.data() + p.variances.size())},
            {"requested", p.requested}};
}

inline Pca pca_from_json(const nlohmann::json& j) {
    Pca p;
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
    const auto var = j.at("variances").get<std::vector<double>>();
    p.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    p.components.resize(p.mean.size(), static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (comps[c].size() != mean.size()) throw ParseError("PCA component has the wrong length");
        for (std::size_t r = 0; r < mean.size(); ++r)
            p.components(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = comps[c][r];
    }
    p.variances = Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
    p.requested = j.value("requested", p.k());
    return p;
}

}  // namespace hepot
