#pragma once

// Fold construction, per-fold fitting (imputation, scaling, optional PCA,
// classifier), confusion matrices and accuracy reports.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hepot/dataset.hpp"
#include "hepot/errors.hpp"
#include "hepot/knn.hpp"
#include "hepot/mlp.hpp"
#include "hepot/parallel.hpp"
#include "hepot/pipeline.hpp"
#include "hepot/selection.hpp"

namespace hepot {

struct ConfusionMatrix {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();  // rows truth, cols prediction

    void add(int truth, int predicted, double w = 1.0) { m(truth, predicted) += w; }
    double total() const { return m.sum(); }
};

struct Scores {
    double acc3 = 0.0;
    double acc2 = 0.0;  // Normal vs {Time, Multi}
};

inline Scores score(const ConfusionMatrix& c) {
    const double total = c.total();
    if (!(total > 0.0)) throw EmptyMatrixError("confusion matrix is empty");
    Scores s;
    s.acc3 = c.m.trace() / total;
    s.acc2 = (c.m(0, 0) + c.m.block<2, 2>(1, 1).sum()) / total;
    return s;
}

inline nlohmann::json to_json(const ConfusionMatrix& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({c.m(r, 0), c.m(r, 1), c.m(r, 2)});
    return rows;
}

// ---------------------------------------------------------------------------
// Model configuration and fitted fold models

enum class ModelKind { Mlp, Knn };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::Mlp ? "mlp" : "knn"; }

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "mlp") return ModelKind::Mlp;
    if (s == "knn") return ModelKind::Knn;
    throw ConfigError("unknown model '" + std::string(s) + "'");
}

struct ModelConfig {
    ModelKind kind = ModelKind::Mlp;
    MlpConfig mlp;
    int knn_k = 5;
};

/// What a fold fits: live registry columns, optional PCA, classifier.
struct FitConfig {
    std::vector<std::size_t> columns = all_columns();
    std::optional<int> pca_components;
    ModelConfig model;
};

struct FittedModel {
    Preprocessor pre;
    std::optional<Pca> pca;
    ModelKind kind = ModelKind::Mlp;
    Mlp mlp;
    Eigen::MatrixXd knn_x;
    std::vector<int> knn_y;
    int knn_k = 5;
    std::vector<std::string> warnings;

    Eigen::MatrixXd features(const Eigen::MatrixXd& raw) const {
        Eigen::MatrixXd x = pre.transform(raw);
        return pca ? pca->project(x) : x;
    }

    /// `raw` holds the model's columns with NaN for missing values.
    std::vector<int> predict(const Eigen::MatrixXd& raw) const {
        if (raw.cols() != static_cast<Eigen::Index>(pre.columns.size()))
            throw DimensionError("input has " + std::to_string(raw.cols()) + " features, model expects " +
                                 std::to_string(pre.columns.size()));
        const auto x = features(raw);
        if (kind == ModelKind::Mlp) return mlp.predict(x);
        return knn_predict_rows(knn_x, knn_y, x, knn_k, static_cast<int>(kConditionCount));
    }

    std::vector<int> predict(const FeatureTable& t) const { return predict(t.matrix(pre.columns)); }
};

inline FittedModel fit_model(const Eigen::MatrixXd& raw_train, const std::vector<int>& y, const FitConfig& cfg) {
    if (cfg.columns.empty()) throw ConfigError("no feature columns selected");
    FittedModel f;
    f.pre = fit_preprocessor(raw_train, cfg.columns);
    Eigen::MatrixXd x = f.pre.transform(raw_train);
    if (cfg.pca_components) {
        const int k = std::min(*cfg.pca_components, static_cast<int>(x.cols()));
        f.pca = pca_fit(x, k, true);
        if (f.pca->k() < *cfg.pca_components)
            f.warnings.push_back("PCA reduced to " + std::to_string(f.pca->k()) + " components");
        x = f.pca->project(x);
    }
    f.kind = cfg.model.kind;
    if (f.kind == ModelKind::Mlp) {
        f.mlp = mlp_train(x, y, static_cast<int>(kConditionCount), cfg.model.mlp);
    } else {
        if (std::set<int>(y.begin(), y.end()).size() < 2)
            throw DegenerateLabelsError("training labels contain fewer than 2 classes");
        f.knn_x = x;
        f.knn_y = y;
        f.knn_k = std::min<int>(cfg.model.knn_k, static_cast<int>(x.rows()));
    }
    return f;
}

inline FittedModel fit_model(const FeatureTable& train, const FitConfig& cfg) {
    return fit_model(train.matrix(cfg.columns), train.labels(), cfg);
}

inline nlohmann::json to_json(const FittedModel& f, const ModelConfig& cfg) {
    nlohmann::json j{{"preprocessor", to_json(f.pre)}, {"kind", to_string(f.kind)}};
    if (f.pca) j["pca"] = to_json(*f.pca);
    if (f.kind == ModelKind::Mlp) {
        j["network"] = f.mlp.to_json();
        j["config"] = to_json(cfg.mlp);
        j["seed"] = cfg.mlp.seed;
    } else {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index r = 0; r < f.knn_x.rows(); ++r) {
            std::vector<double> row;
            for (Eigen::Index c = 0; c < f.knn_x.cols(); ++c) row.push_back(f.knn_x(r, c));
            rows.push_back(std::move(row));
        }
        j["train"] = rows;
        j["labels"] = f.knn_y;
        j["k"] = f.knn_k;
    }
    return j;
}

inline FittedModel fitted_model_from_json(const nlohmann::json& j) {
    FittedModel f;
    try {
        f.pre = preprocessor_from_json(j.at("preprocessor"));
        if (j.contains("pca")) f.pca = pca_from_json(j.at("pca"));
        f.kind = parse_model_kind(j.at("kind").get<std::string>());
        if (f.kind == ModelKind::Mlp) {
            f.mlp = Mlp::from_json(j.at("network"));
        } else {
            const auto rows = j.at("train").get<std::vector<std::vector<double>>>();
            f.knn_y = j.at("labels").get<std::vector<int>>();
            f.knn_k = j.at("k").get<int>();
            const auto cols = rows.empty() ? 0 : rows.front().size();
            f.knn_x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != cols) throw ParseError("ragged k-NN training matrix");
                for (std::size_t c = 0; c < cols; ++c)
                    f.knn_x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
    return f;
}

// ---------------------------------------------------------------------------
// Protocols

enum class Protocol { Cycle3, Loso };

inline std::string_view to_string(Protocol p) { return p == Protocol::Cycle3 ? "cycle3" : "loso"; }

inline Protocol parse_protocol(std::string_view s) {
    if (s == "cycle3" || s == "cycle") return Protocol::Cycle3;
    if (s == "loso") return Protocol::Loso;
    throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

struct Fold {
    std::string name;
    std::vector<std::size_t> train, test;  // row indices
};

/// One fold per cycle: train on the other cycles, test on this one.
inline std::vector<Fold> cycle_folds(const FeatureTable& t) {
    std::map<std::string, std::set<int>> cycles_of;
    for (const auto& r : t.rows) cycles_of[r.subject].insert(r.cycle);
    if (cycles_of.empty()) throw ProtocolError("no trials to split");
    const auto& ref = cycles_of.begin()->second;
    for (const auto& [s, c] : cycles_of)
        if (c != ref) throw ProtocolError("subject " + s + " does not have the same cycles as the others");
    if (ref.size() < 2) throw ProtocolError("cycle split needs at least 2 cycles");
    std::vector<Fold> folds;
    for (int c : ref) {
        Fold f{"cycle" + std::to_string(c), {}, {}};
        for (std::size_t i = 0; i < t.rows.size(); ++i) (t.rows[i].cycle == c ? f.test : f.train).push_back(i);
        folds.push_back(std::move(f));
    }
    return folds;
}

/// One fold per subject not in `exclude`. Excluded subjects still train.
inline std::vector<Fold> loso_folds(const FeatureTable& t, const std::set<std::string>& exclude = {}) {
    std::set<std::string> subjects;
    for (const auto& r : t.rows) subjects.insert(r.subject);
    if (subjects.size() < 2) throw ProtocolError("leave-one-subject-out needs at least 2 subjects");
    for (const auto& e : exclude)
        if (!subjects.count(e)) throw ProtocolError("excluded subject " + e + " is not in the dataset");
    std::vector<Fold> folds;
    for (const auto& s : subjects) {
        if (exclude.count(s)) continue;
        Fold f{s, {}, {}};
        for (std::size_t i = 0; i < t.rows.size(); ++i) (t.rows[i].subject == s ? f.test : f.train).push_back(i);
        folds.push_back(std::move(f));
    }
    if (folds.empty()) throw ProtocolError("every subject is excluded");
    return folds;
}

inline FeatureTable subset(const FeatureTable& t, const std::vector<std::size_t>& rows) {
    FeatureTable out;
    out.rows.reserve(rows.size());
    for (auto i : rows) out.rows.push_back(t.rows[i]);
    return out;
}

struct FoldResult {
    std::string name;
    std::size_t n_train = 0, n_test = 0;
    ConfusionMatrix confusion;
    Scores scores;
    std::vector<std::string> warnings;
};

struct EvalReport {
    Protocol protocol = Protocol::Cycle3;
    std::string selection = "all";
    std::vector<std::string> features;
    std::vector<FoldResult> folds;
    ConfusionMatrix mean_confusion;  // fold average
    Scores mean;                     // mean of per-fold accuracies
    Scores pooled;                   // over all test trials
};

inline EvalReport evaluate(const FeatureTable& t, const std::vector<Fold>& folds, const FitConfig& cfg,
                           std::size_t workers = 1) {
    EvalReport rep;
    for (auto c : cfg.columns) rep.features.push_back(feature_registry()[c].name);
    rep.folds.resize(folds.size());
    const auto y = t.labels();
    parallel_for(folds.size(), workers, [&](std::size_t k) {
        const auto& f = folds[k];
        const auto train = subset(t, f.train), test = subset(t, f.test);
        const auto model = fit_model(train, cfg);
        const auto pred = model.predict(test);
        FoldResult r;
        r.name = f.name;
        r.n_train = f.train.size();
        r.n_test = f.test.size();
        r.warnings = model.warnings;
        for (std::size_t i = 0; i < f.test.size(); ++i) r.confusion.add(y[f.test[i]], pred[i]);
        r.scores = score(r.confusion);
        rep.folds[k] = std::move(r);
    });
    ConfusionMatrix pooled;
    for (const auto& r : rep.folds) {
        pooled.m += r.confusion.m;
        rep.mean.acc3 += r.scores.acc3;
        rep.mean.acc2 += r.scores.acc2;
    }
    const auto n = static_cast<double>(rep.folds.size());
    rep.mean.acc3 /= n;
    rep.mean.acc2 /= n;
    rep.mean_confusion.m = pooled.m / n;
    rep.pooled = score(pooled);
    return rep;
}

inline EvalReport cv_by_cycle(const FeatureTable& t, const FitConfig& cfg, std::size_t workers = 1) {
    auto r = evaluate(t, cycle_folds(t), cfg, workers);
    r.protocol = Protocol::Cycle3;
    return r;
}

inline EvalReport loso_cv(const FeatureTable& t, const FitConfig& cfg, const std::set<std::string>& exclude = {},
                          std::size_t workers = 1) {
    auto r = evaluate(t, loso_folds(t, exclude), cfg, workers);
    r.protocol = Protocol::Loso;
    return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"name", f.name},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"confusion", to_json(f.confusion)},
                         {"acc3", f.scores.acc3},
                         {"acc2", f.scores.acc2},
                         {"warnings", f.warnings}});
    return {{"protocol", to_string(r.protocol)},
            {"selection", r.selection},
            {"features", r.features},
            {"classes", {"Normal", "Time", "Multi"}},
            {"confusion_mean", to_json(r.mean_confusion)},
            {"acc3", r.mean.acc3},
            {"acc2", r.mean.acc2},
            {"pooled_acc3", r.pooled.acc3},
            {"pooled_acc2", r.pooled.acc2},
            {"folds", folds}};
}

}  // namespace hepot
