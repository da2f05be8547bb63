#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hepot/evaluation.hpp"
#include "hepot/selection.hpp"

using namespace hepot;
using Eigen::MatrixXd;

namespace {

SubsetEvaluator knn_cv(const FeatureTable& t) {
    return [&t](const std::vector<std::size_t>& cols) {
        FitConfig cfg;
        cfg.columns = cols;
        cfg.model.kind = ModelKind::Knn;
        cfg.model.knn_k = 3;
        return cv_by_cycle(t, cfg).mean.acc3;
    };
}

// Cyclic Jacobi rotations; returns eigenvalues in descending order.
std::vector<double> jacobi_eigenvalues(MatrixXd a) {
    const auto n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

MatrixXd random_correlated(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    MatrixXd z(rows, cols), mix(cols, cols);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n01(rng);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = n01(rng);
    return z * mix;
}

}  // namespace

TEST(Greedy, PlantedFeatureFirstWithPerfectAccuracy) {
    const auto a = feature_index("blink_rate");
    auto t = testutil::planted_table(5, 3, 1, {{a, 20.0}});
    std::vector<std::size_t> cands{0, 1, 2, a, 40, 41};
    auto r = greedy_select(cands, 3, knn_cv(t));
    ASSERT_FALSE(r.step_feature.empty());
    EXPECT_EQ(r.step_feature[0], "blink_rate");
    EXPECT_DOUBLE_EQ(r.step_accuracy[0], 1.0);
    EXPECT_EQ(r.features, std::vector<std::string>{"blink_rate"});
    EXPECT_DOUBLE_EQ(r.best_accuracy, 1.0);
}

TEST(Greedy, FirstPickMatchesBruteForce) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::map<std::size_t, double> signal;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.5);
        std::vector<std::size_t> cands{3, 9, 14, 22, 37, 50};
        for (auto c : cands) signal[c] = u(rng);
        auto t = testutil::planted_table(4, 3, 100 + seed, signal);
        auto eval = knn_cv(t);
        double best = -1;
        std::size_t want = 0;
        for (auto c : cands) {
            const double acc = eval({c});
            if (acc > best) best = acc, want = c;
        }
        auto r = greedy_select(cands, 1, eval);
        EXPECT_EQ(r.step_feature[0], feature_registry()[want].name) << seed;
        EXPECT_DOUBLE_EQ(r.step_accuracy[0], best);
    }
}

TEST(Greedy, SingleCandidateAlwaysSelected) {
    auto r = greedy_select({7}, 10, [](const std::vector<std::size_t>&) { return 0.1; });
    EXPECT_EQ(r.features, std::vector<std::string>{feature_registry()[7].name});
    EXPECT_EQ(r.step_accuracy.size(), 1u);
}

TEST(Greedy, InvariantsOnNoisyData) {
    const auto hf = feature_index("ecg_hf"), sac = feature_index("saccade_ratio");
    auto t = testutil::planted_table(4, 3, 7, {{hf, 0.8}, {sac, 0.6}});
    auto eval = knn_cv(t);
    std::vector<std::size_t> cands{hf, sac, 0, 5, 30, 44, 54};
    auto r = greedy_select(cands, 4, eval, 2);
    EXPECT_LE(r.features.size(), 4u);
    EXPECT_EQ(r.step_feature.size(), 4u);
    std::set<std::string> uniq(r.step_feature.begin(), r.step_feature.end());
    EXPECT_EQ(uniq.size(), r.step_feature.size());
    // BF is the prefix at the best step and re-evaluates to the same accuracy
    for (std::size_t i = 0; i < r.features.size(); ++i) EXPECT_EQ(r.features[i], r.step_feature[i]);
    EXPECT_DOUBLE_EQ(eval(r.columns()), r.best_accuracy);
    EXPECT_DOUBLE_EQ(*std::max_element(r.step_accuracy.begin(), r.step_accuracy.end()), r.best_accuracy);
}

TEST(Greedy, TiesGoToCandidateOrderAndPlateauKeepsShortPrefix) {
    auto r = greedy_select({4, 2, 9}, 3, [](const std::vector<std::size_t>&) { return 0.5; });
    EXPECT_EQ(r.step_feature[0], feature_registry()[4].name);
    EXPECT_EQ(r.step_feature[1], feature_registry()[2].name);
    EXPECT_EQ(r.features.size(), 1u);
}

TEST(Greedy, ConfigErrors) {
    auto f = [](const std::vector<std::size_t>&) { return 0.0; };
    EXPECT_THROW(greedy_select({1, 2}, 0, f), ConfigError);
    EXPECT_THROW(greedy_select({}, 3, f), ConfigError);
    EXPECT_THROW(greedy_select({1, 1}, 3, f), ConfigError);
}

TEST(Pca, AxisAlignedDiagonal) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    MatrixXd x(2000, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = 2 * n01(rng), x(i, 1) = n01(rng);
    auto p = pca_fit(x, 1);
    ASSERT_EQ(p.k(), 1);
    EXPECT_NEAR(std::abs(p.components(0, 0)), 1.0, 1e-3);
    EXPECT_GT(p.components(0, 0), 0.0);
    auto proj = p.project(x);
    for (Eigen::Index i = 0; i < 10; ++i)
        EXPECT_NEAR(proj(i, 0), x(i, 0) - p.mean(0), 0.05 * (1 + std::abs(x(i, 1))));
}

TEST(Pca, FullDimensionReconstructs) {
    auto x = random_correlated(50, 6, 2);
    auto p = pca_fit(x, 6);
    MatrixXd back = (p.project(x) * p.components.transpose()).rowwise() + p.mean.transpose();
    EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pca, VariancesMatchIndependentEigensolver) {
    auto x = random_correlated(80, 7, 3);
    MatrixXd c = x.rowwise() - x.colwise().mean();
    MatrixXd cov = c.transpose() * c / double(x.rows());
    auto oracle = jacobi_eigenvalues(cov);
    auto p = pca_fit(x, 7);
    for (int j = 0; j < 7; ++j) EXPECT_NEAR(p.variances(j), oracle[static_cast<std::size_t>(j)], 1e-9 * (1 + oracle[0]));
    // projected columns are uncorrelated, with the eigenvalues as variances
    MatrixXd z = p.project(x);
    MatrixXd zc = z.transpose() * z / double(z.rows());
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            if (i == j) EXPECT_NEAR(zc(i, i), oracle[static_cast<std::size_t>(i)], 1e-9 * (1 + oracle[0]));
            else EXPECT_LE(std::abs(zc(i, j)), 1e-8);
        }
}

TEST(Pca, SignRule) {
    auto p = pca_fit(random_correlated(40, 5, 4), 5);
    for (int j = 0; j < p.k(); ++j) {
        Eigen::Index idx;
        p.components.col(j).cwiseAbs().maxCoeff(&idx);
        EXPECT_GT(p.components(idx, j), 0.0);
    }
}

TEST(Pca, RankDeficiency) {
    MatrixXd x(20, 4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (Eigen::Index i = 0; i < 20; ++i) {
        x(i, 0) = n01(rng);
        x(i, 1) = n01(rng);
        x(i, 2) = x(i, 0) + x(i, 1);
        x(i, 3) = 2 * x(i, 0);
    }
    EXPECT_THROW(pca_fit(x, 3, false), RankError);
    auto p = pca_fit(x, 3, true);
    EXPECT_EQ(p.k(), 2);
    EXPECT_EQ(p.requested, 3);
    EXPECT_THROW(pca_fit(x, 5), ConfigError);
}

TEST(Pca, JsonRoundTrip) {
    auto x = random_correlated(30, 4, 6);
    auto p = pca_fit(x, 2);
    auto q = pca_from_json(to_json(p));
    EXPECT_TRUE(q.components.isApprox(p.components, 0));
    EXPECT_EQ(q.project(x), p.project(x));
}

TEST(FixedList, DefaultsAndErrors) {
    auto r = fixed_list(default_fixed_features());
    EXPECT_EQ(r.features.size(), 10u);
    EXPECT_EQ(r.method, SelectionMethod::Fixed);
    EXPECT_EQ(to_string(r.method), "analysis-based");
    EXPECT_NE(std::find(r.features.begin(), r.features.end(), "visual_intake_ratio"), r.features.end());
    EXPECT_NE(std::find(r.features.begin(), r.features.end(), "saccade_ratio"), r.features.end());
    EXPECT_THROW(fixed_list({"ecg_hf", "no_such_feature"}), UnknownFeatureError);
    EXPECT_THROW(fixed_list({"ecg_hf", "ecg_hf"}), ConfigError);
}

TEST(SelectionJson, RoundTrip) {
    auto r = greedy_select({1, 2, 3}, 2, [](const std::vector<std::size_t>& c) { return double(c.size()) / 4; });
    auto back = selection_from_json(to_json(r));
    EXPECT_EQ(back.features, r.features);
    EXPECT_EQ(back.step_accuracy, r.step_accuracy);
    EXPECT_EQ(back.method, SelectionMethod::Greedy);
}

TEST(SensorMask, CameraOnlyAndIdentity) {
    auto cam = sensor_mask(parse_sensor_groups({"camera"}));
    EXPECT_EQ(cam.size(), 17u);
    for (auto c : cam) EXPECT_EQ(feature_registry()[c].group, SensorGroup::Video);
    auto all = sensor_mask({kSensorGroups.begin(), kSensorGroups.end()});
    EXPECT_EQ(all, all_columns());
    EXPECT_THROW(sensor_mask({}), ConfigError);
    EXPECT_THROW(parse_sensor_groups({"sonar"}), ConfigError);
}

TEST(SensorMask, PlantedHrvEffectNeedsEcg) {
    std::map<std::size_t, double> signal;
    for (const char* n : {"ecg_mean_rri", "ecg_lf", "ecg_hf", "ecg_lf_hf"}) signal[feature_index(n)] = 1.5;
    auto t = testutil::planted_table(6, 3, 9, signal);
    auto eval = knn_cv(t);
    const double with = eval(sensor_mask(parse_sensor_groups({"camera", "watch", "ecg"})));
    const double without = eval(sensor_mask(parse_sensor_groups({"camera", "watch"})));
    EXPECT_GT(with, without + 0.1);
}
