#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hepot/evaluation.hpp"
#include "hepot/knn.hpp"
#include "hepot/mlp.hpp"

using namespace hepot;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
    return m;
}

FitConfig knn_config(int k = 3) {
    FitConfig cfg;
    cfg.model.kind = ModelKind::Knn;
    cfg.model.knn_k = k;
    return cfg;
}

FitConfig small_mlp() {
    FitConfig cfg;
    cfg.model.mlp.hidden = {16};
    cfg.model.mlp.epochs = 200;
    cfg.model.mlp.learning_rate = 0.1;
    return cfg;
}

}  // namespace

TEST(Mlp, GradientMatchesFiniteDifferences) {
    Mlp net({4, 5, 3, 3}, 11);
    auto x = gaussian(7, 4, 2);
    std::vector<int> y{0, 1, 2, 2, 1, 0, 1};
    VectorXd grad;
    const double l0 = net.loss_and_gradient(x, y, grad);
    EXPECT_NEAR(l0, net.loss(x, y), 1e-12);
    const VectorXd p = net.parameters();
    ASSERT_EQ(grad.size(), p.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        VectorXd q = p;
        q(i) += h;
        net.set_parameters(q);
        const double up = net.loss(x, y);
        q(i) -= 2 * h;
        net.set_parameters(q);
        const double dn = net.loss(x, y);
        EXPECT_NEAR(grad(i), (up - dn) / (2 * h), 1e-6) << i;
    }
}

TEST(Mlp, LearnsXor) {
    MatrixXd x(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    std::vector<int> y{0, 1, 1, 0};
    MlpConfig cfg;
    cfg.hidden = {8};
    cfg.learning_rate = 0.5;
    cfg.epochs = 3000;
    cfg.seed = 3;
    auto net = mlp_train(x, y, 2, cfg);
    EXPECT_EQ(net.predict(x), y);
}

TEST(Mlp, ProbabilitiesAreDistributions) {
    Mlp net({3, 6, 3}, 1);
    auto p = net.predict_proba(gaussian(20, 3, 5));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
        EXPECT_GE(p.row(r).minCoeff(), 0.0);
    }
}

TEST(Mlp, Errors) {
    auto x = gaussian(6, 2, 1);
    std::vector<int> same(6, 1);
    EXPECT_THROW(mlp_train(x, same, 3, MlpConfig{}), DegenerateLabelsError);
    std::vector<int> short_y{0, 1};
    EXPECT_THROW(mlp_train(x, short_y, 3, MlpConfig{}), DimensionError);
    Mlp net({2, 3}, 0);
    EXPECT_THROW(net.predict_proba(gaussian(2, 5, 0)), DimensionError);
    MlpConfig bad;
    bad.momentum = 1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Mlp, JsonRoundTripPredictsIdentically) {
    Mlp net({3, 4, 3}, 9);
    auto x = gaussian(10, 3, 4);
    auto back = Mlp::from_json(net.to_json());
    EXPECT_EQ(back.predict_proba(x), net.predict_proba(x));
}

TEST(Mlp, FullBatchTrainingIsRowOrderEquivariant) {
    auto x = gaussian(30, 3, 7);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = x(i, 0) > 0.3 ? 2 : (x(i, 1) > 0 ? 1 : 0);
    MlpConfig cfg;
    cfg.hidden = {6};
    cfg.epochs = 100;
    auto a = mlp_train(x, y, 3, cfg);

    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
    MatrixXd xp(30, 3);
    std::vector<int> yp(30);
    for (int i = 0; i < 30; ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        yp[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    auto b = mlp_train(xp, yp, 3, cfg);
    auto q = gaussian(15, 3, 8);
    EXPECT_LT((a.predict_proba(q) - b.predict_proba(q)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Knn, MatchesBruteForce) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> lab(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        auto train = gaussian(25, 3, 100 + static_cast<std::uint64_t>(trial));
        std::vector<int> y(25);
        for (auto& v : y) v = lab(rng);
        const Eigen::RowVectorXd q = gaussian(1, 3, 900 + static_cast<std::uint64_t>(trial));
        for (int k : {1, 3, 5}) {
            std::vector<std::pair<double, int>> d;
            for (int i = 0; i < 25; ++i) d.push_back({(train.row(i) - q).norm(), y[static_cast<std::size_t>(i)]});
            std::sort(d.begin(), d.end());
            int votes[3]{};
            double sums[3]{};
            for (int i = 0; i < k; ++i) votes[d[static_cast<std::size_t>(i)].second]++, sums[d[static_cast<std::size_t>(i)].second] += d[static_cast<std::size_t>(i)].first;
            int want = -1;
            for (int c = 0; c < 3; ++c) {
                if (!votes[c]) continue;
                if (want < 0 || votes[c] > votes[want] || (votes[c] == votes[want] && sums[c] < sums[want])) want = c;
            }
            EXPECT_EQ(knn_predict(train, y, q, k, 3), want) << trial << " k=" << k;
        }
    }
}

TEST(Knn, TieRules) {
    MatrixXd train(4, 1);
    train << -1, 2, 1, -2;
    // one vote each at k=2; class 1 is nearer
    EXPECT_EQ(knn_predict(train, {0, 1, 2, 2}, Eigen::RowVectorXd::Constant(1, 0.2), 2, 3), 2);
    EXPECT_EQ(knn_predict(train, {0, 1, 2, 2}, Eigen::RowVectorXd::Constant(1, -0.2), 2, 3), 0);
    // exact distance tie: equal votes and sums, lower class wins
    EXPECT_EQ(knn_predict(train, {2, 0, 1, 1}, Eigen::RowVectorXd::Constant(1, 0.0), 2, 3), 1);
    // equal distances at the k boundary resolve by training row
    EXPECT_EQ(knn_predict(train, {2, 0, 1, 0}, Eigen::RowVectorXd::Constant(1, 0.0), 1, 3), 2);
    EXPECT_THROW(knn_predict(train, {0, 1, 2, 2}, Eigen::RowVectorXd::Zero(1), 5, 3), ConfigError);
    EXPECT_THROW(knn_predict(train, {0, 1, 2, 2}, Eigen::RowVectorXd::Zero(2), 1, 3), DimensionError);
}

TEST(Score, HandComputedTable) {
    ConfusionMatrix c;
    c.m << 8, 1, 1,
           2, 5, 3,
           0, 4, 6;
    auto s = score(c);
    EXPECT_DOUBLE_EQ(s.acc3, 19.0 / 30.0);
    EXPECT_DOUBLE_EQ(s.acc2, (8.0 + 5 + 3 + 4 + 6) / 30.0);
}

TEST(Score, DiagonalAndCrossStressConfusion) {
    ConfusionMatrix d;
    for (int i = 0; i < 3; ++i) d.add(i, i, 4);
    EXPECT_DOUBLE_EQ(score(d).acc3, 1.0);
    EXPECT_DOUBLE_EQ(score(d).acc2, 1.0);
    ConfusionMatrix x;
    x.add(1, 2, 3);  // time pressure called multitask: wrong 3-class, right 2-class
    x.add(0, 1, 1);
    EXPECT_DOUBLE_EQ(score(x).acc3, 0.0);
    EXPECT_DOUBLE_EQ(score(x).acc2, 0.75);
    EXPECT_THROW(score(ConfusionMatrix{}), EmptyMatrixError);
}

TEST(Folds, CycleSplitSizes) {
    auto t = testutil::planted_table(10, 3, 1, {});
    auto f = cycle_folds(t);
    ASSERT_EQ(f.size(), 3u);
    for (const auto& fold : f) {
        EXPECT_EQ(fold.train.size(), 60u);
        EXPECT_EQ(fold.test.size(), 30u);
    }
    auto one = testutil::planted_table(1, 3, 1, {});
    for (const auto& fold : cycle_folds(one)) {
        EXPECT_EQ(fold.train.size(), 6u);
        EXPECT_EQ(fold.test.size(), 3u);
    }
    auto ragged = t;
    ragged.rows.erase(std::remove_if(ragged.rows.begin(), ragged.rows.end(),
                                     [](const FeatureVector& v) { return v.subject == "s02" && v.cycle == 3; }),
                      ragged.rows.end());
    EXPECT_THROW(cycle_folds(ragged), ProtocolError);
    EXPECT_THROW(cycle_folds(testutil::planted_table(3, 1, 1, {})), ProtocolError);
}

TEST(Folds, Loso) {
    auto two = testutil::planted_table(2, 3, 1, {});
    auto f = loso_folds(two);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[0].test.size(), 9u);
    EXPECT_EQ(f[0].train.size(), 9u);
    auto t = testutil::planted_table(4, 3, 1, {});
    auto ex = loso_folds(t, {"s03"});
    ASSERT_EQ(ex.size(), 3u);
    for (const auto& fold : ex) {
        EXPECT_NE(fold.name, "s03");
        EXPECT_EQ(fold.train.size(), 27u);  // the excluded subject still trains
    }
    EXPECT_THROW(loso_folds(testutil::planted_table(1, 3, 1, {})), ProtocolError);
    EXPECT_THROW(loso_folds(t, {"s09"}), ProtocolError);
    EXPECT_THROW(loso_folds(two, {"s01", "s02"}), ProtocolError);
}

TEST(Evaluate, PlantedSignalIsLearnedAndScoresAggregate) {
    const auto hf = feature_index("ecg_hf"), br = feature_index("blink_rate");
    auto t = testutil::planted_table(4, 3, 2, {{hf, 6.0}, {br, 6.0}});
    for (auto cfg : {knn_config(), small_mlp()}) {
        cfg.columns = {0, hf, 1, br, 2};
        auto r = cv_by_cycle(t, cfg);
        EXPECT_GE(r.mean.acc3, 0.9) << to_string(cfg.model.kind);
        EXPECT_EQ(r.folds.size(), 3u);
        double mean = 0;
        Eigen::Matrix3d pooled = Eigen::Matrix3d::Zero();
        for (const auto& f : r.folds) mean += f.scores.acc3 / 3, pooled += f.confusion.m;
        EXPECT_NEAR(r.mean.acc3, mean, 1e-12);
        EXPECT_NEAR(r.pooled.acc3, pooled.trace() / pooled.sum(), 1e-12);
        EXPECT_TRUE(r.mean_confusion.m.isApprox(pooled / 3.0));
    }
}

TEST(Evaluate, NoiseStaysNearChance) {
    auto t = testutil::planted_table(10, 3, 3, {});
    auto r = loso_cv(t, knn_config(5));
    EXPECT_LT(r.pooled.acc3, 0.5);
}

TEST(Evaluate, TestLabelsDoNotReachTraining) {
    auto t = testutil::planted_table(4, 3, 4, {{feature_index("ecg_hf"), 1.0}});
    auto cfg = small_mlp();
    auto folds = cycle_folds(t);
    auto a = evaluate(t, {folds[2]}, cfg);
    auto mutated = t;
    for (auto i : folds[2].test) {
        auto& c = mutated.rows[i].condition;
        c = static_cast<Condition>((static_cast<int>(*c) + 1) % 3);
    }
    auto b = evaluate(mutated, {folds[2]}, cfg);
    // same predictions, so the per-class prediction counts agree
    EXPECT_EQ(a.folds[0].confusion.m.colwise().sum(), b.folds[0].confusion.m.colwise().sum());
    EXPECT_NE(a.folds[0].confusion.m, b.folds[0].confusion.m);
}

TEST(Evaluate, DeterministicAcrossRunsAndWorkers) {
    auto t = testutil::planted_table(3, 3, 5, {{feature_index("ecg_hf"), 1.0}});
    auto cfg = small_mlp();
    auto a = to_json(cv_by_cycle(t, cfg, 1));
    auto b = to_json(cv_by_cycle(t, cfg, 3));
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Evaluate, PcaPathAndDegenerateKnn) {
    const auto hf = feature_index("ecg_hf");
    auto t = testutil::planted_table(3, 3, 6, {{hf, 5.0}});
    auto cfg = knn_config();
    cfg.columns = {hf, 0, 1, 2, 3, 4};
    cfg.pca_components = 4;
    auto r = cv_by_cycle(t, cfg);
    EXPECT_GT(r.mean.acc3, 0.5);
    auto one_class = testutil::planted_table(2, 2, 1, {});
    for (auto& v : one_class.rows) v.condition = Condition::Normal;
    EXPECT_THROW(fit_model(one_class, knn_config(1)), DegenerateLabelsError);
    auto model = fit_model(t, knn_config());
    EXPECT_THROW(model.predict(MatrixXd::Zero(2, 3)), DimensionError);
}
