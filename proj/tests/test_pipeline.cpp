#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "hepot/pipeline.hpp"
#include "hepot/study.hpp"
#include "hepot/synth.hpp"
#include "test_util.hpp"

using namespace hepot;
using Eigen::MatrixXd;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Fixture {
    synth::Recording calm, trial;
    FeatureConfig cfg;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        synth::SynthConfig s;
        Fixture x{synth::generate_recording(s, 1, 0, std::nullopt),
                  synth::generate_recording(s, 1, 1, Condition::MultiTask), {}};
        return x;
    }();
    return f;
}

FeatureVector assemble_trial(const TrialSignals& sig) {
    const auto& f = fixture();
    return assemble(sig, f.cfg, gaze_threshold(f.cfg, &f.calm.signals, sig));
}

FeatureVector filled(const std::string& subject, double value) {
    FeatureVector v;
    v.subject = subject;
    for (auto& x : v.values) x = value;
    return v;
}

}  // namespace

TEST(Assemble, FullTrialHasNoMissing) {
    auto v = assemble_trial(fixture().trial.signals);
    EXPECT_EQ(v.missing_count(), 0u);
}

TEST(Assemble, MissingGazeLeavesSevenSlots) {
    auto sig = fixture().trial.signals;
    sig.gaze.reset();
    auto v = assemble(sig, fixture().cfg, gaze_threshold(fixture().cfg, nullptr, sig));
    EXPECT_EQ(v.missing_count(), 7u);
    EXPECT_TRUE(v.missing(feature_index("saccade_ratio")));
    EXPECT_FALSE(v.missing(feature_index("blink_rate")));
}

TEST(Assemble, MissingPoseLeavesSeventeenSlots) {
    auto sig = fixture().trial.signals;
    sig.pose.reset();
    auto v = assemble_trial(sig);
    EXPECT_EQ(v.missing_count(), 17u);
    EXPECT_TRUE(v.missing(feature_index("pose_move_mean_j16")));
    EXPECT_FALSE(v.missing(feature_index("acc_move_mean")));
}

TEST(Assemble, NoSensorsAllMissing) {
    auto v = assemble(TrialSignals{}, fixture().cfg, std::nullopt);
    EXPECT_EQ(v.missing_count(), kFeatureCount);
}

TEST(CalmBaseline, IdenticalCalmGivesZeros) {
    auto v = assemble_trial(fixture().trial.signals);
    v.subject = "s01";
    auto b = calm_baseline(std::span(&v, 1), "s01");
    auto r = relativize(v, b);
    for (const auto& x : r.vector.values) {
        ASSERT_TRUE(x);
        EXPECT_EQ(*x, 0.0);
    }
    EXPECT_TRUE(r.unadjusted.empty());
}

TEST(CalmBaseline, TwoWindowsAverage) {
    std::vector<FeatureVector> w{filled("s01", 1.0), filled("s01", 4.0)};
    w[1].values[3].reset();
    auto b = calm_baseline(w, "s01");
    EXPECT_DOUBLE_EQ(*b.means[0], 2.5);
    EXPECT_DOUBLE_EQ(*b.means[3], 1.0);
}

TEST(Relativize, SubjectMismatch) {
    auto b = calm_baseline(std::vector<FeatureVector>{filled("s01", 1.0)}, "s01");
    EXPECT_THROW(relativize(filled("s02", 1.0), b), SubjectMismatchError);
    EXPECT_NO_THROW(relativize(filled("s02", 1.0), b, RelativeMode::Absolute));
}

TEST(Relativize, MissingBaselinePassesThroughFlagged) {
    auto calm = filled("s01", 1.0);
    calm.values[5].reset();
    auto b = calm_baseline(std::span(&calm, 1), "s01");
    auto v = filled("s01", 3.0);
    v.values[6].reset();
    auto r = relativize(v, b);
    EXPECT_EQ(*r.vector.values[0], 2.0);
    EXPECT_EQ(*r.vector.values[5], 3.0);
    EXPECT_FALSE(r.vector.values[6]);
    ASSERT_EQ(r.unadjusted.size(), 1u);
    EXPECT_EQ(r.unadjusted[0], 5u);
}

TEST(Relativize, ActiveTrialMovesMoreThanCalm) {
    const auto& f = fixture();
    auto calm = assemble(f.calm.signals, f.cfg, gaze_threshold(f.cfg, &f.calm.signals, f.calm.signals));
    auto b = calm_baseline(std::span(&calm, 1), "s01");
    auto v = assemble_trial(f.trial.signals);
    v.subject = "s01";
    auto r = relativize(v, b).vector;
    EXPECT_GT(*r.values[feature_index("acc_move_nograv_mean")], 0.0);
    for (std::size_t j = 1; j < kJointCount; ++j) {
        char name[32];
        std::snprintf(name, sizeof name, "pose_move_mean_j%02zu", j);
        EXPECT_GT(*r.values[feature_index(name)], 0.0) << name;
    }
}

TEST(Impute, MedianConventions) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({1, 3}), 2.0);
    EXPECT_THROW(median({}), AllMissingError);
    MatrixXd train(4, 2);
    train << 1, 1, 2, kNaN, 3, 3, kNaN, kNaN;
    MatrixXd test(1, 2);
    test << kNaN, kNaN;
    auto [a, b] = impute(train, test);
    EXPECT_EQ(b(0, 0), 2.0);
    EXPECT_EQ(b(0, 1), 2.0);
    EXPECT_EQ(a(3, 0), 2.0);
    EXPECT_EQ(a(0, 0), 1.0);

    MatrixXd full(2, 1);
    full << 5, 7;
    EXPECT_EQ(impute(full, full).second, full);

    MatrixXd empty_col(2, 1);
    empty_col << kNaN, kNaN;
    EXPECT_THROW(fit_medians(empty_col), AllMissingError);
}

TEST(Standardize, BasicCases) {
    MatrixXd train(2, 2);
    train << 0, 5, 2, 5;
    auto r = standardize(train, train);
    EXPECT_DOUBLE_EQ(r.train(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(r.train(1, 0), 1.0);
    EXPECT_EQ(r.train(0, 1), 0.0);
    EXPECT_EQ(r.train(1, 1), 0.0);
}

TEST(Standardize, TrainMomentsAndTestUsesTrainStats) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    MatrixXd train(40, 5), test(7, 5);
    for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = 3 * n01(rng) + 10;
    for (Eigen::Index i = 0; i < test.size(); ++i) test.data()[i] = 5 * n01(rng) - 2;
    auto r = standardize(train, test);
    for (Eigen::Index c = 0; c < 5; ++c) {
        const double m = r.train.col(c).mean();
        const double sd = std::sqrt((r.train.col(c).array() - m).square().mean());
        EXPECT_LE(std::abs(m), 1e-10);
        EXPECT_NEAR(sd, 1.0, 1e-12);
        // independent recomputation of the test transform
        const double mu = train.col(c).mean();
        const double s = std::sqrt((train.col(c).array() - mu).square().mean());
        for (Eigen::Index i = 0; i < test.rows(); ++i)
            EXPECT_NEAR(r.apply(i, c), (test(i, c) - mu) / s, 1e-12);
    }
}

TEST(Preprocessor, NoLeakageFromTestRows) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    MatrixXd train(30, 4);
    for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = n01(rng);
    train(3, 1) = kNaN;
    auto p = fit_preprocessor(train, {0, 1, 2, 3});
    const auto before = to_json(p).dump();
    MatrixXd test(5, 4);
    for (Eigen::Index i = 0; i < test.size(); ++i) test.data()[i] = 100 * n01(rng);
    auto t1 = p.transform(test);
    MatrixXd permuted = test.colwise().reverse();
    auto t2 = p.transform(permuted);
    EXPECT_EQ(to_json(p).dump(), before);
    EXPECT_TRUE(t1.colwise().reverse().isApprox(t2));
}

TEST(Preprocessor, JsonRoundTripAndRegistryCheck) {
    MatrixXd train(3, 2);
    train << 1, 2, 3, kNaN, 5, 6;
    auto p = fit_preprocessor(train, {0, 7});
    auto j = to_json(p);
    auto q = preprocessor_from_json(j);
    EXPECT_EQ(q.columns, p.columns);
    EXPECT_EQ(q.medians, p.medians);
    EXPECT_EQ(q.scaler.scale, p.scaler.scale);
    j["registry_hash"] = "deadbeef";
    EXPECT_THROW(preprocessor_from_json(j), ConfigError);
}

TEST(FeatureTable, WideCsvRoundTrip) {
    testutil::TempDir dir;
    FeatureTable t;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 4; ++i) {
        FeatureVector v;
        v.trial_id = "t" + std::to_string(i);
        v.subject = "s0" + std::to_string(i % 2 + 1);
        v.cycle = i % 3 + 1;
        v.condition = kConditions[static_cast<std::size_t>(i % 3)];
        for (auto& x : v.values) x = n01(rng);
        v.values[static_cast<std::size_t>(i * 3)].reset();
        t.rows.push_back(v);
    }
    write_features_wide(dir / "f.csv", t);
    auto back = read_features_wide(dir / "f.csv");
    ASSERT_EQ(back.rows.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].trial_id, t.rows[i].trial_id);
        EXPECT_EQ(back.rows[i].condition, t.rows[i].condition);
        EXPECT_EQ(back.rows[i].values, t.rows[i].values);
    }
    EXPECT_EQ(back.labels(), (std::vector<int>{0, 1, 2, 0}));
}

TEST(FeatureTable, LongLayout) {
    testutil::TempDir dir;
    FeatureVector v;
    v.trial_id = "x";
    v.values[0] = 1.5;
    write_features_long(dir / "l.csv", v);
    auto text = testutil::read_text(dir / "l.csv");
    EXPECT_NE(text.find("x,ecg_mean_rri,1.5,0\n"), std::string::npos);
    EXPECT_NE(text.find("x,pose_move_mean_j16,,1\n"), std::string::npos);
}

TEST(ExtractDataset, MatchesInMemoryStudyAndModesDiffer) {
    testutil::TempDir dir;
    synth::SynthConfig s;
    s.subjects = 1;
    s.trial_duration = s.calm_duration = 70.0;
    auto m = synth::gen_dataset(s, dir.path());
    FeatureConfig cfg;
    auto rel = extract_dataset(m, cfg, RelativeMode::Relative, 2);
    auto abs = extract_dataset(m, cfg, RelativeMode::Absolute, 1);
    ASSERT_EQ(rel.rows.size(), 9u);
    bool differ = false;
    for (std::size_t i = 0; i < rel.rows.size(); ++i) {
        EXPECT_EQ(rel.rows[i].trial_id, m.trials[i].id);
        if (rel.rows[i].values != abs.rows[i].values) differ = true;
    }
    EXPECT_TRUE(differ);

    // CSV round trips are exact, so the on-disk and in-memory paths agree.
    auto mem = synthetic_feature_table(s, cfg, RelativeMode::Relative);
    ASSERT_EQ(mem.rows.size(), rel.rows.size());
    for (std::size_t i = 0; i < rel.rows.size(); ++i) EXPECT_EQ(mem.rows[i].values, rel.rows[i].values);
}
