#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "hepot/biofeatures.hpp"
#include "hepot/synth.hpp"

using namespace hepot;

namespace {

RriSequence sequence_from_peaks(const std::vector<double>& peaks) {
    RriSequence r;
    r.peak_times = peaks;
    for (std::size_t i = 1; i < peaks.size(); ++i) r.add_interval(peaks[i], peaks[i] - peaks[i - 1]);
    return r;
}

RriSequence modulated(double freq, double depth, std::uint64_t seed) {
    synth::StateParams p;
    p.hr = 70;
    p.hrv_freq = freq;
    p.hrv_depth = depth;
    p.duration = 300;
    return sequence_from_peaks(synth::rpeak_schedule(p, 0.1 * double(seed), 0.5));
}

// Independent population statistics through Eigen.
std::pair<double, double> eigen_mean_std(std::span<const double> x) {
    Eigen::Map<const Eigen::ArrayXd> a(x.data(), static_cast<Eigen::Index>(x.size()));
    const double m = a.mean();
    return {m, std::sqrt((a - m).square().mean())};
}

}  // namespace

TEST(RriFromHr, Arithmetic) {
    auto hr = SampledSignal::scalar(0.0, 1.0, {60, 120, 75}, "bpm");
    auto r = bio::rri_from_hr(hr);
    ASSERT_EQ(r.intervals.size(), 3u);
    EXPECT_DOUBLE_EQ(r.intervals[0], 1.0);
    EXPECT_DOUBLE_EQ(r.intervals[1], 0.5);
    EXPECT_DOUBLE_EQ(r.intervals[2], 0.8);
    EXPECT_DOUBLE_EQ(r.interval_times[2], 2.0);
    EXPECT_THROW(bio::rri_from_hr(SampledSignal::scalar(0.0, 1.0, {60, 0}, "bpm")), DomainError);
    EXPECT_THROW(bio::rri_from_hr(SampledSignal::scalar(0.0, 1.0, {-5}, "bpm")), DomainError);
}

TEST(ResampleRri, ConstantStaysConstant) {
    auto r = sequence_from_peaks({0.0, 0.8, 1.6, 2.4, 3.2, 4.0});
    auto g = bio::resample_rri(r);
    for (double v : g.signal.values()) EXPECT_NEAR(v, 0.8, 1e-12);
}

TEST(ResampleRri, TwoPointsGiveARamp) {
    RriSequence r;
    r.add_interval(1.0, 0.6);
    r.add_interval(3.0, 1.0);
    auto g = bio::resample_rri(r, 2.0);
    ASSERT_EQ(g.signal.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(g.signal.values()[i], 0.6 + 0.1 * double(i), 1e-12);
    RriSequence one;
    one.add_interval(1.0, 0.6);
    EXPECT_THROW(bio::resample_rri(one), InsufficientDataError);
}

TEST(ResampleRri, ModulationVisibleInSpectrum) {
    auto g = bio::resample_rri(modulated(0.1, 0.1, 1));
    auto pg = spectral::periodogram(g.signal.values(), g.signal.sample_rate());
    std::size_t best = 1;
    for (std::size_t k = 1; k < pg.power.size(); ++k)
        if (pg.power[k] > pg.power[best]) best = k;
    EXPECT_NEAR(pg.frequency(best), 0.1, 2 * pg.df);
}

TEST(ResampleRri, DropoutSpansFlagged) {
    auto r = sequence_from_peaks({0, 1, 2, 3});
    r.add_interval(8, 1.0);
    r.dropouts.push_back({3.0, 7.0});
    auto g = bio::resample_rri(r, 1.0);
    for (std::size_t i = 0; i < g.signal.size(); ++i) {
        const double t = g.signal.time_at(i);
        EXPECT_EQ(g.bridged[i], t > 3.0 && t < 7.0) << t;
    }
}

TEST(HrvFeatures, ConstantIntervals) {
    std::vector<double> peaks;
    for (int i = 0; i < 200; ++i) peaks.push_back(0.8 * i);
    auto f = bio::hrv_features(sequence_from_peaks(peaks));
    ASSERT_TRUE(f.mean_rri);
    EXPECT_NEAR(*f.mean_rri, 0.8, 1e-12);
    ASSERT_TRUE(f.lf_power && f.hf_power);
    EXPECT_NEAR(*f.lf_power, 0.0, 1e-20);
    EXPECT_NEAR(*f.hf_power, 0.0, 1e-20);
    EXPECT_FALSE(f.lf_hf_ratio.has_value());
}

TEST(HrvFeatures, LowFrequencyModulation) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto f = bio::hrv_features(modulated(0.1, 0.05, s));
        ASSERT_TRUE(f.lf_hf_ratio);
        EXPECT_GE(*f.lf_hf_ratio, 5.0);
    }
}

TEST(HrvFeatures, HighFrequencyModulation) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto f = bio::hrv_features(modulated(0.3, 0.05, s));
        ASSERT_TRUE(f.lf_hf_ratio);
        EXPECT_LE(*f.lf_hf_ratio, 0.2);
    }
}

TEST(HrvFeatures, ShortSpanLeavesSpectralMissing) {
    std::vector<double> peaks;
    for (int i = 0; i < 30; ++i) peaks.push_back(0.8 * i);
    auto f = bio::hrv_features(sequence_from_peaks(peaks));
    EXPECT_TRUE(f.mean_rri);
    EXPECT_FALSE(f.lf_power);
    EXPECT_FALSE(f.lf_hf_ratio);
    EXPECT_FALSE(bio::hrv_features(RriSequence{}).mean_rri);
}

TEST(HrvFeatures, LiteralBandsAboveNyquistAreEmpty) {
    auto f = bio::hrv_features(modulated(0.1, 0.05, 0), bio::BandConfig::literal());
    ASSERT_TRUE(f.lf_power);
    EXPECT_EQ(*f.lf_power, 0.0);
    EXPECT_FALSE(f.lf_hf_ratio);
}

TEST(BlinkRate, Arithmetic) {
    auto ev = [](std::size_t n) {
        std::vector<double> t;
        for (std::size_t i = 0; i < n; ++i) t.push_back(double(i));
        return EventSeries(t, std::vector<EyeEvent>(n, EyeEvent::Blink));
    };
    EXPECT_DOUBLE_EQ(bio::blink_rate(ev(0), 120), 0.0);
    EXPECT_DOUBLE_EQ(bio::blink_rate(ev(10), 60), 10.0);
    EXPECT_DOUBLE_EQ(bio::blink_rate(ev(5), 120), 2.5);
    EXPECT_THROW(bio::blink_rate(ev(1), 0), DomainError);
}

namespace {

GazeRecording gaze_of(std::vector<double> gx, std::vector<double> gy, std::vector<EyeEvent> ev,
                      double fs = 30.0) {
    return {SampledSignal(0.0, fs, {"gx", "gy"}, {std::move(gx), std::move(gy)}), std::move(ev)};
}

}  // namespace

TEST(GazeFeatures, FixedPoint) {
    const std::size_t n = 90;
    auto g = gaze_of(std::vector<double>(n, 100), std::vector<double>(n, 50),
                     std::vector<EyeEvent>(n, EyeEvent::VisualIntake));
    auto f = bio::gaze_features(g, 10.0);
    EXPECT_EQ(f.std_gx, 0.0);
    EXPECT_EQ(f.std_gy, 0.0);
    EXPECT_EQ(f.mean_step, 0.0);
    EXPECT_EQ(f.std_step, 0.0);
    EXPECT_EQ(f.large_step_rate, 0.0);
    EXPECT_EQ(f.visual_intake_ratio, 1.0);
}

TEST(GazeFeatures, AlternatingPoints) {
    std::vector<double> gx, gy;
    for (int i = 0; i < 60; ++i) {
        gx.push_back(i % 2 ? 3.0 : 0.0);
        gy.push_back(i % 2 ? 4.0 : 0.0);
    }
    auto f = bio::gaze_features(gaze_of(gx, gy, std::vector<EyeEvent>(60, EyeEvent::Saccade)), 10.0);
    EXPECT_DOUBLE_EQ(f.mean_step, 5.0);
    EXPECT_NEAR(f.std_step, 0.0, 1e-12);
    EXPECT_EQ(f.saccade_ratio, 1.0);
}

TEST(GazeFeatures, RandomWalkMatchesRecomputation) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> step(0, 5);
    std::discrete_distribution<int> evd({70, 20, 5, 5});
    const std::size_t n = 900;
    std::vector<double> gx{640}, gy{360};
    std::vector<EyeEvent> ev{EyeEvent::VisualIntake};
    for (std::size_t i = 1; i < n; ++i) {
        gx.push_back(gx.back() + step(rng));
        gy.push_back(gy.back() + step(rng));
        ev.push_back(static_cast<EyeEvent>(evd(rng)));
    }
    auto g = gaze_of(gx, gy, ev);
    const double thr = 9.0;
    auto f = bio::gaze_features(g, thr);

    EXPECT_NEAR(f.std_gx, eigen_mean_std(gx).second, 1e-9);
    EXPECT_NEAR(f.std_gy, eigen_mean_std(gy).second, 1e-9);
    std::vector<double> d;
    int large = 0;
    for (std::size_t i = 1; i < n; ++i) {
        Eigen::Vector2d a(gx[i], gy[i]), b(gx[i - 1], gy[i - 1]);
        d.push_back((a - b).norm());
        large += d.back() > thr;
    }
    EXPECT_NEAR(f.mean_step, eigen_mean_std(d).first, 1e-9);
    EXPECT_NEAR(f.std_step, eigen_mean_std(d).second, 1e-9);
    EXPECT_NEAR(f.large_step_rate, large / (double(n) / 30.0 / 60.0), 1e-9);
    const auto vi = std::count(ev.begin(), ev.end(), EyeEvent::VisualIntake);
    const auto sc = std::count(ev.begin(), ev.end(), EyeEvent::Saccade);
    EXPECT_DOUBLE_EQ(f.visual_intake_ratio, double(vi) / double(n));
    EXPECT_DOUBLE_EQ(f.saccade_ratio, double(sc) / double(n));
}

TEST(GazeFeatures, BlinkLabelsDoNotCount) {
    auto base = gaze_of({0, 1, 2, 3}, {0, 0, 0, 0},
                        {EyeEvent::VisualIntake, EyeEvent::Other, EyeEvent::Other, EyeEvent::Saccade});
    auto blink = gaze_of({0, 1, 2, 3}, {0, 0, 0, 0},
                         {EyeEvent::VisualIntake, EyeEvent::Blink, EyeEvent::Blink, EyeEvent::Saccade});
    auto a = bio::gaze_features(base, 1.0), b = bio::gaze_features(blink, 1.0);
    EXPECT_EQ(a.visual_intake_ratio, b.visual_intake_ratio);
    EXPECT_EQ(a.saccade_ratio, b.saccade_ratio);
    EXPECT_THROW(bio::gaze_features(gaze_of({0}, {0}, {EyeEvent::Saccade}), 1.0), InsufficientDataError);
}

TEST(EegFeatures, SimpleCases) {
    const auto names = sensor_channels(Sensor::Eeg);
    std::vector<std::vector<double>> cols(10, std::vector<double>{0, 2});
    cols[3] = {5, 5};
    auto f = bio::eeg_features(SampledSignal(0, 1, names, cols));
    EXPECT_DOUBLE_EQ(f.mean[0], 1.0);
    EXPECT_DOUBLE_EQ(f.std[0], 1.0);
    EXPECT_DOUBLE_EQ(f.std[3], 0.0);
    std::vector<std::vector<double>> one(10, std::vector<double>{1});
    EXPECT_THROW(bio::eeg_features(SampledSignal(0, 1, names, one)), InsufficientDataError);
}

TEST(EegFeatures, RandomMatchesRecomputation) {
    synth::SynthConfig cfg;
    synth::StateParams p;
    p.duration = 120;
    auto rng = synth::stream(12, {5});
    auto eeg = synth::gen_eeg(cfg, p, rng);
    auto f = bio::eeg_features(eeg);
    for (std::size_t k = 0; k < 10; ++k) {
        auto [m, s] = eigen_mean_std(eeg.channel(k));
        EXPECT_NEAR(f.mean[k], m, 1e-9 * (1 + std::abs(m)));
        EXPECT_NEAR(f.std[k], s, 1e-9 * (1 + s));
    }
}
