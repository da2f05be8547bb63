#pragma once

// Synthetic multi-sensor recordings with exact ground truth. Every number
// here is a synthetic default chosen to exercise the detectors and the
// classifier; none is calibrated against human data.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hepot/dataset.hpp"
#include "hepot/errors.hpp"
#include "hepot/io.hpp"
#include "hepot/parallel.hpp"
#include "hepot/signal.hpp"

namespace hepot::synth {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream derived from the master seed and a key path.
inline Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(seed);
    for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return Rng(h);
}

/// Additive shifts of the generative parameters.
struct Effect {
    double hr = 0.0;          // bpm
    double hrv_depth = 0.0;   // fraction
    double artifacts = 0.0;   // bursts/min
    double blink = 0.0;       // blinks/min
    double movement = 0.0;    // movement level
    double saccade = 0.0;     // saccade time fraction
    double attention = 0.0;   // EEG attention score
};

struct SensorRates {
    double ecg = 250.0;
    double eog = 250.0;
    double hr = 1.0;
    double acc = 50.0;
    double gaze = 30.0;
    double eeg = 1.0;
    double pose = 30.0;
};

struct SynthConfig {
    std::uint64_t seed = 1;
    int subjects = 10;
    double trial_duration = 180.0;  // s
    double calm_duration = 180.0;   // s
    SensorRates rates;

    double base_hr = 70.0;         // bpm
    double hrv_freq = 0.1;         // Hz
    double hrv_depth = 0.05;       // fraction of the mean interval
    std::optional<double> snr_db = 20.0;  // nullopt: noiseless
    double artifact_rate = 0.0;    // bursts/min
    double artifact_rms = 0.5;     // mV
    double qrs_amplitude = 1.0;    // mV
    double qrs_width = 0.040;      // s, +-2 sigma support of the Gaussian template

    double blink_rate = 15.0;      // blinks/min
    double blink_amplitude = 1.0;  // mV
    double blink_refractory = 1.0; // s
    double eog_drift = 0.3;        // mV
    double eog_noise = 0.02;       // mV

    double movement = 0.5;         // acc oscillation RMS (m/s^2) at the base state
    double pose_scale = 0.04;      // pose oscillation amplitude per unit movement
    double acc_noise = 0.05;       // m/s^2 per axis
    double hr_noise = 1.0;         // bpm
    double saccade_ratio = 0.15;

    std::array<Effect, kConditionCount> condition_effects{
        Effect{},
        Effect{6.0, -0.01, 1.0, 4.0, 0.15, 0.05, 8.0},
        Effect{12.0, -0.02, 3.0, -4.0, 0.40, 0.10, 15.0}};
    Effect calm_effect{-3.0, 0.0, -1.0, 0.0, -0.40, -0.05, -10.0};
    Effect trial_jitter{2.0, 0.005, 0.0, 2.0, 0.05, 0.02, 4.0};      // per-trial sd
    Effect subject_offset_sd{5.0, 0.01, 0.0, 3.0, 0.1, 0.03, 5.0};   // calm and trials
    Effect subject_task_offset_sd{5.0, 0.01, 0.0, 3.0, 0.1, 0.03, 5.0};  // trials only

    std::set<int> subjects_without_gaze;  // 1-based subject indices

    void validate() const {
        if (subjects < 0) throw ConfigError("subjects must be >= 0");
        if (!(base_hr >= 30.0 && base_hr <= 220.0)) throw ConfigError("base_hr must be in [30, 220]");
        if (!(hrv_depth >= 0.0 && hrv_depth < 0.5)) throw ConfigError("hrv depth must be in [0, 0.5)");
        if (!(trial_duration > 0.0) || !(calm_duration > 0.0))
            throw ConfigError("durations must be > 0");
        for (double r : {rates.ecg, rates.eog, rates.hr, rates.acc, rates.gaze, rates.eeg, rates.pose})
            if (!(r > 0.0)) throw ConfigError("sample rates must be > 0");
        if (artifact_rate < 0.0 || blink_rate < 0.0) throw ConfigError("event rates must be >= 0");
        if (!(qrs_width > 0.0)) throw ConfigError("qrs_width must be > 0");
    }
};

/// Generative parameters of one recording after effects and offsets.
struct StateParams {
    double hr = 70.0;
    double hrv_freq = 0.1;
    double hrv_depth = 0.05;
    double artifact_rate = 0.0;
    double blink_rate = 15.0;
    double movement = 0.5;
    double saccade_ratio = 0.15;
    double attention = 50.0;
    double duration = 180.0;
};

inline void apply(StateParams& p, const Effect& e, double scale = 1.0) {
    p.hr += scale * e.hr;
    p.hrv_depth += scale * e.hrv_depth;
    p.artifact_rate += scale * e.artifacts;
    p.blink_rate += scale * e.blink;
    p.movement += scale * e.movement;
    p.saccade_ratio += scale * e.saccade;
    p.attention += scale * e.attention;
}

inline void clamp_params(StateParams& p) {
    p.hr = std::clamp(p.hr, 30.0, 220.0);
    p.hrv_depth = std::clamp(p.hrv_depth, 0.0, 0.45);
    p.artifact_rate = std::max(p.artifact_rate, 0.0);
    p.blink_rate = std::max(p.blink_rate, 0.0);
    p.movement = std::max(p.movement, 0.0);
    p.saccade_ratio = std::clamp(p.saccade_ratio, 0.0, 0.9);
    p.attention = std::clamp(p.attention, 0.0, 100.0);
}

inline StateParams base_params(const SynthConfig& cfg, std::optional<Condition> condition) {
    StateParams p;
    p.hr = cfg.base_hr;
    p.hrv_freq = cfg.hrv_freq;
    p.hrv_depth = cfg.hrv_depth;
    p.artifact_rate = cfg.artifact_rate;
    p.blink_rate = cfg.blink_rate;
    p.movement = cfg.movement;
    p.saccade_ratio = cfg.saccade_ratio;
    p.attention = 50.0;
    if (condition) {
        apply(p, cfg.condition_effects[static_cast<std::size_t>(*condition)]);
        p.duration = cfg.trial_duration;
    } else {
        apply(p, cfg.calm_effect);
        p.duration = cfg.calm_duration;
    }
    clamp_params(p);
    return p;
}

struct GroundTruth {
    std::vector<double> r_peak_times;
    std::vector<double> blink_times;
    std::optional<Condition> condition;
};

namespace detail {

inline Effect draw_effect(Rng& rng, const Effect& sd) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Effect e;
    e.hr = sd.hr * n01(rng);
    e.hrv_depth = sd.hrv_depth * n01(rng);
    e.artifacts = sd.artifacts * n01(rng);
    e.blink = sd.blink * n01(rng);
    e.movement = sd.movement * n01(rng);
    e.saccade = sd.saccade * n01(rng);
    e.attention = sd.attention * n01(rng);
    return e;
}

/// Sum of `k` unit-RMS random sinusoids with frequencies in [f_lo, f_hi].
struct RandomTone {
    std::vector<double> freq, phase;
    RandomTone(Rng& rng, std::size_t k, double f_lo, double f_hi) {
        std::uniform_real_distribution<double> uf(f_lo, f_hi), up(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < k; ++i) {
            freq.push_back(uf(rng));
            phase.push_back(up(rng));
        }
    }
    double operator()(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < freq.size(); ++i)
            s += std::sin(2.0 * std::numbers::pi * freq[i] * t + phase[i]);
        return freq.empty() ? 0.0 : s * std::sqrt(2.0 / static_cast<double>(freq.size()));
    }
};

inline std::size_t sample_count(double duration, double rate) {
    return static_cast<std::size_t>(std::llround(duration * rate));
}

}  // namespace detail

/// R-peak times following the modulated interval schedule
/// rr(t) = 60/hr * (1 + depth * sin(2 pi f t + phase)).
inline std::vector<double> rpeak_schedule(const StateParams& p, double phase, double first_offset) {
    const double rr0 = 60.0 / p.hr;
    std::vector<double> t;
    double tk = first_offset * rr0;
    while (tk < p.duration) {
        t.push_back(tk);
        tk += rr0 * (1.0 + p.hrv_depth * std::sin(2.0 * std::numbers::pi * p.hrv_freq * tk + phase));
    }
    return t;
}

inline std::pair<SampledSignal, GroundTruth> gen_ecg(const SynthConfig& cfg, const StateParams& p,
                                                     Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double phase = 2.0 * std::numbers::pi * u01(rng);
    const double offset = 0.25 + 0.5 * u01(rng);
    GroundTruth truth;
    truth.r_peak_times = rpeak_schedule(p, phase, offset);

    const double fs = cfg.rates.ecg;
    const std::size_t n = detail::sample_count(p.duration, fs);
    std::vector<double> x(n, 0.0);
    const double sigma = cfg.qrs_width / 4.0;
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(5.0 * sigma * fs));
    for (double tp : truth.r_peak_times) {
        const auto c = static_cast<std::ptrdiff_t>(std::llround(tp * fs));
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, c - reach);
             i <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, c + reach); ++i) {
            const double z = (static_cast<double>(i) / fs - tp) / sigma;
            x[static_cast<std::size_t>(i)] += cfg.qrs_amplitude * std::exp(-0.5 * z * z);
        }
    }

    if (cfg.snr_db) {
        double power = 0.0;
        for (double v : x) power += v * v;
        power /= static_cast<double>(std::max<std::size_t>(n, 1));
        const double sd = std::sqrt(power / std::pow(10.0, *cfg.snr_db / 10.0));
        std::normal_distribution<double> noise(0.0, sd);
        for (double& v : x) v += noise(rng);
    }

    if (p.artifact_rate > 0.0) {
        std::exponential_distribution<double> gap(p.artifact_rate / 60.0);
        std::uniform_real_distribution<double> len(0.5, 2.0);
        for (double t = gap(rng); t < p.duration; t += gap(rng)) {
            const double dur = len(rng);
            detail::RandomTone tone(rng, 24, 5.0, 25.0);
            const std::size_t i0 = detail::sample_count(t, fs);
            const std::size_t i1 = std::min(n, detail::sample_count(t + dur, fs));
            for (std::size_t i = i0; i < i1; ++i)
                x[i] += cfg.artifact_rms * tone(static_cast<double>(i) / fs);
            t += dur;
        }
    }
    return {SampledSignal::scalar(0.0, fs, std::move(x)), std::move(truth)};
}

inline std::pair<SampledSignal, GroundTruth> gen_ecg(const SynthConfig& cfg, Condition condition,
                                                     Rng& rng) {
    cfg.validate();
    auto r = gen_ecg(cfg, base_params(cfg, condition), rng);
    r.second.condition = condition;
    return r;
}

/// Baseline drift plus positive blink pulses from a Poisson process thinned
/// by the refractory period.
inline std::pair<SampledSignal, GroundTruth> gen_eog(const SynthConfig& cfg, const StateParams& p,
                                                     Rng& rng) {
    const double fs = cfg.rates.eog;
    const std::size_t n = detail::sample_count(p.duration, fs);
    detail::RandomTone drift(rng, 3, 0.01, 0.1);
    std::normal_distribution<double> noise(0.0, cfg.eog_noise);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        x[i] = cfg.eog_drift * drift(t) + (cfg.eog_noise > 0.0 ? noise(rng) : 0.0);
    }

    GroundTruth truth;
    if (p.blink_rate > 0.0) {
        std::exponential_distribution<double> gap(p.blink_rate / 60.0);
        std::uniform_real_distribution<double> amp(0.8, 1.2);
        const double edge = 0.3;
        double last = -1e9;
        for (double t = gap(rng); t < p.duration - edge; t += gap(rng)) {
            if (t < edge || t - last < cfg.blink_refractory) continue;
            truth.blink_times.push_back(t);
            last = t;
        }
        const double sigma = 0.06;
        const auto reach = static_cast<std::ptrdiff_t>(std::ceil(5.0 * sigma * fs));
        for (double tb : truth.blink_times) {
            const double a = cfg.blink_amplitude * amp(rng);
            const auto c = static_cast<std::ptrdiff_t>(std::llround(tb * fs));
            for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, c - reach);
                 i <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, c + reach); ++i) {
                const double z = (static_cast<double>(i) / fs - tb) / sigma;
                x[static_cast<std::size_t>(i)] += a * std::exp(-0.5 * z * z);
            }
        }
    }
    return {SampledSignal::scalar(0.0, fs, std::move(x)), std::move(truth)};
}

inline std::pair<SampledSignal, GroundTruth> gen_eog(const SynthConfig& cfg, Condition condition,
                                                     Rng& rng) {
    cfg.validate();
    auto r = gen_eog(cfg, base_params(cfg, condition), rng);
    r.second.condition = condition;
    return r;
}

/// Gravity along a random fixed direction plus a band-limited oscillation of
/// RMS `movement` along a random axis plus per-axis white noise.
inline SampledSignal gen_acc(const SynthConfig& cfg, const StateParams& p, Rng& rng) {
    const double fs = cfg.rates.acc;
    const std::size_t n = detail::sample_count(p.duration, fs);
    std::normal_distribution<double> n01(0.0, 1.0);
    auto unit = [&] {
        std::array<double, 3> v{n01(rng), n01(rng), n01(rng)};
        const double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        for (double& c : v) c /= s;
        return v;
    };
    const auto g = unit();
    const auto dir = unit();
    detail::RandomTone tone(rng, 6, 0.5, 3.0);
    std::array<std::vector<double>, 3> axes;
    for (auto& a : axes) a.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = p.movement * tone(static_cast<double>(i) / fs);
        for (std::size_t k = 0; k < 3; ++k)
            axes[k][i] = 9.81 * g[k] + s * dir[k] + (cfg.acc_noise > 0.0 ? cfg.acc_noise * n01(rng) : 0.0);
    }
    return {0.0, fs, {"ax", "ay", "az"}, {axes[0], axes[1], axes[2]}};
}

inline SampledSignal gen_acc(const SynthConfig& cfg, Condition condition, Rng& rng) {
    cfg.validate();
    return gen_acc(cfg, base_params(cfg, condition), rng);
}

/// Root-relative 17-joint skeleton; every non-root joint oscillates smoothly
/// around its rest position with amplitude pose_scale * movement.
inline SampledSignal gen_pose(const SynthConfig& cfg, const StateParams& p, Rng& rng) {
    const double fs = cfg.rates.pose;
    const std::size_t n = detail::sample_count(p.duration, fs);
    std::uniform_real_distribution<double> rest(-0.5, 0.5);
    const double amp = cfg.pose_scale * p.movement;
    std::vector<std::vector<double>> cols(3 * kJointCount, std::vector<double>(n, 0.0));
    for (std::size_t j = 1; j < kJointCount; ++j) {
        for (std::size_t a = 0; a < 3; ++a) {
            const double base = rest(rng);
            detail::RandomTone tone(rng, 4, 0.2, 2.0);
            auto& col = cols[3 * j + a];
            for (std::size_t i = 0; i < n; ++i)
                col[i] = base + amp * tone(static_cast<double>(i) / fs);
        }
    }
    return {0.0, fs, pose_channel_names(), std::move(cols)};
}

inline SampledSignal gen_pose(const SynthConfig& cfg, Condition condition, Rng& rng) {
    cfg.validate();
    return gen_pose(cfg, base_params(cfg, condition), rng);
}

/// Smartwatch heart rate at the watch rate, sampled from the same interval
/// schedule family as the ECG.
inline SampledSignal gen_hr(const SynthConfig& cfg, const StateParams& p, Rng& rng) {
    const double fs = cfg.rates.hr;
    const std::size_t n = detail::sample_count(p.duration, fs);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, cfg.hr_noise);
    const double phase = 2.0 * std::numbers::pi * u01(rng);
    std::vector<double> bpm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double rr = (60.0 / p.hr) *
                          (1.0 + p.hrv_depth * std::sin(2.0 * std::numbers::pi * p.hrv_freq * t + phase));
        bpm[i] = std::max(20.0, 60.0 / rr + (cfg.hr_noise > 0.0 ? noise(rng) : 0.0));
    }
    return SampledSignal::scalar(0.0, fs, std::move(bpm), "bpm");
}

/// Fixation / saccade alternation. Fixation frames are labelled visual
/// intake (occasionally other or blink), saccade frames move linearly to
/// the next fixation point.
inline GazeRecording gen_gaze(const SynthConfig& cfg, const StateParams& p, Rng& rng) {
    const double fs = cfg.rates.gaze;
    const std::size_t n = detail::sample_count(p.duration, fs);
    std::normal_distribution<double> jitter(0.0, 3.0), jump(0.0, 120.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double sacc_len = 3.0;
    const double ratio = std::clamp(p.saccade_ratio, 0.01, 0.9);
    const double fix_len = sacc_len * (1.0 - ratio) / ratio;
    std::geometric_distribution<int> fix_frames(1.0 / (1.0 + fix_len));

    std::vector<double> gx, gy;
    std::vector<EyeEvent> ev;
    gx.reserve(n);
    gy.reserve(n);
    ev.reserve(n);
    double cx = 640.0, cy = 360.0;
    while (gx.size() < n) {
        const int nf = fix_frames(rng) + 1;
        const double r = u01(rng);
        const EyeEvent label = r < 0.04 ? EyeEvent::Other : (r < 0.06 ? EyeEvent::Blink : EyeEvent::VisualIntake);
        for (int k = 0; k < nf && gx.size() < n; ++k) {
            gx.push_back(cx + jitter(rng));
            gy.push_back(cy + jitter(rng));
            ev.push_back(label);
        }
        const double nx = std::clamp(cx + jump(rng), 0.0, 1280.0);
        const double ny = std::clamp(cy + jump(rng), 0.0, 720.0);
        for (int k = 1; k <= static_cast<int>(sacc_len) && gx.size() < n; ++k) {
            const double f = k / (sacc_len + 1.0);
            gx.push_back(cx + f * (nx - cx));
            gy.push_back(cy + f * (ny - cy));
            ev.push_back(EyeEvent::Saccade);
        }
        cx = nx;
        cy = ny;
    }
    return {SampledSignal(0.0, fs, {"gx", "gy"}, {std::move(gx), std::move(gy)}), std::move(ev)};
}

/// Band powers (log-normal) plus attention and meditation scores in [0, 100].
inline SampledSignal gen_eeg(const SynthConfig& cfg, const StateParams& p, Rng& rng) {
    const double fs = cfg.rates.eeg;
    const std::size_t n = detail::sample_count(p.duration, fs);
    static constexpr std::array<double, 8> log_means{12.0, 11.0, 10.0, 10.0, 9.5, 9.5, 9.0, 8.5};
    std::normal_distribution<double> n01(0.0, 1.0);
    const auto names = sensor_channels(Sensor::Eeg);
    std::vector<std::vector<double>> cols(names.size(), std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t b = 0; b < log_means.size(); ++b)
            cols[b][i] = std::exp(log_means[b] + 0.5 * n01(rng));
        cols[8][i] = std::clamp(p.attention + 15.0 * n01(rng), 0.0, 100.0);
        cols[9][i] = std::clamp(100.0 - p.attention + 15.0 * n01(rng), 0.0, 100.0);
    }
    return {0.0, fs, names, std::move(cols)};
}

// ---------------------------------------------------------------------------
// Dataset generation

struct Recording {
    TrialSignals signals;
    GroundTruth ecg_truth;
    GroundTruth eog_truth;
};

enum class StreamKey : std::uint64_t { Subject = 1, SubjectTask, Trial, Ecg, Eog, Hr, Acc, Gaze, Eeg, Pose };

inline std::uint64_t key(StreamKey k) { return static_cast<std::uint64_t>(k); }

/// Generates every sensor of one recording. `condition == nullopt` yields the
/// subject's calm segment.
inline Recording generate_recording(const SynthConfig& cfg, int subject, int cycle,
                                    std::optional<Condition> condition) {
    cfg.validate();
    const auto sub = static_cast<std::uint64_t>(subject);
    const std::uint64_t rec =
        condition ? static_cast<std::uint64_t>(cycle * 10 + static_cast<int>(*condition) + 1) : 0;

    StateParams p = base_params(cfg, condition);
    auto subject_rng = stream(cfg.seed, {sub, key(StreamKey::Subject)});
    apply(p, detail::draw_effect(subject_rng, cfg.subject_offset_sd));
    if (condition) {
        auto task_rng = stream(cfg.seed, {sub, key(StreamKey::SubjectTask)});
        apply(p, detail::draw_effect(task_rng, cfg.subject_task_offset_sd));
        auto trial_rng = stream(cfg.seed, {sub, rec, key(StreamKey::Trial)});
        apply(p, detail::draw_effect(trial_rng, cfg.trial_jitter));
    }
    clamp_params(p);

    auto rng_for = [&](StreamKey k) { return stream(cfg.seed, {sub, rec, key(k)}); };
    Recording r;
    {
        auto g = rng_for(StreamKey::Ecg);
        auto [sig, truth] = gen_ecg(cfg, p, g);
        r.signals.ecg = std::move(sig);
        r.ecg_truth = std::move(truth);
        r.ecg_truth.condition = condition;
    }
    {
        auto g = rng_for(StreamKey::Eog);
        auto [sig, truth] = gen_eog(cfg, p, g);
        r.signals.eog = std::move(sig);
        r.eog_truth = std::move(truth);
        r.eog_truth.condition = condition;
    }
    auto g_hr = rng_for(StreamKey::Hr);
    r.signals.hr = gen_hr(cfg, p, g_hr);
    auto g_acc = rng_for(StreamKey::Acc);
    r.signals.acc = gen_acc(cfg, p, g_acc);
    if (!cfg.subjects_without_gaze.count(subject)) {
        auto g_gaze = rng_for(StreamKey::Gaze);
        r.signals.gaze = gen_gaze(cfg, p, g_gaze);
    }
    auto g_eeg = rng_for(StreamKey::Eeg);
    r.signals.eeg = gen_eeg(cfg, p, g_eeg);
    auto g_pose = rng_for(StreamKey::Pose);
    r.signals.pose = gen_pose(cfg, p, g_pose);
    return r;
}

inline std::string subject_id(int subject) {
    return (subject < 10 ? "s0" : "s") + std::to_string(subject);
}

inline std::string trial_id(int subject, int cycle, Condition c) {
    return subject_id(subject) + "_c" + std::to_string(cycle) + "_" + std::string(to_string(c));
}

inline std::string calm_id(int subject) { return subject_id(subject) + "_calm"; }

/// Conditions in the order a subject performs them within each cycle:
/// subjects rotate the starting condition for counterbalancing.
inline std::array<Condition, kConditionCount> condition_order(int subject) {
    const auto start = static_cast<std::size_t>((subject - 1) % 3);
    return {kConditions[start], kConditions[(start + 1) % 3], kConditions[(start + 2) % 3]};
}

/// Manifest skeleton (no signal paths) for subjects x 3 cycles x 3 conditions.
inline DatasetManifest dataset_layout(const SynthConfig& cfg) {
    DatasetManifest m;
    for (int s = 1; s <= cfg.subjects; ++s) {
        m.subjects.push_back(subject_id(s));
        m.calm.push_back({calm_id(s), subject_id(s), {}});
        for (int c = 1; c <= 3; ++c)
            for (Condition cond : condition_order(s))
                m.trials.push_back({trial_id(s, c, cond), subject_id(s), c, cond, {}, calm_id(s)});
    }
    sort_trials(m.trials);
    return m;
}

inline void write_truth(const std::filesystem::path& path, const std::vector<double>& times,
                        std::string_view kind) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t,kind\n";
    for (double t : times) out << hepot::detail::format_double(t) << ',' << kind << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

inline SensorPaths write_recording(const Recording& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    SensorPaths paths;
    const auto& s = r.signals;
    if (s.ecg) {
        write_signal(paths[Sensor::Ecg] = dir / "ecg.csv", *s.ecg);
        write_truth(dir / "ecg.truth.csv", r.ecg_truth.r_peak_times, "RPEAK");
    }
    if (s.eog) {
        write_signal(paths[Sensor::Eog] = dir / "eog.csv", *s.eog);
        write_truth(dir / "eog.truth.csv", r.eog_truth.blink_times, "BLINK");
    }
    if (s.hr) write_signal(paths[Sensor::Hr] = dir / "hr.csv", *s.hr);
    if (s.acc) write_signal(paths[Sensor::Acc] = dir / "acc.csv", *s.acc);
    if (s.gaze) write_gaze(paths[Sensor::Gaze] = dir / "gaze.csv", *s.gaze);
    if (s.eeg) write_signal(paths[Sensor::Eeg] = dir / "eeg.csv", *s.eeg);
    if (s.pose) write_pose(paths[Sensor::Pose] = dir / "pose.csv", *s.pose);
    return paths;
}

/// Writes every recording plus `manifest.json` under `out`; returns the
/// manifest with resolved paths.
inline DatasetManifest gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out,
                                   std::size_t workers = 1) {
    cfg.validate();
    DatasetManifest m = dataset_layout(cfg);
    m.root = out;
    struct Job {
        int subject, cycle;
        std::optional<Condition> condition;
        SensorPaths* paths;
        std::filesystem::path dir;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < m.calm.size(); ++i) {
        const int s = static_cast<int>(i) + 1;
        jobs.push_back({s, 0, std::nullopt, &m.calm[i].signals, out / subject_id(s) / "calm"});
    }
    for (auto& t : m.trials) {
        const int s = std::stoi(t.subject.substr(1));
        jobs.push_back({s, t.cycle, t.condition, &t.signals, out / t.subject / t.id});
    }
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const auto& j = jobs[i];
        *j.paths = write_recording(generate_recording(cfg, j.subject, j.cycle, j.condition), j.dir);
    });
    std::ofstream mf(out / "manifest.json");
    if (!mf) throw IoError("cannot write manifest in " + out.string());
    mf << manifest_to_json(m).dump(2) << "\n";
    return m;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void read_effect(const nlohmann::json& j, Effect& e) {
    e.hr = j.value("hr", e.hr);
    e.hrv_depth = j.value("hrv_depth", e.hrv_depth);
    e.artifacts = j.value("artifacts", e.artifacts);
    e.blink = j.value("blink", e.blink);
    e.movement = j.value("movement", e.movement);
    e.saccade = j.value("saccade", e.saccade);
    e.attention = j.value("attention", e.attention);
}

inline nlohmann::json effect_json(const Effect& e) {
    return {{"hr", e.hr},         {"hrv_depth", e.hrv_depth}, {"artifacts", e.artifacts},
            {"blink", e.blink},   {"movement", e.movement},   {"saccade", e.saccade},
            {"attention", e.attention}};
}

}  // namespace detail

inline SynthConfig config_from_json(const nlohmann::json& j) {
    SynthConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.subjects = j.value("subjects", c.subjects);
        c.trial_duration = j.value("trial_duration", c.trial_duration);
        c.calm_duration = j.value("calm_duration", c.calm_duration);
        if (j.contains("rates")) {
            const auto& r = j.at("rates");
            c.rates.ecg = r.value("ecg", c.rates.ecg);
            c.rates.eog = r.value("eog", c.rates.eog);
            c.rates.hr = r.value("hr", c.rates.hr);
            c.rates.acc = r.value("acc", c.rates.acc);
            c.rates.gaze = r.value("gaze", c.rates.gaze);
            c.rates.eeg = r.value("eeg", c.rates.eeg);
            c.rates.pose = r.value("pose", c.rates.pose);
        }
        c.base_hr = j.value("base_hr", c.base_hr);
        if (j.contains("hrv_mod")) {
            c.hrv_freq = j.at("hrv_mod").value("frequency", c.hrv_freq);
            c.hrv_depth = j.at("hrv_mod").value("depth", c.hrv_depth);
        }
        if (j.contains("snr_db"))
            c.snr_db = j.at("snr_db").is_null() ? std::nullopt : std::optional(j.at("snr_db").get<double>());
        c.artifact_rate = j.value("artifact_rate", c.artifact_rate);
        c.artifact_rms = j.value("artifact_rms", c.artifact_rms);
        c.qrs_amplitude = j.value("qrs_amplitude", c.qrs_amplitude);
        c.qrs_width = j.value("qrs_width", c.qrs_width);
        c.blink_rate = j.value("blink_rate", c.blink_rate);
        c.blink_amplitude = j.value("blink_amplitude", c.blink_amplitude);
        c.blink_refractory = j.value("blink_refractory", c.blink_refractory);
        c.eog_drift = j.value("eog_drift", c.eog_drift);
        c.eog_noise = j.value("eog_noise", c.eog_noise);
        c.movement = j.value("movement", c.movement);
        c.pose_scale = j.value("pose_scale", c.pose_scale);
        c.acc_noise = j.value("acc_noise", c.acc_noise);
        c.hr_noise = j.value("hr_noise", c.hr_noise);
        c.saccade_ratio = j.value("saccade_ratio", c.saccade_ratio);
        if (j.contains("condition_effects")) {
            const auto& ce = j.at("condition_effects");
            for (Condition cond : kConditions) {
                const std::string name(to_string(cond));
                if (ce.contains(name)) detail::read_effect(ce.at(name), c.condition_effects[static_cast<std::size_t>(cond)]);
            }
        }
        if (j.contains("calm_effect")) detail::read_effect(j.at("calm_effect"), c.calm_effect);
        if (j.contains("trial_jitter")) detail::read_effect(j.at("trial_jitter"), c.trial_jitter);
        if (j.contains("subject_offset_sd")) detail::read_effect(j.at("subject_offset_sd"), c.subject_offset_sd);
        if (j.contains("subject_task_offset_sd"))
            detail::read_effect(j.at("subject_task_offset_sd"), c.subject_task_offset_sd);
        if (j.contains("subjects_without_gaze"))
            for (int s : j.at("subjects_without_gaze")) c.subjects_without_gaze.insert(s);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid synth config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const SynthConfig& c) {
    nlohmann::json ce;
    for (Condition cond : kConditions)
        ce[std::string(to_string(cond))] = detail::effect_json(c.condition_effects[static_cast<std::size_t>(cond)]);
    return {{"seed", c.seed},
            {"subjects", c.subjects},
            {"trial_duration", c.trial_duration},
            {"calm_duration", c.calm_duration},
            {"rates",
             {{"ecg", c.rates.ecg}, {"eog", c.rates.eog}, {"hr", c.rates.hr}, {"acc", c.rates.acc},
              {"gaze", c.rates.gaze}, {"eeg", c.rates.eeg}, {"pose", c.rates.pose}}},
            {"base_hr", c.base_hr},
            {"hrv_mod", {{"frequency", c.hrv_freq}, {"depth", c.hrv_depth}}},
            {"snr_db", c.snr_db ? nlohmann::json(*c.snr_db) : nlohmann::json(nullptr)},
            {"artifact_rate", c.artifact_rate},
            {"artifact_rms", c.artifact_rms},
            {"qrs_amplitude", c.qrs_amplitude},
            {"qrs_width", c.qrs_width},
            {"blink_rate", c.blink_rate},
            {"blink_amplitude", c.blink_amplitude},
            {"blink_refractory", c.blink_refractory},
            {"eog_drift", c.eog_drift},
            {"eog_noise", c.eog_noise},
            {"movement", c.movement},
            {"pose_scale", c.pose_scale},
            {"acc_noise", c.acc_noise},
            {"hr_noise", c.hr_noise},
            {"saccade_ratio", c.saccade_ratio},
            {"condition_effects", ce},
            {"calm_effect", detail::effect_json(c.calm_effect)},
            {"trial_jitter", detail::effect_json(c.trial_jitter)},
            {"subject_offset_sd", detail::effect_json(c.subject_offset_sd)},
            {"subject_task_offset_sd", detail::effect_json(c.subject_task_offset_sd)},
            {"subjects_without_gaze", c.subjects_without_gaze}};
}

}  // namespace hepot::synth
