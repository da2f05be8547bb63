#pragma once

// Per-trial biometric indices: HRV from R-peak or heart-rate derived
// intervals, blink rate, gaze statistics and EEG aggregates.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hepot/errors.hpp"
#include "hepot/rri.hpp"
#include "hepot/signal.hpp"
#include "hepot/spectral.hpp"

namespace hepot::bio {

/// Heart rate (bpm) to intervals: RRI = 60 / bpm, one per sample.
inline RriSequence rri_from_hr(const SampledSignal& hr) {
    RriSequence out;
    auto bpm = hr.values();
    for (std::size_t i = 0; i < bpm.size(); ++i) {
        if (!(bpm[i] > 0.0)) throw DomainError("heart rate must be > 0 bpm");
        const double t = hr.time_at(i);
        out.peak_times.push_back(t);
        out.add_interval(t, 60.0 / bpm[i]);
    }
    return out;
}

struct ResampledRri {
    SampledSignal signal;
    std::vector<bool> bridged;  // grid sample falls inside a dropout span
};

/// Linear interpolation of interval values (placed at their closing peak
/// times) onto a uniform grid starting at the first interval time.
inline ResampledRri resample_rri(const RriSequence& rri, double grid_rate = 4.0) {
    const auto& t = rri.interval_times;
    const auto& y = rri.intervals;
    if (y.size() < 2) throw InsufficientDataError("resampling needs at least 2 intervals");
    if (!(grid_rate > 0.0)) throw DomainError("grid rate must be > 0");
    const double t0 = t.front();
    const auto n = static_cast<std::size_t>(std::floor((t.back() - t0) * grid_rate + 1e-9)) + 1;
    std::vector<double> v(n);
    std::vector<bool> bridged(n, false);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t0 + static_cast<double>(i) / grid_rate;
        while (k + 2 < t.size() && t[k + 1] < ti) ++k;
        const double span = t[k + 1] - t[k];
        const double f = span > 0.0 ? std::clamp((ti - t[k]) / span, 0.0, 1.0) : 0.0;
        v[i] = y[k] + f * (y[k + 1] - y[k]);
        for (const auto& [a, b] : rri.dropouts)
            if (ti > a && ti < b) bridged[i] = true;
    }
    return {SampledSignal::scalar(t0, grid_rate, std::move(v), "rri"), std::move(bridged)};
}

struct BandConfig {
    double lf_lo = 0.04, lf_hi = 0.15;
    double hf_lo = 0.15, hf_hi = 0.40;
    double grid_rate = 4.0;   // Hz
    double min_span = 60.0;   // s of intervals needed for spectral terms

    /// The same edges read as whole hertz (4-15 Hz and >= 15 Hz). They lie
    /// above the Nyquist rate of the default grid, so both powers come out 0.
    static BandConfig literal() {
        BandConfig b;
        b.lf_lo = 4.0;
        b.lf_hi = 15.0;
        b.hf_lo = 15.0;
        b.hf_hi = std::numeric_limits<double>::infinity();
        return b;
    }
};

struct HrvFeatures {
    std::optional<double> mean_rri;
    std::optional<double> lf_power;
    std::optional<double> hf_power;
    std::optional<double> lf_hf_ratio;
};

inline HrvFeatures hrv_features(const RriSequence& rri, const BandConfig& bands = {}) {
    HrvFeatures f;
    if (rri.intervals.empty()) return f;
    double s = 0.0;
    for (double y : rri.intervals) s += y;
    f.mean_rri = s / static_cast<double>(rri.intervals.size());

    if (rri.intervals.size() < 2) return f;
    if (rri.interval_times.back() - rri.interval_times.front() < bands.min_span) return f;
    const auto grid = resample_rri(rri, bands.grid_rate);
    if (grid.signal.size() < 2) return f;
    const auto pg = spectral::periodogram(grid.signal.values(), bands.grid_rate);
    f.lf_power = pg.band_power(bands.lf_lo, bands.lf_hi);
    f.hf_power = pg.band_power(bands.hf_lo, bands.hf_hi);
    // Rounding residue from a constant series is not a spectrum; a ratio of
    // two such residues is meaningless.
    const double negligible = 1e-12 * *f.mean_rri * *f.mean_rri;
    if (*f.hf_power > negligible) f.lf_hf_ratio = *f.lf_power / *f.hf_power;
    return f;
}

/// Events per minute over the trial span.
inline double blink_rate(const EventSeries& blinks, double trial_span) {
    if (!(trial_span > 0.0)) throw DomainError("trial span must be > 0");
    return static_cast<double>(blinks.size()) * 60.0 / trial_span;
}

struct GazeFeatures {
    double std_gx = 0.0, std_gy = 0.0;
    double mean_step = 0.0, std_step = 0.0;
    double large_step_rate = 0.0;  // per minute
    double visual_intake_ratio = 0.0;
    double saccade_ratio = 0.0;
};

namespace detail {

struct MeanStd {
    double mean, std;
};

/// Population mean and standard deviation.
inline MeanStd mean_std(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / static_cast<double>(x.size()))};
}

}  // namespace detail

inline std::vector<double> gaze_steps(const GazeRecording& gaze) {
    auto gx = gaze.xy.channel(0), gy = gaze.xy.channel(1);
    std::vector<double> d;
    for (std::size_t i = 1; i < gx.size(); ++i) d.push_back(std::hypot(gx[i] - gx[i - 1], gy[i] - gy[i - 1]));
    return d;
}

/// Median inter-frame gaze step, the basis of the default large-step threshold.
inline double median_step(const GazeRecording& gaze) {
    auto d = gaze_steps(gaze);
    if (d.empty()) throw InsufficientDataError("need at least 2 gaze samples");
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size() / 2;
    return d.size() % 2 ? d[m] : 0.5 * (d[m - 1] + d[m]);
}

/// Event ratios are fractions of samples; blink labels are ignored.
inline GazeFeatures gaze_features(const GazeRecording& gaze, double large_step_threshold) {
    const std::size_t n = gaze.xy.size();
    if (n < 2) throw InsufficientDataError("gaze features need at least 2 samples");
    if (gaze.events.size() != n) throw ChannelMismatchError("gaze events and samples differ in count");
    GazeFeatures f;
    f.std_gx = detail::mean_std(gaze.xy.channel(0)).std;
    f.std_gy = detail::mean_std(gaze.xy.channel(1)).std;
    const auto steps = gaze_steps(gaze);
    const auto ms = detail::mean_std(steps);
    f.mean_step = ms.mean;
    f.std_step = ms.std;
    std::size_t large = 0;
    for (double d : steps)
        if (d > large_step_threshold) ++large;
    f.large_step_rate = static_cast<double>(large) * 60.0 / gaze.xy.duration();
    std::size_t vi = 0, sc = 0;
    for (auto e : gaze.events) {
        if (e == EyeEvent::VisualIntake) ++vi;
        if (e == EyeEvent::Saccade) ++sc;
    }
    f.visual_intake_ratio = static_cast<double>(vi) / static_cast<double>(n);
    f.saccade_ratio = static_cast<double>(sc) / static_cast<double>(n);
    return f;
}

inline constexpr std::size_t kEegStreams = 10;

struct EegFeatures {
    std::array<double, kEegStreams> mean{};
    std::array<double, kEegStreams> std{};
};

inline EegFeatures eeg_features(const SampledSignal& eeg) {
    if (eeg.channel_count() != kEegStreams)
        throw ChannelMismatchError("EEG signal must carry 10 streams");
    if (eeg.size() < 2) throw InsufficientDataError("EEG features need at least 2 samples");
    EegFeatures f;
    for (std::size_t k = 0; k < kEegStreams; ++k) {
        const auto ms = detail::mean_std(eeg.channel(k));
        f.mean[k] = ms.mean;
        f.std[k] = ms.std;
    }
    return f;
}

}  // namespace hepot::bio
