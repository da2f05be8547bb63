#pragma once

// Probabilistic sequential peak detection.
//
// Given the peaks found so far (times t1..tn, intervals y1..y(n-1)), the next
// interval is chosen among local maxima of the amplitude-normalized signal
// lying in (tn + y_min, tn + y_max), maximizing
//
//     likelihood(x at candidate) * prior(candidate interval)
//     likelihood(a) = a^alpha
//     prior(y)      = N(y; y_last, sigma1^2) + beta * N(y; mean_interval, sigma2^2)
//                     + gamma * periodicity(y)
//
// where periodicity(y) is the normalized periodogram of the recent history
// evaluated at frequency 1/y. Normalizing constants of both factors are
// dropped: the argmax does not depend on them.
//
// Blink detection uses the same machinery with a uniform prior.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hepot/errors.hpp"
#include "hepot/rri.hpp"
#include "hepot/signal.hpp"
#include "hepot/spectral.hpp"

namespace hepot::peaks {

struct DetectorConfig {
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double sigma1 = 0.05;  // s
    double sigma2 = 0.1;   // s
    double y_min = 0.3;    // s
    double y_max = 1.5;    // s
    double fft_window = 30.0;  // s, trailing history used by the periodicity term
    double amp_window = 2.0;   // s, centered min-max normalization window
    double amp_floor = 1e-6;

    // Candidate gates. Zero disables.
    double amp_gate = 0.0;         // minimum normalized amplitude
    double detrend_window = 0.0;   // s, moving-median baseline removal
    double noise_gate = 0.0;       // detrended amplitude threshold in robust noise sigmas

    void validate() const {
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (!(beta >= 0.0) || !(gamma >= 0.0)) throw ConfigError("beta and gamma must be >= 0");
        if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw ConfigError("sigma1 and sigma2 must be > 0");
        if (!(y_min > 0.0) || !(y_min < y_max)) throw ConfigError("need 0 < y_min < y_max");
        if (!(fft_window >= 4.0 * y_max)) throw ConfigError("fft_window must be >= 4 * y_max");
        if (!(amp_window > 0.0)) throw ConfigError("amp_window must be > 0");
        if (!(amp_floor > 0.0) || !(amp_floor < 1.0)) throw ConfigError("amp_floor must be in (0, 1)");
        if (amp_gate < 0.0 || amp_gate > 1.0) throw ConfigError("amp_gate must be in [0, 1]");
        if (detrend_window < 0.0 || noise_gate < 0.0)
            throw ConfigError("detrend_window and noise_gate must be >= 0");
    }

    /// The noise gate zeroes everything below 3 robust sigmas so that white
    /// noise stops producing candidates after an artifact burst.
    static DetectorConfig ecg_defaults() {
        DetectorConfig c;
        c.noise_gate = 3.0;
        return c;
    }

    static DetectorConfig blink_defaults() {
        DetectorConfig c;
        c.y_min = 1.0;
        c.y_max = 30.0;
        c.fft_window = 120.0;
        c.amp_window = 10.0;
        c.amp_gate = 0.3;
        c.detrend_window = 1.0;
        c.noise_gate = 6.0;
        return c;
    }
};

/// Peaks detected so far. Intervals never bridge a dropout, so after a
/// re-seed `peak_times` can hold one more entry than a contiguous run implies.
class PeakState {
public:
    void add_seed(double t) { peak_times_.push_back(t); }
    void add_next(double t) {
        const double y = t - peak_times_.back();
        peak_times_.push_back(t);
        intervals_.push_back(y);
        sum_ += y;
    }

    std::size_t interval_count() const noexcept { return intervals_.size(); }
    bool has_interval() const noexcept { return !intervals_.empty(); }
    double last_peak() const {
        if (peak_times_.empty()) throw StateError("no peak detected yet");
        return peak_times_.back();
    }
    double last_interval() const {
        if (intervals_.empty()) throw StateError("no interval detected yet");
        return intervals_.back();
    }
    double mean_interval() const {
        if (intervals_.empty()) throw StateError("no interval detected yet");
        return sum_ / static_cast<double>(intervals_.size());
    }
    const std::vector<double>& peak_times() const noexcept { return peak_times_; }
    const std::vector<double>& intervals() const noexcept { return intervals_; }

    static PeakState from(std::vector<double> peak_times) {
        PeakState s;
        for (std::size_t i = 0; i < peak_times.size(); ++i) {
            if (i == 0) s.add_seed(peak_times[0]);
            else s.add_next(peak_times[i]);
        }
        return s;
    }

private:
    std::vector<double> peak_times_;
    std::vector<double> intervals_;
    double sum_ = 0.0;
};

struct Candidate {
    double interval;   // candidate y
    double time;       // t_n + y
    std::size_t index;  // sample index of the local maximum
    double amplitude;  // normalized amplitude at the maximum
};

using CandidateSet = std::vector<Candidate>;

// ---------------------------------------------------------------------------
// Signal preparation

namespace detail {

template <class Better>
std::vector<double> sliding_extreme(std::span<const double> x, std::size_t half, Better better) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    std::deque<std::size_t> dq;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t hi = std::min(n - 1, i + half);
        for (; next <= hi; ++next) {
            while (!dq.empty() && !better(x[dq.back()], x[next])) dq.pop_back();
            dq.push_back(next);
        }
        while (dq.front() + half < i) dq.pop_front();
        out[i] = x[dq.front()];
    }
    return out;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

inline std::vector<double> moving_median(std::span<const double> x, std::size_t half) {
    const std::size_t n = x.size();
    std::vector<double> out(n), buf;
    buf.reserve(2 * half + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
        const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
        std::nth_element(buf.begin(), mid, buf.end());
        out[i] = *mid;
    }
    return out;
}

inline double gaussian_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace detail

/// Sliding-window min-max rescaling into [amp_floor, 1]. Flat windows map to
/// amp_floor.
inline SampledSignal normalize_amplitude(const SampledSignal& signal, const DetectorConfig& cfg) {
    auto x = signal.values();
    const std::size_t n = x.size();
    auto width = static_cast<std::size_t>(std::llround(cfg.amp_window * signal.sample_rate()));
    width = std::clamp<std::size_t>(width, 1, std::max<std::size_t>(n, 1));
    const std::size_t half = width / 2;
    std::vector<double> out(n, cfg.amp_floor);
    if (n == 0) return SampledSignal::scalar(signal.start_time(), signal.sample_rate(), out);
    const auto mx = detail::sliding_extreme(x, half, [](double a, double b) { return a > b; });
    const auto mn = detail::sliding_extreme(x, half, [](double a, double b) { return a < b; });
    for (std::size_t i = 0; i < n; ++i) {
        const double range = mx[i] - mn[i];
        if (range > 0.0) out[i] = cfg.amp_floor + (1.0 - cfg.amp_floor) * (x[i] - mn[i]) / range;
    }
    return SampledSignal::scalar(signal.start_time(), signal.sample_rate(), std::move(out));
}

/// Baseline removal and noise gating applied ahead of normalization when the
/// config asks for it (blink detection). ECG defaults pass the signal through.
inline SampledSignal gate_signal(const SampledSignal& signal, const DetectorConfig& cfg) {
    if (cfg.detrend_window <= 0.0 && cfg.noise_gate <= 0.0) return signal;
    auto x = signal.values();
    std::vector<double> d(x.begin(), x.end());
    if (cfg.detrend_window > 0.0) {
        const auto half = static_cast<std::size_t>(
            std::llround(0.5 * cfg.detrend_window * signal.sample_rate()));
        const auto base = detail::moving_median(x, half);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= base[i];
    }
    if (cfg.noise_gate > 0.0) {
        const double med = detail::median_of(d);
        std::vector<double> dev(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) dev[i] = std::abs(d[i] - med);
        const double sigma = 1.4826 * detail::median_of(dev);
        const double thr = med + cfg.noise_gate * sigma;
        for (double& v : d) v = std::max(v - thr, 0.0);
    }
    return SampledSignal::scalar(signal.start_time(), signal.sample_rate(), std::move(d));
}

inline SampledSignal prepare(const SampledSignal& signal, const DetectorConfig& cfg) {
    return normalize_amplitude(gate_signal(signal, cfg), cfg);
}

// ---------------------------------------------------------------------------
// Local maxima

/// Indices i in [first, last) that are strict local maxima of x. A plateau
/// counts once, at its leftmost sample, when it rises on the left and falls
/// on the right. Endpoints of x never qualify.
inline std::vector<std::size_t> local_maxima_indices(std::span<const double> x, std::size_t first,
                                                     std::size_t last) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    last = std::min(last, n);
    for (std::size_t i = std::max<std::size_t>(first, 1); i < last && i + 1 < n; ++i) {
        if (!(x[i] > x[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && x[j + 1] == x[i]) ++j;
        if (j + 1 < n && x[j + 1] < x[i]) out.push_back(i);
        i = j;
    }
    return out;
}

inline std::vector<double> local_maxima(const SampledSignal& signal, double t_start, double t_end) {
    const std::size_t first = signal.index_at_or_after(t_start);
    std::size_t last = signal.index_at_or_after(t_end);
    if (last < signal.size() && signal.time_at(last) <= t_end) ++last;
    if (first >= last) throw EmptyWindowError("window contains no samples");
    std::vector<double> times;
    for (auto i : local_maxima_indices(signal.values(), first, last)) times.push_back(signal.time_at(i));
    return times;
}

// ---------------------------------------------------------------------------
// Model terms

inline double likelihood_term(double normalized_amplitude, const DetectorConfig& cfg) {
    if (!(normalized_amplitude > 0.0)) throw DomainError("amplitude must be > 0");
    return std::pow(normalized_amplitude, cfg.alpha);
}

inline double prior_term(double candidate, const PeakState& state, double periodicity,
                         const DetectorConfig& cfg) {
    if (!state.has_interval()) throw StateError("prior needs at least one detected interval");
    return detail::gaussian_pdf(candidate, state.last_interval(), cfg.sigma1) +
           cfg.beta * detail::gaussian_pdf(candidate, state.mean_interval(), cfg.sigma2) +
           cfg.gamma * periodicity;
}

/// Normalized periodogram over the interval-relevant band [1/y_max, 1/y_min].
/// Weights sum to one over the band's bins.
class Periodicity {
public:
    Periodicity(double df, std::size_t lo, std::size_t hi, std::vector<double> weights)
        : df_(df), lo_(lo), hi_(hi), weights_(std::move(weights)) {}

    static Periodicity uniform(double df, std::size_t lo, std::size_t hi) {
        std::vector<double> w(hi + 1, 0.0);
        const double u = 1.0 / static_cast<double>(hi - lo + 1);
        for (std::size_t k = lo; k <= hi; ++k) w[k] = u;
        return {df, lo, hi, std::move(w)};
    }

    /// Value at frequency 1/interval, linearly interpolated between bins and
    /// clamped to the band edges.
    double operator()(double interval) const {
        const double pos = (1.0 / interval) / df_;
        if (pos <= static_cast<double>(lo_)) return weights_[lo_];
        if (pos >= static_cast<double>(hi_)) return weights_[hi_];
        const auto k = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(k);
        return weights_[k] * (1.0 - frac) + weights_[k + 1] * frac;
    }

    std::size_t bin_count() const noexcept { return hi_ - lo_ + 1; }
    double df() const noexcept { return df_; }
    std::span<const double> band_weights() const {
        return std::span<const double>(weights_).subspan(lo_, hi_ - lo_ + 1);
    }
    double bin_frequency(std::size_t band_index) const {
        return static_cast<double>(lo_ + band_index) * df_;
    }

private:
    double df_;
    std::size_t lo_, hi_;
    std::vector<double> weights_;
};

/// Periodicity model from the trailing `fft_window` seconds of `history`
/// (Hann-tapered periodogram). Shorter histories get the uniform fallback.
inline Periodicity periodicity_model(const SampledSignal& history, const DetectorConfig& cfg) {
    const double fs = history.sample_rate();
    const auto n = static_cast<std::size_t>(std::llround(cfg.fft_window * fs));
    if (n < 2) throw ConfigError("fft_window too short for the sample rate");
    const double df = fs / static_cast<double>(n);
    const auto lo = static_cast<std::size_t>(std::ceil((1.0 / cfg.y_max) / df - 1e-9));
    auto hi = static_cast<std::size_t>(std::floor((1.0 / cfg.y_min) / df + 1e-9));
    hi = std::min(hi, n / 2);
    if (hi < lo) throw ConfigError("interval band has no frequency bins");
    if (history.size() < n) return Periodicity::uniform(df, lo, hi);

    auto x = history.values().subspan(history.size() - n, n);
    auto pg = spectral::periodogram(x, fs, {.hann = true, .remove_mean = true});
    double total = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) total += pg.power[k];
    if (!(total > 0.0)) return Periodicity::uniform(df, lo, hi);
    std::vector<double> w(hi + 1, 0.0);
    for (std::size_t k = lo; k <= hi; ++k) w[k] = pg.power[k] / total;
    return {df, lo, hi, std::move(w)};
}

/// g(y) evaluated on the history that ends at the last detected peak.
inline double periodicity_term(const SampledSignal& history, double candidate,
                               const DetectorConfig& cfg) {
    return periodicity_model(history, cfg)(candidate);
}

// ---------------------------------------------------------------------------
// Candidates and selection

/// Local maxima of the normalized signal in the open window
/// (t_n + y_min, t_n + y_max), truncated at the signal end, that pass the
/// amplitude gate.
inline CandidateSet candidate_set(const SampledSignal& normalized, const PeakState& state,
                                  const DetectorConfig& cfg) {
    const double tn = state.last_peak();
    const double lo_t = tn + cfg.y_min, hi_t = tn + cfg.y_max;
    if (lo_t >= normalized.end_time())
        throw NoCandidateError("candidate window starts beyond the signal end");
    std::size_t first = normalized.index_at_or_after(lo_t);
    if (first < normalized.size() && normalized.time_at(first) <= lo_t) ++first;
    const std::size_t last = normalized.index_at_or_after(hi_t);
    auto x = normalized.values();
    CandidateSet out;
    for (auto i : local_maxima_indices(x, first, last)) {
        const double t = normalized.time_at(i);
        const double y = t - tn;
        if (!(y > cfg.y_min && y < cfg.y_max)) continue;
        if (x[i] < cfg.amp_gate) continue;
        out.push_back({y, t, i, x[i]});
    }
    if (out.empty()) throw NoCandidateError("no local maximum in the candidate window");
    return out;
}

/// Index of the highest score; exact ties go to the earlier (smaller
/// interval) candidate.
inline std::size_t argmax_candidate(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

inline std::vector<double> candidate_scores(const CandidateSet& cands, const PeakState& state,
                                            const Periodicity& g, const DetectorConfig& cfg) {
    std::vector<double> s;
    s.reserve(cands.size());
    for (const auto& c : cands)
        s.push_back(likelihood_term(c.amplitude, cfg) * prior_term(c.interval, state, g(c.interval), cfg));
    return s;
}

struct Selection {
    double interval;
    double time;
};

inline Selection select_next(const SampledSignal& normalized, const PeakState& state,
                             const Periodicity& g, const DetectorConfig& cfg) {
    auto cands = candidate_set(normalized, state, cfg);
    if (cands.size() == 1) return {cands[0].interval, cands[0].time};
    auto scores = candidate_scores(cands, state, g, cfg);
    const auto& c = cands[argmax_candidate(scores)];
    return {c.interval, c.time};
}

/// Full-model selection with the periodicity term computed from the
/// normalized history up to the last peak.
inline Selection select_next(const SampledSignal& normalized, const PeakState& state,
                             const DetectorConfig& cfg) {
    const std::size_t end = normalized.index_at_or_after(state.last_peak()) + 1;
    const auto n = static_cast<std::size_t>(std::llround(cfg.fft_window * normalized.sample_rate()));
    const std::size_t begin = end > n ? end - n : 0;
    return select_next(normalized, state, periodicity_model(normalized.slice(begin, end), cfg), cfg);
}

/// Likelihood-only selection, used before any interval is known.
inline Selection select_by_likelihood(const SampledSignal& normalized, const PeakState& state,
                                      const DetectorConfig& cfg) {
    auto cands = candidate_set(normalized, state, cfg);
    std::vector<double> s;
    for (const auto& c : cands) s.push_back(likelihood_term(c.amplitude, cfg));
    const auto& c = cands[argmax_candidate(s)];
    return {c.interval, c.time};
}

namespace detail {

/// Highest admissible local maximum in [from, from + span); earliest on ties.
inline std::optional<double> seed_peak(const SampledSignal& normalized, double from, double span,
                                       const DetectorConfig& cfg) {
    auto x = normalized.values();
    const std::size_t first = normalized.index_at_or_after(from);
    const std::size_t last = normalized.index_at_or_after(from + span);
    std::optional<std::size_t> best;
    for (auto i : local_maxima_indices(x, first, last)) {
        if (x[i] < cfg.amp_gate) continue;
        if (!best || x[i] > x[*best]) best = i;
    }
    if (!best) return std::nullopt;
    return normalized.time_at(*best);
}

}  // namespace detail

/// Sequential R-peak / RR-interval estimation over a whole ECG trace.
///
/// The first peak is the highest normalized local maximum in the first y_max
/// seconds; the first interval is chosen by likelihood alone, after which
/// the full model applies. When a candidate window is empty the detector
/// re-seeds from the end of that window and records the gap as a dropout.
inline RriSequence detect_rri_sequence(const SampledSignal& ecg, const DetectorConfig& cfg) {
    cfg.validate();
    if (!(ecg.duration() > 2.0 * cfg.y_max))
        throw SignalTooShortError("signal must be longer than 2 * y_max");
    const auto norm = prepare(ecg, cfg);
    const double end = norm.end_time();

    RriSequence out;
    PeakState state;
    double from = norm.start_time();
    std::optional<double> gap_start;

    while (from < end) {
        auto seed = detail::seed_peak(norm, from, cfg.y_max, cfg);
        if (!seed) {
            from += cfg.y_max;
            continue;
        }
        if (gap_start) out.dropouts.emplace_back(*gap_start, *seed);
        state.add_seed(*seed);
        out.peak_times.push_back(*seed);

        while (true) {
            const double tn = state.last_peak();
            if (tn + cfg.y_min >= end) return out;
            try {
                const Selection next = state.has_interval() ? select_next(norm, state, cfg)
                                                            : select_by_likelihood(norm, state, cfg);
                state.add_next(next.time);
                out.peak_times.push_back(next.time);
                out.add_interval(next.time, state.last_interval());
            } catch (const NoCandidateError&) {
                if (tn + cfg.y_max >= end) return out;
                gap_start = tn;
                from = tn + cfg.y_max;
                break;
            }
        }
    }
    return out;
}

/// Blink detection: uniform prior over (y_min, y_max), so each step keeps
/// the admissible local maximum with the highest amplitude^alpha. The search
/// window closes y_min after its first admissible maximum, so a later blink
/// cannot outbid an earlier one. An empty window moves the search forward by
/// its length.
inline EventSeries detect_blinks(const SampledSignal& eog, const DetectorConfig& cfg) {
    cfg.validate();
    if (!(eog.duration() > 2.0 * cfg.y_max))
        throw SignalTooShortError("signal must be longer than 2 * y_max");
    const auto norm = prepare(eog, cfg);
    auto x = norm.values();
    const double end = norm.end_time();

    std::vector<double> times;
    double prev = norm.start_time() - cfg.y_min;  // virtual peak before the trace
    bool virtual_prev = true;
    while (prev + cfg.y_min < end) {
        std::size_t first = norm.index_at_or_after(prev + cfg.y_min);
        if (!virtual_prev && first < norm.size() && norm.time_at(first) <= prev + cfg.y_min) ++first;
        const std::size_t last = norm.index_at_or_after(prev + cfg.y_max);
        std::optional<std::size_t> best;
        double cluster_end = prev + cfg.y_max;
        for (auto i : local_maxima_indices(x, first, last)) {
            const double t = norm.time_at(i);
            if (t >= cluster_end) break;
            if (x[i] < cfg.amp_gate) continue;
            if (!best) {
                best = i;
                cluster_end = std::min(cluster_end, t + cfg.y_min);
            } else if (likelihood_term(x[i], cfg) > likelihood_term(x[*best], cfg)) {
                best = i;
            }
        }
        if (!best) {
            prev += cfg.y_max - cfg.y_min;
            virtual_prev = true;
            continue;
        }
        times.push_back(norm.time_at(*best));
        prev = times.back();
        virtual_prev = false;
    }
    return {times, std::vector<EyeEvent>(times.size(), EyeEvent::Blink)};
}

/// Naive fixed-threshold R-peak detector used as a comparison baseline: one
/// peak per supra-threshold run, threshold at median + fraction * (99.5th
/// percentile - median), with a refractory period keeping the larger peak.
inline std::vector<double> detect_peaks_threshold(const SampledSignal& ecg, double fraction = 0.5,
                                                  double refractory = 0.3) {
    auto x = ecg.values();
    if (x.empty()) return {};
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double p995 = sorted[static_cast<std::size_t>(0.995 * static_cast<double>(sorted.size() - 1))];
    const double thr = med + fraction * (p995 - med);

    std::vector<std::size_t> peaks;
    std::size_t i = 0;
    while (i < x.size()) {
        if (x[i] <= thr) {
            ++i;
            continue;
        }
        std::size_t best = i;
        for (; i < x.size() && x[i] > thr; ++i)
            if (x[i] > x[best]) best = i;
        if (!peaks.empty() && ecg.time_at(best) - ecg.time_at(peaks.back()) < refractory) {
            if (x[best] > x[peaks.back()]) peaks.back() = best;
        } else {
            peaks.push_back(best);
        }
    }
    std::vector<double> times;
    for (auto p : peaks) times.push_back(ecg.time_at(p));
    return times;
}

/// One-to-one matching of detections to reference events within `tolerance`
/// seconds (both lists sorted).
struct MatchStats {
    std::size_t true_positives = 0;
    std::size_t detected = 0;
    std::size_t reference = 0;
    double precision() const { return detected ? double(true_positives) / double(detected) : 0.0; }
    double recall() const { return reference ? double(true_positives) / double(reference) : 0.0; }
    double f1() const {
        const double d = double(detected + reference);
        return d > 0 ? 2.0 * double(true_positives) / d : 1.0;
    }
};

inline MatchStats match_events(std::span<const double> detected, std::span<const double> reference,
                               double tolerance) {
    MatchStats m;
    m.detected = detected.size();
    m.reference = reference.size();
    std::size_t i = 0, j = 0;
    while (i < detected.size() && j < reference.size()) {
        const double d = detected[i] - reference[j];
        if (std::abs(d) <= tolerance) {
            ++m.true_positives;
            ++i;
            ++j;
        } else if (d < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return m;
}

}  // namespace hepot::peaks
