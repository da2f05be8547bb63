#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hepot/errors.hpp"

namespace hepot {

/// Uniformly sampled multi-channel signal. Immutable after construction;
/// channel `k` sample `i` lives at time `start_time() + i / sample_rate()`.
class SampledSignal {
public:
    SampledSignal() = default;

    SampledSignal(double start_time, double sample_rate, std::vector<std::string> channels,
                  std::vector<std::vector<double>> values)
        : start_time_(start_time),
          sample_rate_(sample_rate),
          channels_(std::move(channels)),
          values_(std::move(values)) {
        if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
            throw DomainError("sample rate must be positive");
        if (channels_.size() != values_.size())
            throw ChannelMismatchError("channel names and value columns differ in count");
        for (const auto& col : values_) {
            if (col.size() != values_.front().size())
                throw ChannelMismatchError("channels differ in length");
            for (double v : col)
                if (std::isnan(v)) throw DomainError("NaN sample in signal");
        }
    }

    /// Single-channel convenience constructor.
    static SampledSignal scalar(double start_time, double sample_rate, std::vector<double> values,
                                std::string name = "value") {
        return {start_time, sample_rate, {std::move(name)}, {std::move(values)}};
    }

    double start_time() const noexcept { return start_time_; }
    double sample_rate() const noexcept { return sample_rate_; }
    double period() const noexcept { return 1.0 / sample_rate_; }
    std::size_t size() const noexcept { return values_.empty() ? 0 : values_.front().size(); }
    bool empty() const noexcept { return size() == 0; }
    std::size_t channel_count() const noexcept { return channels_.size(); }
    const std::vector<std::string>& channels() const noexcept { return channels_; }

    /// Span of the signal in seconds (sample count over rate).
    double duration() const noexcept { return static_cast<double>(size()) / sample_rate_; }
    double end_time() const noexcept { return start_time_ + duration(); }
    double time_at(std::size_t i) const noexcept {
        return start_time_ + static_cast<double>(i) / sample_rate_;
    }

    std::span<const double> channel(std::size_t k) const { return values_.at(k); }
    std::span<const double> channel(std::string_view name) const {
        for (std::size_t k = 0; k < channels_.size(); ++k)
            if (channels_[k] == name) return values_[k];
        throw ChannelMismatchError("no channel named '" + std::string(name) + "'");
    }
    std::span<const double> values() const { return channel(std::size_t{0}); }
    const std::vector<std::vector<double>>& columns() const noexcept { return values_; }

    /// First sample index whose time is >= t (clamped to size()).
    std::size_t index_at_or_after(double t) const noexcept {
        if (t <= start_time_) return 0;
        auto i = static_cast<std::size_t>(std::ceil((t - start_time_) * sample_rate_ - 1e-9));
        return std::min(i, size());
    }

    /// Copy of samples [first, last) across all channels.
    SampledSignal slice(std::size_t first, std::size_t last) const {
        last = std::min(last, size());
        first = std::min(first, last);
        std::vector<std::vector<double>> cols;
        cols.reserve(values_.size());
        for (const auto& col : values_)
            cols.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(first),
                              col.begin() + static_cast<std::ptrdiff_t>(last));
        return {time_at(first), sample_rate_, channels_, std::move(cols)};
    }

private:
    double start_time_ = 0.0;
    double sample_rate_ = 1.0;
    std::vector<std::string> channels_;
    std::vector<std::vector<double>> values_;
};

enum class EyeEvent { VisualIntake, Saccade, Blink, Other };

inline std::string_view to_string(EyeEvent e) {
    switch (e) {
        case EyeEvent::VisualIntake: return "VISUAL_INTAKE";
        case EyeEvent::Saccade: return "SACCADE";
        case EyeEvent::Blink: return "BLINK";
        case EyeEvent::Other: return "OTHER";
    }
    return "OTHER";
}

inline std::optional<EyeEvent> parse_eye_event(std::string_view s) {
    if (s == "VISUAL_INTAKE") return EyeEvent::VisualIntake;
    if (s == "SACCADE") return EyeEvent::Saccade;
    if (s == "BLINK") return EyeEvent::Blink;
    if (s == "OTHER") return EyeEvent::Other;
    return std::nullopt;
}

/// Timestamped events; timestamps strictly increasing.
class EventSeries {
public:
    EventSeries() = default;
    EventSeries(std::vector<double> timestamps, std::vector<EyeEvent> labels)
        : timestamps_(std::move(timestamps)), labels_(std::move(labels)) {
        if (timestamps_.size() != labels_.size())
            throw DomainError("event timestamps and labels differ in count");
        for (std::size_t i = 1; i < timestamps_.size(); ++i)
            if (!(timestamps_[i] > timestamps_[i - 1]))
                throw DomainError("event timestamps must be strictly increasing");
    }

    const std::vector<double>& timestamps() const noexcept { return timestamps_; }
    const std::vector<EyeEvent>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return timestamps_.size(); }

private:
    std::vector<double> timestamps_;
    std::vector<EyeEvent> labels_;
};

/// Gaze coordinates (channels gx, gy) with a per-sample eye event.
struct GazeRecording {
    SampledSignal xy;
    std::vector<EyeEvent> events;
};

inline constexpr std::size_t kJointCount = 17;

/// Pose streams are stored as a SampledSignal with 3 * 17 channels
/// ordered j00_x, j00_y, j00_z, j01_x, ...
inline std::vector<std::string> pose_channel_names() {
    std::vector<std::string> names;
    names.reserve(3 * kJointCount);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        std::string base = (j < 10 ? "j0" : "j") + std::to_string(j);
        for (const char* axis : {"_x", "_y", "_z"}) names.push_back(base + axis);
    }
    return names;
}

}  // namespace hepot
