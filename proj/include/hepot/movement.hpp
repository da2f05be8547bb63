#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "hepot/errors.hpp"
#include "hepot/signal.hpp"

namespace hepot::movement {

struct MovementSeries {
    std::vector<double> timestamps;
    std::vector<double> values;
    std::optional<std::size_t> joint;

    double mean() const {
        if (values.empty()) return 0.0;
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
};

/// How the gravity component is removed from acceleration.
enum class GravityMode {
    NormDeviation,  // |norm_t - mean(norm)|
    AxisMean,       // norm of (a_t - per-axis mean)
};

namespace detail {

inline void require_xyz(const SampledSignal& acc) {
    if (acc.channel_count() != 3) throw ChannelMismatchError("acceleration needs exactly 3 channels");
}

inline std::vector<double> timestamps(const SampledSignal& s, std::size_t from = 0) {
    std::vector<double> t;
    for (std::size_t i = from; i < s.size(); ++i) t.push_back(s.time_at(i));
    return t;
}

}  // namespace detail

/// Euclidean norm of each 3-axis sample.
inline MovementSeries acc_norm(const SampledSignal& acc) {
    detail::require_xyz(acc);
    auto ax = acc.channel(0), ay = acc.channel(1), az = acc.channel(2);
    MovementSeries m{detail::timestamps(acc), {}, std::nullopt};
    m.values.reserve(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        m.values.push_back(std::sqrt(ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i]));
    return m;
}

inline MovementSeries gravity_removed(const SampledSignal& acc,
                                      GravityMode mode = GravityMode::NormDeviation) {
    detail::require_xyz(acc);
    if (mode == GravityMode::NormDeviation) {
        auto m = acc_norm(acc);
        const double mu = m.mean();
        for (double& v : m.values) v = std::abs(v - mu);
        return m;
    }
    std::array<double, 3> mu{};
    const auto n = static_cast<double>(acc.size());
    for (std::size_t k = 0; k < 3; ++k) {
        for (double v : acc.channel(k)) mu[k] += v;
        mu[k] /= n;
    }
    MovementSeries m{detail::timestamps(acc), {}, std::nullopt};
    for (std::size_t i = 0; i < acc.size(); ++i) {
        double ss = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double d = acc.channel(k)[i] - mu[k];
            ss += d * d;
        }
        m.values.push_back(std::sqrt(ss));
    }
    return m;
}

/// Frame-to-frame displacement of each of the 17 joints.
inline std::array<MovementSeries, kJointCount> pose_displacement(const SampledSignal& pose) {
    if (pose.channel_count() != 3 * kJointCount)
        throw JointCountError("pose stream must carry 17 joints x 3 coordinates");
    if (pose.size() < 2) throw InsufficientDataError("pose displacement needs at least 2 frames");
    std::array<MovementSeries, kJointCount> out;
    const auto t = detail::timestamps(pose, 1);
    for (std::size_t j = 0; j < kJointCount; ++j) {
        auto x = pose.channel(3 * j), y = pose.channel(3 * j + 1), z = pose.channel(3 * j + 2);
        out[j].timestamps = t;
        out[j].joint = j;
        out[j].values.reserve(pose.size() - 1);
        for (std::size_t i = 1; i < pose.size(); ++i) {
            const double dx = x[i] - x[i - 1], dy = y[i] - y[i - 1], dz = z[i] - z[i - 1];
            out[j].values.push_back(std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    }
    return out;
}

inline constexpr std::size_t kMovementFeatureCount = 2 + kJointCount;

/// Trial means: [acc norm, gravity-removed acc, joint 0 .. joint 16].
/// Absent inputs leave their slots empty.
inline std::array<std::optional<double>, kMovementFeatureCount> movement_trial_features(
    const std::optional<SampledSignal>& acc, const std::optional<SampledSignal>& pose,
    GravityMode mode = GravityMode::NormDeviation) {
    std::array<std::optional<double>, kMovementFeatureCount> f{};
    if (acc && !acc->empty()) {
        f[0] = acc_norm(*acc).mean();
        f[1] = gravity_removed(*acc, mode).mean();
    }
    if (pose && pose->size() >= 2) {
        const auto disp = pose_displacement(*pose);
        for (std::size_t j = 0; j < kJointCount; ++j) f[2 + j] = disp[j].mean();
    }
    return f;
}

}  // namespace hepot::movement
