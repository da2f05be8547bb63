#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hepot/errors.hpp"

namespace hepot {

enum class SensorGroup { Ecg, Watch, Eog, Etg, Eeg, Acc, Video };

inline constexpr std::array<SensorGroup, 7> kSensorGroups = {
    SensorGroup::Ecg, SensorGroup::Watch, SensorGroup::Eog, SensorGroup::Etg,
    SensorGroup::Eeg, SensorGroup::Acc,   SensorGroup::Video};

inline std::string_view to_string(SensorGroup g) {
    switch (g) {
        case SensorGroup::Ecg: return "ecg";
        case SensorGroup::Watch: return "watch";
        case SensorGroup::Eog: return "eog";
        case SensorGroup::Etg: return "etg";
        case SensorGroup::Eeg: return "eeg";
        case SensorGroup::Acc: return "acc";
        case SensorGroup::Video: return "video";
    }
    return "ecg";
}

inline bool is_movement(SensorGroup g) { return g == SensorGroup::Acc || g == SensorGroup::Video; }

/// Feature groups fed by a device name. The smartwatch supplies both the
/// heart-rate features and the accelerometer features.
inline std::set<SensorGroup> device_groups(std::string_view device) {
    if (device == "camera" || device == "video") return {SensorGroup::Video};
    if (device == "smartwatch" || device == "watch") return {SensorGroup::Watch, SensorGroup::Acc};
    if (device == "acc") return {SensorGroup::Acc};
    if (device == "ecg") return {SensorGroup::Ecg};
    if (device == "eog") return {SensorGroup::Eog};
    if (device == "eeg") return {SensorGroup::Eeg};
    if (device == "etg" || device == "gaze") return {SensorGroup::Etg};
    throw ConfigError("unknown sensor '" + std::string(device) + "'");
}

struct FeatureInfo {
    std::string name;
    SensorGroup group;
};

inline constexpr std::size_t kFeatureCount = 55;
inline constexpr std::size_t kBiometricCount = 36;
inline constexpr std::size_t kMovementCount = 19;

inline constexpr std::array<std::string_view, 10> kEegStreamNames = {
    "delta", "theta", "low_alpha", "high_alpha", "low_beta",
    "high_beta", "low_gamma", "mid_gamma", "attention", "meditation"};

namespace detail {

inline std::vector<FeatureInfo> build_registry() {
    std::vector<FeatureInfo> r;
    for (const char* n : {"ecg_mean_rri", "ecg_lf", "ecg_hf", "ecg_lf_hf"}) r.push_back({n, SensorGroup::Ecg});
    for (const char* n : {"watch_mean_rri", "watch_lf", "watch_hf", "watch_lf_hf"})
        r.push_back({n, SensorGroup::Watch});
    r.push_back({"blink_rate", SensorGroup::Eog});
    for (const char* n : {"gaze_std_x", "gaze_std_y", "gaze_step_mean", "gaze_step_std",
                          "gaze_large_step_rate", "visual_intake_ratio", "saccade_ratio"})
        r.push_back({n, SensorGroup::Etg});
    for (auto s : kEegStreamNames) {
        r.push_back({"eeg_" + std::string(s) + "_mean", SensorGroup::Eeg});
        r.push_back({"eeg_" + std::string(s) + "_std", SensorGroup::Eeg});
    }
    r.push_back({"acc_move_mean", SensorGroup::Acc});
    r.push_back({"acc_move_nograv_mean", SensorGroup::Acc});
    for (int j = 0; j < 17; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "pose_move_mean_j%02d", j);
        r.push_back({buf, SensorGroup::Video});
    }
    return r;
}

inline void check_registry(const std::vector<FeatureInfo>& r) {
    std::set<std::string> names;
    std::size_t bio = 0, mov = 0;
    std::array<std::size_t, 7> per_group{};
    for (const auto& f : r) {
        if (!names.insert(f.name).second) throw ConfigError("duplicate feature name " + f.name);
        (is_movement(f.group) ? mov : bio) += 1;
        per_group[static_cast<std::size_t>(f.group)] += 1;
    }
    constexpr std::array<std::size_t, 7> expected{4, 4, 1, 7, 20, 2, 17};
    if (r.size() != kFeatureCount || bio != kBiometricCount || mov != kMovementCount || per_group != expected)
        throw ConfigError("feature registry cardinalities are wrong");
}

}  // namespace detail

/// The ordered 55-feature registry, validated on first use.
inline const std::vector<FeatureInfo>& feature_registry() {
    static const std::vector<FeatureInfo> r = [] {
        auto v = detail::build_registry();
        detail::check_registry(v);
        return v;
    }();
    return r;
}

inline std::optional<std::size_t> find_feature(std::string_view name) {
    const auto& r = feature_registry();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i].name == name) return i;
    return std::nullopt;
}

inline std::size_t feature_index(std::string_view name) {
    auto i = find_feature(name);
    if (!i) throw UnknownFeatureError("unknown feature '" + std::string(name) + "'");
    return *i;
}

inline std::vector<std::size_t> group_columns(const std::set<SensorGroup>& groups) {
    std::vector<std::size_t> cols;
    const auto& r = feature_registry();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (groups.count(r[i].group)) cols.push_back(i);
    return cols;
}

inline std::vector<std::size_t> all_columns() {
    std::vector<std::size_t> cols(kFeatureCount);
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    return cols;
}

inline std::vector<std::size_t> biometric_columns() {
    return group_columns({SensorGroup::Ecg, SensorGroup::Watch, SensorGroup::Eog, SensorGroup::Etg,
                          SensorGroup::Eeg});
}

/// FNV-1a over the newline-joined feature names, as 16 hex digits.
inline std::string registry_hash() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : feature_registry()) {
        for (unsigned char c : f.name) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hepot
