#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hepot/errors.hpp"
#include "hepot/signal.hpp"

namespace hepot {

enum class Condition { Normal = 0, TimePressure = 1, MultiTask = 2 };

inline constexpr std::size_t kConditionCount = 3;
inline constexpr std::array<Condition, kConditionCount> kConditions = {
    Condition::Normal, Condition::TimePressure, Condition::MultiTask};

inline std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::Normal: return "normal";
        case Condition::TimePressure: return "time_pressure";
        case Condition::MultiTask: return "multi_task";
    }
    return "normal";
}

/// Short labels used in confusion-matrix tables.
inline std::string_view short_label(Condition c) {
    switch (c) {
        case Condition::Normal: return "Normal";
        case Condition::TimePressure: return "Time";
        case Condition::MultiTask: return "Multi";
    }
    return "Normal";
}

inline Condition parse_condition(std::string_view s) {
    if (s == "normal" || s == "Normal") return Condition::Normal;
    if (s == "time_pressure" || s == "time" || s == "Time") return Condition::TimePressure;
    if (s == "multi_task" || s == "multi" || s == "Multi") return Condition::MultiTask;
    throw ParseError("unknown condition '" + std::string(s) + "'");
}

enum class Sensor { Ecg, Eog, Hr, Acc, Gaze, Eeg, Pose };

inline constexpr std::array<Sensor, 7> kSensors = {Sensor::Ecg, Sensor::Eog, Sensor::Hr,
                                                   Sensor::Acc, Sensor::Gaze, Sensor::Eeg,
                                                   Sensor::Pose};

inline std::string_view to_string(Sensor s) {
    switch (s) {
        case Sensor::Ecg: return "ecg";
        case Sensor::Eog: return "eog";
        case Sensor::Hr: return "hr";
        case Sensor::Acc: return "acc";
        case Sensor::Gaze: return "gaze";
        case Sensor::Eeg: return "eeg";
        case Sensor::Pose: return "pose";
    }
    return "ecg";
}

inline std::optional<Sensor> parse_sensor(std::string_view s) {
    for (Sensor x : kSensors)
        if (to_string(x) == s) return x;
    return std::nullopt;
}

/// CSV column layout per sensor (excluding the leading `t`).
inline std::vector<std::string> sensor_channels(Sensor s) {
    switch (s) {
        case Sensor::Ecg:
        case Sensor::Eog: return {"value"};
        case Sensor::Hr: return {"bpm"};
        case Sensor::Acc: return {"ax", "ay", "az"};
        case Sensor::Gaze: return {"gx", "gy", "event"};
        case Sensor::Eeg:
            return {"delta",     "theta",     "low_alpha", "high_alpha", "low_beta",
                    "high_beta", "low_gamma", "mid_gamma", "attention",  "meditation"};
        case Sensor::Pose: return {"joint", "x", "y", "z"};
    }
    return {};
}

using SensorPaths = std::map<Sensor, std::filesystem::path>;

struct Trial {
    std::string id;
    std::string subject;
    int cycle = 1;
    Condition condition = Condition::Normal;
    SensorPaths signals;
    std::string calm_id;
};

struct CalmSegment {
    std::string id;
    std::string subject;
    SensorPaths signals;
};

struct DatasetManifest {
    std::vector<std::string> subjects;
    std::vector<CalmSegment> calm;
    std::vector<Trial> trials;  // sorted by (subject, cycle, condition)
    int cycles = 3;
    std::filesystem::path root;  // directory relative paths resolve against

    const CalmSegment* find_calm(std::string_view id) const {
        for (const auto& c : calm)
            if (c.id == id) return &c;
        return nullptr;
    }
    const Trial* find_trial(std::string_view id) const {
        for (const auto& t : trials)
            if (t.id == id) return &t;
        return nullptr;
    }
};

/// In-memory signals of one trial or calm segment; absent sensors are nullopt.
struct TrialSignals {
    std::optional<SampledSignal> ecg;
    std::optional<SampledSignal> eog;
    std::optional<SampledSignal> hr;
    std::optional<SampledSignal> acc;
    std::optional<GazeRecording> gaze;
    std::optional<SampledSignal> eeg;
    std::optional<SampledSignal> pose;

    bool has(Sensor s) const {
        switch (s) {
            case Sensor::Ecg: return ecg.has_value();
            case Sensor::Eog: return eog.has_value();
            case Sensor::Hr: return hr.has_value();
            case Sensor::Acc: return acc.has_value();
            case Sensor::Gaze: return gaze.has_value();
            case Sensor::Eeg: return eeg.has_value();
            case Sensor::Pose: return pose.has_value();
        }
        return false;
    }
};

}  // namespace hepot
