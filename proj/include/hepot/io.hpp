#pragma once

// Flat-file ingestion: signal CSVs (one layout per sensor) and the JSON
// dataset manifest.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "hepot/dataset.hpp"
#include "hepot/errors.hpp"
#include "hepot/signal.hpp"

namespace hepot {

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view s, const std::string& where) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(where + ": cannot parse number '" + std::string(s) + "'");
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite value '" + std::string(s) + "'");
    return v;
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct RawCsv {
    std::optional<double> declared_rate;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline RawCsv read_raw_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    RawCsv csv;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            auto at = sv.find("rate=");
            if (at != std::string_view::npos)
                csv.declared_rate = parse_double(sv.substr(at + 5), path.string() + " header");
            continue;
        }
        std::vector<std::string> cells;
        for (auto cell : split(sv)) cells.emplace_back(trim(cell));
        if (!have_header) {
            csv.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != csv.header.size())
                throw ParseError(path.string() + ": row has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(csv.header.size()));
            csv.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ParseError(path.string() + ": missing header row");
    return csv;
}

/// Verifies strictly increasing timestamps with per-step jitter within 1% of
/// the nominal period; returns the nominal rate.
inline double check_uniform(const std::vector<double>& t, std::optional<double> declared,
                            const std::string& where) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw NonUniformRateError(where + ": timestamps not strictly increasing at row " +
                                      std::to_string(i + 1));
    double rate = 0.0;
    if (declared) {
        rate = *declared;
    } else {
        if (t.size() < 2) throw ParseError(where + ": cannot infer sample rate from < 2 rows");
        std::vector<double> d(t.size() - 1);
        for (std::size_t i = 1; i < t.size(); ++i) d[i - 1] = t[i] - t[i - 1];
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
        rate = 1.0 / d[d.size() / 2];
    }
    if (!(rate > 0.0)) throw ParseError(where + ": sample rate must be positive");
    const double period = 1.0 / rate;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - period) > 0.01 * period)
            throw NonUniformRateError(where + ": sampling jitter beyond 1% of the nominal period at row " +
                                      std::to_string(i + 1));
    return rate;
}

inline void expect_header(const RawCsv& csv, const std::vector<std::string>& expected,
                          const std::string& where) {
    std::vector<std::string> want{"t"};
    want.insert(want.end(), expected.begin(), expected.end());
    if (csv.header != want) {
        std::string got, exp;
        for (const auto& h : csv.header) got += h + ",";
        for (const auto& h : want) exp += h + ",";
        throw ChannelMismatchError(where + ": header '" + got + "' does not match expected '" +
                                   exp + "'");
    }
}

}  // namespace detail

/// Reads a `t,<channels...>` CSV. An optional `# rate=<Hz>` comment declares
/// the nominal rate; otherwise it is inferred from the median timestamp step.
inline SampledSignal load_signal(const std::filesystem::path& path,
                                 const std::vector<std::string>& expected_channels) {
    const std::string where = path.string();
    auto csv = detail::read_raw_csv(path);
    detail::expect_header(csv, expected_channels, where);
    std::vector<double> t;
    t.reserve(csv.rows.size());
    std::vector<std::vector<double>> cols(expected_channels.size());
    for (auto& c : cols) c.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string at = where + ":" + std::to_string(r + 2);
        t.push_back(detail::parse_double(row[0], at));
        for (std::size_t k = 0; k < cols.size(); ++k)
            cols[k].push_back(detail::parse_double(row[k + 1], at));
    }
    if (t.empty() && !csv.declared_rate) throw ParseError(where + ": no data rows");
    const double rate = detail::check_uniform(t, csv.declared_rate, where);
    return {t.empty() ? 0.0 : t.front(), rate, expected_channels, std::move(cols)};
}

inline void write_signal(const std::filesystem::path& path, const SampledSignal& sig) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# rate=" << detail::format_double(sig.sample_rate()) << "\n";
    out << "t";
    for (const auto& c : sig.channels()) out << "," << c;
    out << "\n";
    std::string line;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        line = detail::format_double(sig.time_at(i));
        for (std::size_t k = 0; k < sig.channel_count(); ++k) {
            line += ',';
            line += detail::format_double(sig.channel(k)[i]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

inline GazeRecording load_gaze(const std::filesystem::path& path) {
    const std::string where = path.string();
    auto csv = detail::read_raw_csv(path);
    detail::expect_header(csv, sensor_channels(Sensor::Gaze), where);
    std::vector<double> t, gx, gy;
    std::vector<EyeEvent> events;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string at = where + ":" + std::to_string(r + 2);
        t.push_back(detail::parse_double(row[0], at));
        gx.push_back(detail::parse_double(row[1], at));
        gy.push_back(detail::parse_double(row[2], at));
        auto ev = parse_eye_event(row[3]);
        if (!ev) throw ParseError(at + ": unknown gaze event '" + row[3] + "'");
        events.push_back(*ev);
    }
    if (t.empty() && !csv.declared_rate) throw ParseError(where + ": no data rows");
    const double rate = detail::check_uniform(t, csv.declared_rate, where);
    return {SampledSignal(t.empty() ? 0.0 : t.front(), rate, {"gx", "gy"},
                          {std::move(gx), std::move(gy)}),
            std::move(events)};
}

inline void write_gaze(const std::filesystem::path& path, const GazeRecording& gaze) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# rate=" << detail::format_double(gaze.xy.sample_rate()) << "\n";
    out << "t,gx,gy,event\n";
    for (std::size_t i = 0; i < gaze.xy.size(); ++i)
        out << detail::format_double(gaze.xy.time_at(i)) << ','
            << detail::format_double(gaze.xy.channel(0)[i]) << ','
            << detail::format_double(gaze.xy.channel(1)[i]) << ',' << to_string(gaze.events[i])
            << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

/// Reads the long `t,joint,x,y,z` pose layout into a 51-channel signal.
/// Every frame must list all 17 joints.
inline SampledSignal load_pose(const std::filesystem::path& path) {
    const std::string where = path.string();
    auto csv = detail::read_raw_csv(path);
    detail::expect_header(csv, sensor_channels(Sensor::Pose), where);
    std::vector<double> frame_times;
    std::vector<std::vector<double>> cols(3 * kJointCount);
    std::vector<bool> seen(kJointCount, false);
    std::size_t seen_count = 0;
    auto close_frame = [&] {
        if (seen_count != kJointCount)
            throw JointCountError(where + ": frame at t=" +
                                  detail::format_double(frame_times.back()) + " has " +
                                  std::to_string(seen_count) + " joints, expected 17");
        std::fill(seen.begin(), seen.end(), false);
        seen_count = 0;
    };
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string at = where + ":" + std::to_string(r + 2);
        const double t = detail::parse_double(row[0], at);
        const double jd = detail::parse_double(row[1], at);
        if (jd < 0 || jd >= static_cast<double>(kJointCount) || jd != std::floor(jd))
            throw JointCountError(at + ": joint index out of range 0..16");
        const auto j = static_cast<std::size_t>(jd);
        if (frame_times.empty() || t != frame_times.back()) {
            if (!frame_times.empty()) close_frame();
            frame_times.push_back(t);
            for (auto& c : cols) c.push_back(0.0);
        }
        if (seen[j]) throw JointCountError(at + ": joint listed twice in one frame");
        seen[j] = true;
        ++seen_count;
        for (std::size_t a = 0; a < 3; ++a)
            cols[3 * j + a].back() = detail::parse_double(row[2 + a], at);
    }
    if (!frame_times.empty()) close_frame();
    if (frame_times.empty() && !csv.declared_rate) throw ParseError(where + ": no data rows");
    const double rate = detail::check_uniform(frame_times, csv.declared_rate, where);
    return {frame_times.empty() ? 0.0 : frame_times.front(), rate, pose_channel_names(),
            std::move(cols)};
}

inline void write_pose(const std::filesystem::path& path, const SampledSignal& pose) {
    if (pose.channel_count() != 3 * kJointCount)
        throw JointCountError("pose signal must carry 51 channels");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# rate=" << detail::format_double(pose.sample_rate()) << "\n";
    out << "t,joint,x,y,z\n";
    for (std::size_t i = 0; i < pose.size(); ++i) {
        const std::string t = detail::format_double(pose.time_at(i));
        for (std::size_t j = 0; j < kJointCount; ++j)
            out << t << ',' << j << ',' << detail::format_double(pose.channel(3 * j)[i]) << ','
                << detail::format_double(pose.channel(3 * j + 1)[i]) << ','
                << detail::format_double(pose.channel(3 * j + 2)[i]) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Manifest

namespace detail {

inline SensorPaths parse_signal_paths(const nlohmann::json& j, const std::filesystem::path& root,
                                      const std::string& owner) {
    SensorPaths paths;
    if (!j.is_object()) throw ParseError(owner + ": 'signals' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto s = parse_sensor(it.key());
        if (!s) throw ParseError(owner + ": unknown sensor '" + it.key() + "'");
        if (!it.value().is_string()) throw ParseError(owner + ": sensor path must be a string");
        std::filesystem::path p = it.value().get<std::string>();
        paths[*s] = p.is_absolute() ? p : root / p;
    }
    return paths;
}

inline std::string path_for_json(const std::filesystem::path& p, const std::filesystem::path& root) {
    auto rel = p.lexically_relative(root);
    return (rel.empty() || *rel.begin() == "..") ? p.generic_string() : rel.generic_string();
}

}  // namespace detail

inline void sort_trials(std::vector<Trial>& trials) {
    std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
        return std::tuple(a.subject, a.cycle, static_cast<int>(a.condition), a.id) <
               std::tuple(b.subject, b.cycle, static_cast<int>(b.condition), b.id);
    });
}

/// Checks cross-references and uniqueness; throws on the first violation.
inline void check_manifest(const DatasetManifest& m) {
    std::set<std::string> calm_ids;
    for (const auto& c : m.calm) {
        if (c.signals.empty()) throw ParseError("calm segment '" + c.id + "' lists no signals");
        if (!calm_ids.insert(c.id).second)
            throw DuplicateTrialError("calm segment id '" + c.id + "' appears twice");
    }
    std::set<std::string> trial_ids;
    std::set<std::tuple<std::string, int, int>> triples;
    for (const auto& t : m.trials) {
        if (!trial_ids.insert(t.id).second)
            throw DuplicateTrialError("trial id '" + t.id + "' appears twice");
        if (!triples.insert({t.subject, t.cycle, static_cast<int>(t.condition)}).second)
            throw DuplicateTrialError("duplicate (subject, cycle, condition) for trial '" + t.id + "'");
        const CalmSegment* calm = m.find_calm(t.calm_id);
        if (!calm)
            throw ReferenceError("trial '" + t.id + "' references unknown calm segment '" +
                                 t.calm_id + "'");
        if (calm->subject != t.subject)
            throw ReferenceError("trial '" + t.id + "' references calm segment of another subject");
    }
}

inline DatasetManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& root) {
    DatasetManifest m;
    m.root = root;
    try {
        if (!j.is_object()) throw ParseError("manifest must be a JSON object");
        if (j.contains("cycles")) m.cycles = j.at("cycles").get<int>();
        for (const auto& s : j.value("subjects", nlohmann::json::array()))
            m.subjects.push_back(s.get<std::string>());
        for (const auto& c : j.value("calm", nlohmann::json::array())) {
            CalmSegment seg;
            seg.id = c.at("id").get<std::string>();
            seg.subject = c.at("subject").get<std::string>();
            seg.signals = detail::parse_signal_paths(c.at("signals"), root, "calm '" + seg.id + "'");
            m.calm.push_back(std::move(seg));
        }
        for (const auto& t : j.value("trials", nlohmann::json::array())) {
            Trial trial;
            trial.id = t.at("id").get<std::string>();
            trial.subject = t.at("subject").get<std::string>();
            trial.cycle = t.at("cycle").get<int>();
            trial.condition = parse_condition(t.at("condition").get<std::string>());
            trial.signals =
                detail::parse_signal_paths(t.at("signals"), root, "trial '" + trial.id + "'");
            trial.calm_id = t.at("calm").get<std::string>();
            m.trials.push_back(std::move(trial));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed manifest: ") + e.what());
    }
    std::set<std::string> roster(m.subjects.begin(), m.subjects.end());
    for (const auto& t : m.trials)
        if (!roster.empty() && !roster.count(t.subject))
            throw ReferenceError("trial '" + t.id + "' names subject '" + t.subject +
                                 "' absent from the roster");
    check_manifest(m);
    sort_trials(m.trials);
    return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    return parse_manifest(j, path.parent_path());
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    auto paths = [&](const SensorPaths& sp) {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [s, p] : sp) o[std::string(to_string(s))] = detail::path_for_json(p, m.root);
        return o;
    };
    nlohmann::json j;
    j["cycles"] = m.cycles;
    j["subjects"] = m.subjects;
    j["calm"] = nlohmann::json::array();
    for (const auto& c : m.calm)
        j["calm"].push_back({{"id", c.id}, {"subject", c.subject}, {"signals", paths(c.signals)}});
    j["trials"] = nlohmann::json::array();
    for (const auto& t : m.trials)
        j["trials"].push_back({{"id", t.id},
                               {"subject", t.subject},
                               {"cycle", t.cycle},
                               {"condition", std::string(to_string(t.condition))},
                               {"signals", paths(t.signals)},
                               {"calm", t.calm_id}});
    return j;
}

struct ValidationReport {
    bool valid = true;
    std::vector<Sensor> missing_sensors;  // legal; imputed downstream
    std::vector<std::string> errors;      // hard errors
    std::vector<std::string> notes;

    bool empty() const { return missing_sensors.empty() && errors.empty() && notes.empty(); }
};

/// Sensors may be absent (unlisted or pointing at a nonexistent file); that is
/// reported but legal. A trial with no usable sensor, a cycle outside
/// 1..cycles, or a dangling calm reference is invalid.
inline ValidationReport validate_trial(const Trial& trial, const DatasetManifest& manifest) {
    ValidationReport r;
    std::size_t present = 0;
    for (Sensor s : kSensors) {
        auto it = trial.signals.find(s);
        if (it == trial.signals.end()) {
            r.missing_sensors.push_back(s);
        } else if (!std::filesystem::exists(it->second)) {
            r.missing_sensors.push_back(s);
            r.notes.push_back(std::string(to_string(s)) + " file not found: " + it->second.string());
        } else {
            ++present;
        }
    }
    if (present == 0) r.errors.push_back("trial '" + trial.id + "' has no sensor data");
    if (trial.cycle < 1 || trial.cycle > manifest.cycles)
        r.errors.push_back("cycle " + std::to_string(trial.cycle) + " outside 1.." +
                           std::to_string(manifest.cycles));
    if (!manifest.find_calm(trial.calm_id))
        r.errors.push_back("calm segment '" + trial.calm_id + "' not found");
    r.valid = r.errors.empty();
    return r;
}

/// Loads every present sensor file; absent or missing files stay nullopt.
inline TrialSignals load_signals(const SensorPaths& paths) {
    TrialSignals out;
    for (const auto& [sensor, path] : paths) {
        if (!std::filesystem::exists(path)) continue;
        switch (sensor) {
            case Sensor::Ecg: out.ecg = load_signal(path, sensor_channels(sensor)); break;
            case Sensor::Eog: out.eog = load_signal(path, sensor_channels(sensor)); break;
            case Sensor::Hr: out.hr = load_signal(path, sensor_channels(sensor)); break;
            case Sensor::Acc: out.acc = load_signal(path, sensor_channels(sensor)); break;
            case Sensor::Eeg: out.eeg = load_signal(path, sensor_channels(sensor)); break;
            case Sensor::Gaze: out.gaze = load_gaze(path); break;
            case Sensor::Pose: out.pose = load_pose(path); break;
        }
    }
    return out;
}

}  // namespace hepot
