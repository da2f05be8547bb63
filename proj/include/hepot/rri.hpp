#pragma once

#include <utility>
#include <vector>

namespace hepot {

/// R-peak times and the RR intervals between consecutive detected peaks.
/// `interval_times[i]` is the time of the peak that closes `intervals[i]`.
/// Spans listed in `dropouts` were unreadable; no interval bridges them.
struct RriSequence {
    std::vector<double> peak_times;
    std::vector<double> intervals;
    std::vector<double> interval_times;
    std::vector<std::pair<double, double>> dropouts;

    void add_interval(double end_time, double length) {
        interval_times.push_back(end_time);
        intervals.push_back(length);
    }
};

}  // namespace hepot
