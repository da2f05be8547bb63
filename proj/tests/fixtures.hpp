#pragma once

#include <map>
#include <random>
#include <string>

#include "hepot/pipeline.hpp"

namespace testutil {

/// Table with subjects x cycles x 3 conditions rows. Every feature is unit
/// Gaussian noise; columns listed in `signal` get `strength * condition`
/// added on top.
inline hepot::FeatureTable planted_table(int subjects, int cycles, std::uint64_t seed,
                                         const std::map<std::size_t, double>& signal) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    hepot::FeatureTable t;
    for (int s = 1; s <= subjects; ++s)
        for (int c = 1; c <= cycles; ++c)
            for (auto cond : hepot::kConditions) {
                hepot::FeatureVector v;
                v.subject = (s < 10 ? "s0" : "s") + std::to_string(s);
                v.cycle = c;
                v.condition = cond;
                v.trial_id = v.subject + "_c" + std::to_string(c) + "_" + std::string(to_string(cond));
                for (std::size_t k = 0; k < hepot::kFeatureCount; ++k) {
                    double x = n01(rng);
                    if (auto it = signal.find(k); it != signal.end())
                        x += it->second * static_cast<double>(static_cast<int>(cond));
                    v.values[k] = x;
                }
                t.rows.push_back(std::move(v));
            }
    return t;
}

}  // namespace testutil
