#pragma once

// Synthetic study assembled in memory: recordings are generated and turned
// into a feature table without touching the filesystem.

#include <vector>

#include "hepot/parallel.hpp"
#include "hepot/pipeline.hpp"
#include "hepot/synth.hpp"

namespace hepot {

inline FeatureTable synthetic_feature_table(const synth::SynthConfig& scfg, const FeatureConfig& fcfg,
                                            RelativeMode mode, std::size_t workers = 1) {
    const DatasetManifest layout = synth::dataset_layout(scfg);

    std::vector<TrialSignals> calm(layout.calm.size());
    std::vector<CalmBaseline> baselines(layout.calm.size());
    parallel_for(layout.calm.size(), workers, [&](std::size_t i) {
        const int s = static_cast<int>(i) + 1;
        calm[i] = synth::generate_recording(scfg, s, 0, std::nullopt).signals;
        const auto v = assemble(calm[i], fcfg, gaze_threshold(fcfg, &calm[i], calm[i]));
        baselines[i] = calm_baseline(std::span(&v, 1), layout.calm[i].subject);
    });

    FeatureTable table;
    table.rows.resize(layout.trials.size());
    parallel_for(layout.trials.size(), workers, [&](std::size_t i) {
        const auto& t = layout.trials[i];
        const int s = std::stoi(t.subject.substr(1));
        const auto k = static_cast<std::size_t>(s - 1);
        const auto rec = synth::generate_recording(scfg, s, t.cycle, t.condition);
        FeatureVector v = assemble(rec.signals, fcfg, gaze_threshold(fcfg, &calm[k], rec.signals));
        v.trial_id = t.id;
        v.subject = t.subject;
        v.cycle = t.cycle;
        v.condition = t.condition;
        table.rows[i] = relativize(v, baselines[k], mode).vector;
    });
    return table;
}

}  // namespace hepot
