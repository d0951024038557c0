#pragma once

#include <string>
#include <vector>

#include "motus/loso.hpp"

namespace motus {

struct AblationRow {
    std::string config;
    bool baseline = false;  // the four-sensor row
    std::array<double, 2> uar{0.0, 0.0};  // [track], full-agreement subset
};

inline std::vector<SensorConfig> default_ablation_configs() {
    std::vector<SensorConfig> out;
    for (const char* spec : {"left_arm", "right_arm", "left_leg", "right_leg",
                             "left_arm+right_arm", "left_leg+right_leg",
                             "left_arm+right_leg", "all"})
        out.push_back(SensorConfig::parse(spec));
    return out;
}

// Full LOSO per sensor configuration; feature extraction runs once and the
// per-config pipelines select their column blocks.
inline std::vector<AblationRow> ablate(const Dataset& ds,
                                       const std::vector<SensorConfig>& configs,
                                       PipelineConfig pipeline) {
    if (configs.empty()) throw InvalidArgument("ablate: empty config list");
    PreparedFeatures features;
    const bool svm = pipeline.classifier == ClassifierKind::Svm;
    if (svm) features = prepare_features(ds, pipeline.effective_jobs());

    std::vector<AblationRow> rows;
    for (const auto& sensors : configs) {
        PipelineConfig cfg = pipeline;
        cfg.sensors = sensors;
        auto report = loso_run(ds, cfg, svm ? &features : nullptr);
        AblationRow row;
        row.config = sensors.to_string();
        row.baseline = sensors.sensor_count() == kNumSensors;
        for (int track : {kPosture, kMovement})
            if (report.tracks[track])
                row.uar[track] = report.tracks[track]->metrics_full.uar;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace motus
