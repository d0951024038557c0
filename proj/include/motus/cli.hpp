#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>

#include "motus/dataset.hpp"
#include "motus/report_io.hpp"
#include "motus/run_config.hpp"

namespace motus {

// Subcommand bodies shared by the CLI binary and the integration tests.
// Each returns a process exit status and reports problems on `err`.

inline int cmd_synth(const RunConfig& cfg, std::ostream& err) {
    try {
        Scenario scenario = Scenario::standard();
        if (!cfg.scenario_file.empty()) {
            std::ifstream in(cfg.scenario_file);
            if (!in) throw FormatError("cannot open scenario file: " + cfg.scenario_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("scenario file: " + std::string(e.what()));
            }
            scenario = Scenario::from_json(j);
        }
        AnnotatorNoise noise{cfg.annotator_jitter_s, cfg.annotator_confusion, cfg.seed};
        write_synth_dataset(cfg.out_dir, scenario, cfg.subjects, cfg.seed, noise);
        {
            std::ofstream out(std::filesystem::path(cfg.out_dir) / "scenario.json");
            out << scenario.to_json().dump(2) << "\n";
        }
        {
            std::ofstream out(std::filesystem::path(cfg.out_dir) /
                              "resolved_config.json");
            out << cfg.to_json().dump(2) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        err << "synth: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& err) {
    try {
        if (cfg.data_dir.empty()) throw InvalidArgument("--data is required");
        Dataset ds = load_dataset(cfg.data_dir, cfg.window, cfg.hop);
        EvalReport report = loso_run(ds, cfg.pipeline());
        write_report_bundle(cfg.out_dir, report, cfg.to_json(), cfg.dump_refined);
        for (const auto& w : report.warnings) err << "warning: " << w << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << "\n";
        return 1;
    }
}

inline int cmd_ablate(const RunConfig& cfg, std::ostream& err) {
    try {
        if (cfg.data_dir.empty()) throw InvalidArgument("--data is required");
        Dataset ds = load_dataset(cfg.data_dir, cfg.window, cfg.hop);
        auto rows = ablate(ds, default_ablation_configs(), cfg.pipeline());
        write_ablation_bundle(cfg.out_dir, rows, cfg.to_json());
        return 0;
    } catch (const std::exception& e) {
        err << "ablate: " << e.what() << "\n";
        return 1;
    }
}

// Renders figures from an existing bundle directory.
inline int cmd_report(const std::string& bundle_dir, std::ostream& err) {
    try {
        const std::filesystem::path dir(bundle_dir);
        bool rendered = false;

        if (std::filesystem::exists(dir / "metrics.json")) {
            std::ifstream in(dir / "metrics.json");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("corrupt metrics.json: " + std::string(e.what()));
            }
            if (j.value("schema", "") != kReportSchema)
                throw FormatError("metrics.json has an unknown schema");
            const auto subjects = j.at("subjects").get<std::vector<std::string>>();
            for (int track : {kPosture, kMovement}) {
                const std::string tname = track_name(track_of(track));
                if (!j.at("tracks").contains(tname)) continue;
                const auto& tj = j.at("tracks").at(tname);
                const auto& names = class_set_for(track_of(track)).classes;

                TrackReport tr;
                for (const auto& pj : tj.at("activity_profiles")) {
                    SubjectProfile p;
                    p.human = pj.at("human").get<std::vector<double>>();
                    p.machine = pj.at("machine").get<std::vector<double>>();
                    tr.profiles.push_back(std::move(p));
                }
                {
                    std::ofstream out(dir / ("profiles_" + tname + ".svg"));
                    out << profile_chart(tr, tname, names, subjects);
                }
                for (const char* subset : {"full_agreement", "all_frames"}) {
                    ConfusionMatrix cm(class_set_for(track_of(track)));
                    cm.counts = tj.at("subsets")
                                    .at(subset)
                                    .at("confusion")
                                    .get<std::vector<std::vector<long long>>>();
                    std::ofstream out(dir /
                                      ("confusion_" + tname + "_" + subset + ".svg"));
                    out << confusion_heatmap(cm, tname + " (" + subset + ")");
                }
            }
            rendered = true;
        }

        if (std::filesystem::exists(dir / "ablation.json")) {
            std::ifstream in(dir / "ablation.json");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("corrupt ablation.json: " + std::string(e.what()));
            }
            std::vector<AblationRow> rows;
            for (const auto& rj : j.at("rows")) {
                AblationRow r;
                r.config = rj.at("config").get<std::string>();
                r.baseline = rj.at("baseline").get<bool>();
                r.uar[kPosture] = rj.at("uar_posture").get<double>();
                r.uar[kMovement] = rj.at("uar_movement").get<double>();
                rows.push_back(std::move(r));
            }
            std::ofstream out(dir / "ablation.svg");
            out << ablation_chart(rows, "sensor configuration vs UAR");
            rendered = true;
        }

        if (!rendered)
            throw FormatError("no metrics.json or ablation.json in " + bundle_dir);
        return 0;
    } catch (const std::exception& e) {
        err << "report: " << e.what() << "\n";
        return 1;
    }
}

// FeatureMatrix export for external inspection of the SVM design matrix.
inline int cmd_featurize(const std::string& recording_path, const std::string& out_path,
                         const std::string& sensors_spec, std::ostream& err) {
    try {
        std::ifstream in(recording_path);
        if (!in) throw FormatError("cannot open recording: " + recording_path);
        Recording rec = parse_recording(in);
        const SensorConfig sensors = SensorConfig::parse(sensors_spec);
        auto frames = window_frames(rec);
        auto usable = usable_mask({}, frames, rec);
        FeatureMatrix m;
        for (std::size_t f = 0; f < frames.size(); ++f) {
            if (!usable[f]) continue;
            m.append_row(frame_features(rec, frames.starts[f], frames.window_len, sensors));
        }
        std::ofstream out(out_path);
        if (!out) throw FormatError("cannot open output: " + out_path);
        write_feature_matrix(m, feature_column_names(sensors), out);
        return 0;
    } catch (const std::exception& e) {
        err << "featurize: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace motus
