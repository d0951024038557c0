#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "motus/common.hpp"
#include "motus/loso.hpp"

namespace motus {

// Fully resolved run description; the report embeds its JSON form so any
// run can be reproduced from its own bundle.
struct RunConfig {
    std::string data_dir;
    std::string out_dir = "motus-out";
    std::string classifier = "svm";  // svm | cnn
    std::string track = "both";      // posture | movement | both
    bool iar = false;
    int iterations = 5;
    std::string iar_trainer = "same";  // same | svm | cnn
    bool iar_condition_refined = true;
    std::string sensors = "all";
    std::uint64_t seed = 1;
    int jobs = 0;
    std::size_t window = kDefaultWindow;
    std::size_t hop = kDefaultHop;
    double svm_lambda = 1e-4;
    int svm_epochs = 20;
    double cnn_lr = 1e-3;
    int cnn_epochs = 30;
    std::size_t cnn_filters = 8;
    std::size_t cnn_fusion_width = 64;
    bool dump_refined = false;

    // synth command
    std::string scenario_file;
    std::size_t subjects = 12;
    double annotator_jitter_s = 0.25;
    double annotator_confusion = 0.05;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["data_dir"] = data_dir;
        j["out_dir"] = out_dir;
        j["classifier"] = classifier;
        j["track"] = track;
        j["iar"] = iar;
        j["iterations"] = iterations;
        j["iar_trainer"] = iar_trainer;
        j["iar_condition_refined"] = iar_condition_refined;
        j["sensors"] = sensors;
        j["seed"] = seed;
        j["jobs"] = jobs;
        j["window"] = window;
        j["hop"] = hop;
        j["svm_lambda"] = svm_lambda;
        j["svm_epochs"] = svm_epochs;
        j["cnn_lr"] = cnn_lr;
        j["cnn_epochs"] = cnn_epochs;
        j["cnn_filters"] = cnn_filters;
        j["cnn_fusion_width"] = cnn_fusion_width;
        j["dump_refined"] = dump_refined;
        j["scenario_file"] = scenario_file;
        j["subjects"] = subjects;
        j["annotator_jitter_s"] = annotator_jitter_s;
        j["annotator_confusion"] = annotator_confusion;
        return j;
    }

    // Values from a config file take precedence over flags: parse flags
    // first, then apply the file on top.
    void apply_overrides(const nlohmann::json& j) {
        auto get = [&](const char* key, auto& target) {
            if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
        };
        get("data_dir", data_dir);
        get("out_dir", out_dir);
        get("classifier", classifier);
        get("track", track);
        get("iar", iar);
        get("iterations", iterations);
        get("iar_trainer", iar_trainer);
        get("iar_condition_refined", iar_condition_refined);
        get("sensors", sensors);
        get("seed", seed);
        get("jobs", jobs);
        get("window", window);
        get("hop", hop);
        get("svm_lambda", svm_lambda);
        get("svm_epochs", svm_epochs);
        get("cnn_lr", cnn_lr);
        get("cnn_epochs", cnn_epochs);
        get("cnn_filters", cnn_filters);
        get("cnn_fusion_width", cnn_fusion_width);
        get("dump_refined", dump_refined);
        get("scenario_file", scenario_file);
        get("subjects", subjects);
        get("annotator_jitter_s", annotator_jitter_s);
        get("annotator_confusion", annotator_confusion);
    }

    void apply_overrides_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("config file " + path + ": " + e.what());
        }
        apply_overrides(j);
    }

    PipelineConfig pipeline() const {
        PipelineConfig p;
        if (classifier == "svm")
            p.classifier = ClassifierKind::Svm;
        else if (classifier == "cnn")
            p.classifier = ClassifierKind::Cnn;
        else
            throw InvalidArgument("classifier must be svm or cnn");
        if (track == "posture")
            p.track = TrackSelect::Posture;
        else if (track == "movement")
            p.track = TrackSelect::Movement;
        else if (track == "both")
            p.track = TrackSelect::Both;
        else
            throw InvalidArgument("track must be posture, movement or both");
        p.sensors = SensorConfig::parse(sensors);
        p.svm.lambda = svm_lambda;
        p.svm.epochs = svm_epochs;
        p.cnn_base.path_filters = cnn_filters;
        p.cnn_base.fusion_width = cnn_fusion_width;
        p.cnn_base.window_len = window;
        p.cnn_lr = cnn_lr;
        p.cnn_epochs = cnn_epochs;
        p.iar_enabled = iar;
        p.iar_iterations = iterations;
        if (iar_trainer == "svm")
            p.iar_trainer = ClassifierKind::Svm;
        else if (iar_trainer == "cnn")
            p.iar_trainer = ClassifierKind::Cnn;
        else if (iar_trainer != "same")
            throw InvalidArgument("iar_trainer must be same, svm or cnn");
        p.iar_condition_refined = iar_condition_refined;
        p.keep_refined = dump_refined;
        p.seed = seed;
        p.jobs = jobs;
        return p;
    }
};

}  // namespace motus
