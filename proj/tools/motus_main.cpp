// motus: posture & movement classification toolkit for multi-sensor
// infant IMU recordings.
//
//   motus synth   generate a synthetic labeled dataset
//   motus eval    LOSO evaluation of the SVM or CNN pipeline
//   motus ablate  sensor-subset ablation over the SVM pipeline
//   motus report  render figures from an existing bundle
//   motus featurize  dump the per-frame feature table of one recording

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "motus/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"posture/movement classification toolkit for limb-worn IMU recordings"};
    app.require_subcommand(1);

    motus::RunConfig cfg;
    std::string config_file;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", cfg.seed, "base random seed")->capture_default_str();
        cmd->add_option("--jobs", cfg.jobs, "worker cap, 0 = hardware")->capture_default_str();
        cmd->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
        cmd->add_option("--config", config_file,
                        "JSON config file; values in it override flags");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth);
    synth->add_option("--subjects", cfg.subjects, "number of subjects")
        ->capture_default_str();
    synth->add_option("--scenario", cfg.scenario_file, "scenario JSON file");
    synth->add_option("--jitter", cfg.annotator_jitter_s,
                      "annotator boundary jitter (s)")->capture_default_str();
    synth->add_option("--confusion", cfg.annotator_confusion,
                      "annotator per-interval confusion rate")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "leave-one-subject-out evaluation");
    add_common(eval);
    eval->add_option("--data", cfg.data_dir, "dataset directory");
    eval->add_option("--classifier", cfg.classifier, "svm | cnn")->capture_default_str();
    eval->add_option("--track", cfg.track, "posture | movement | both")
        ->capture_default_str();
    eval->add_option("--iar", cfg.iar, "enable iterative annotation refinement {on,off}")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, bool>{{"on", true}, {"off", false}}))
        ->capture_default_str();
    eval->add_option("--iterations", cfg.iterations, "IAR iteration count")
        ->capture_default_str();
    eval->add_option("--iar-trainer", cfg.iar_trainer,
                     "IAR inner classifier: same | svm | cnn")->capture_default_str();
    eval->add_option("--sensors", cfg.sensors,
                     "sensor subset, e.g. all or left_arm+right_leg")
        ->capture_default_str();
    eval->add_option("--svm-lambda", cfg.svm_lambda, "hinge regularization weight")
        ->capture_default_str();
    eval->add_option("--svm-epochs", cfg.svm_epochs, "SVM training epochs")
        ->capture_default_str();
    eval->add_option("--cnn-lr", cfg.cnn_lr, "CNN learning rate")->capture_default_str();
    eval->add_option("--cnn-epochs", cfg.cnn_epochs, "CNN training epochs")
        ->capture_default_str();
    eval->add_flag("--dump-refined", cfg.dump_refined,
                   "export refined labels per fold for audit");

    auto* ablate = app.add_subcommand("ablate", "sensor-subset ablation (full LOSO each)");
    add_common(ablate);
    ablate->add_option("--data", cfg.data_dir, "dataset directory");
    ablate->add_option("--classifier", cfg.classifier, "svm | cnn")->capture_default_str();
    ablate->add_option("--iar", cfg.iar, "enable IAR {on,off}")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, bool>{{"on", true}, {"off", false}}))
        ->capture_default_str();

    std::string bundle_dir;
    auto* report = app.add_subcommand("report", "render figures from a bundle");
    report->add_option("bundle", bundle_dir, "bundle directory")->required();

    std::string rec_path, feat_out = "features.csv", feat_sensors = "all";
    auto* feat = app.add_subcommand("featurize", "dump per-frame features of a recording");
    feat->add_option("recording", rec_path, "recording .csv file")->required();
    feat->add_option("--out", feat_out, "output CSV path")->capture_default_str();
    feat->add_option("--sensors", feat_sensors, "sensor subset spec")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) cfg.apply_overrides_file(config_file);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    if (synth->parsed()) return motus::cmd_synth(cfg, std::cerr);
    if (eval->parsed()) return motus::cmd_eval(cfg, std::cerr);
    if (ablate->parsed()) return motus::cmd_ablate(cfg, std::cerr);
    if (report->parsed()) return motus::cmd_report(bundle_dir, std::cerr);
    if (feat->parsed())
        return motus::cmd_featurize(rec_path, feat_out, feat_sensors, std::cerr);
    return 1;
}
