#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "motus/ablation.hpp"
#include "motus/cli.hpp"
#include "motus/loso.hpp"
#include "motus/report_io.hpp"
#include "synth_fixture.hpp"

using namespace motus;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Minimal XML well-formedness check: balanced tags, quoted attributes.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    if (text.rfind("<?xml", 0) == 0) i = text.find("?>") + 2;
    while (i < text.size()) {
        if (text[i] != '<') {
            if (text[i] == '&') {
                const auto semi = text.find(';', i);
                if (semi == std::string::npos || semi - i > 6) return false;
            }
            ++i;
            continue;
        }
        const auto end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        if (!tag.empty() && tag[0] == '/') {
            if (stack.empty()) return false;
            if (stack.back() != tag.substr(1)) return false;
            stack.pop_back();
        } else if (!tag.empty() && tag.back() != '/') {
            const auto space = tag.find_first_of(" \t\n");
            stack.push_back(space == std::string::npos ? tag : tag.substr(0, space));
        }
        i = end + 1;
    }
    return stack.empty();
}

double uar_against(const std::vector<int>& pred, const std::vector<int>& truth,
                   const ClassSet& cs) {
    return summary_metrics(confusion(pred, truth, cs)).uar;
}

}  // namespace

TEST_CASE("loso_run on a 3-subject cohort") {
    auto cohort = testing::make_cohort(3, 120.0, AnnotatorNoise{0.15, 0.03, 0}, 31, false);
    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Svm;
    cfg.seed = 5;
    cfg.jobs = 2;
    auto report = loso_run(cohort.dataset, cfg);

    SECTION("exactly one fold per subject, both subset blocks present") {
        REQUIRE(report.folds.size() == 3);
        REQUIRE(report.subjects.size() == 3);
        for (int track : {kPosture, kMovement}) {
            REQUIRE(report.tracks[track].has_value());
            const auto& tr = *report.tracks[track];
            CHECK(tr.fold_full.size() == 3);
            CHECK(tr.fold_all.size() == 3);
            CHECK(tr.metrics_full.frames > 0);
            CHECK(tr.metrics_all.frames >= tr.metrics_full.frames);
        }
    }
    SECTION("needs at least 3 subjects") {
        Dataset two;
        two.subjects = {cohort.dataset.subjects[0], cohort.dataset.subjects[1]};
        CHECK_THROWS_AS(loso_run(two, cfg), InvalidArgument);
    }
    SECTION("rerun with the same config is identical, including fingerprints") {
        auto again = loso_run(cohort.dataset, cfg);
        const auto a = report_json(report, nlohmann::ordered_json::object()).dump();
        const auto b = report_json(again, nlohmann::ordered_json::object()).dump();
        REQUIRE(a == b);
        for (std::size_t k = 0; k < report.folds.size(); ++k)
            REQUIRE(report.folds[k].fingerprint == again.folds[k].fingerprint);
    }
}

TEST_CASE("LOSO leakage: the held-out subject influences nothing in its own fold") {
    auto base = testing::make_cohort(4, 120.0, AnnotatorNoise{0.15, 0.05, 0}, 77, false);
    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Svm;
    cfg.iar_enabled = true;  // covers IAR labels and standardizer/model fit
    cfg.iar_iterations = 2;
    cfg.seed = 13;
    cfg.jobs = 2;

    auto report_a = loso_run(base.dataset, cfg);

    // replace subject 2's data wholesale (different generator seed)
    auto fresh = testing::make_cohort(4, 120.0, AnnotatorNoise{0.15, 0.05, 0}, 78, false);
    Dataset poked = base.dataset;
    poked.subjects[2] = fresh.dataset.subjects[2];
    poked.subjects[2].id = base.dataset.subjects[2].id;
    auto report_b = loso_run(poked, cfg);

    // fold 2 trains without subject 2: identical training fingerprint
    REQUIRE(report_a.folds[2].fingerprint == report_b.folds[2].fingerprint);
    // every other fold trains on subject 2 and must see the change
    for (std::size_t k : {0u, 1u, 3u})
        REQUIRE(report_a.folds[k].fingerprint != report_b.folds[k].fingerprint);
}

TEST_CASE("a subject with no usable frames is skipped with a warning") {
    auto cohort = testing::make_cohort(4, 120.0, AnnotatorNoise{0.1, 0.02, 0}, 41, false);
    // meta-tag subject 1's entire recording
    AnnotationSet meta;
    meta.annotator_id = "a1";
    meta.track = Track::Meta;
    meta.intervals = {{0.0, 120.0, "out-of-camera"}};
    cohort.dataset.subjects[1].annotations.push_back(meta);
    derive_subject(cohort.dataset.subjects[1], kDefaultWindow, kDefaultHop);

    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Svm;
    cfg.jobs = 2;
    auto report = loso_run(cohort.dataset, cfg);
    REQUIRE(report.folds[1].skipped);
    REQUIRE_FALSE(report.warnings.empty());
    CHECK(report.warnings[0].find(cohort.dataset.subjects[1].id) != std::string::npos);
    CHECK(report.tracks[kPosture]->fold_full[1].frames == 0);
    CHECK(report.tracks[kPosture]->metrics_full.frames > 0);
}

TEST_CASE("ablation rows") {
    auto cohort = testing::make_cohort(3, 120.0, AnnotatorNoise{0.1, 0.02, 0}, 51, false);
    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Svm;
    cfg.jobs = 2;
    auto rows = ablate(cohort.dataset,
                       {SensorConfig::parse("left_arm"), SensorConfig::parse("all")}, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].config == "left_arm");
    CHECK_FALSE(rows[0].baseline);
    CHECK(rows[1].config == "all");
    CHECK(rows[1].baseline);
    for (const auto& r : rows)
        for (int track : {kPosture, kMovement}) {
            CHECK(r.uar[track] >= 0.0);
            CHECK(r.uar[track] <= 1.0);
        }
    CHECK_THROWS_AS(ablate(cohort.dataset, {}, cfg), InvalidArgument);
}

TEST_CASE("CNN pipeline end to end on a small cohort") {
    auto cohort = testing::make_cohort(3, 90.0, AnnotatorNoise{0.0, 0.0, 0}, 61, false);
    PipelineConfig cfg;
    cfg.classifier = ClassifierKind::Cnn;
    cfg.cnn_epochs = 8;
    cfg.seed = 3;
    cfg.jobs = 2;
    auto report = loso_run(cohort.dataset, cfg);
    for (int track : {kPosture, kMovement}) {
        REQUIRE(report.tracks[track].has_value());
        CHECK(report.tracks[track]->metrics_all.frames > 0);
    }
    // loss traces recorded per fold and track
    for (const auto& fold : report.folds) {
        REQUIRE(fold.loss_trace[kPosture].size() == 8);
        REQUIRE(fold.loss_trace[kMovement].size() == 8);
    }
}

namespace {

// Scenario where one movement pair is signal-identical and only the
// posture context disambiguates: the conditioning input has to matter.
Scenario condition_scenario() {
    Scenario s = Scenario::standard();
    s.duration_s = 150.0;
    s.meta_events = false;
    const auto& pc = posture_classes();
    const auto& mc = movement_classes();
    MovementRecipe shared;
    for (std::size_t sensor = 0; sensor < kNumSensors; ++sensor)
        shared.components.push_back(
            OscComponent{sensor, Modality::Gyro, Axis::Z, 50.0, 2.0, 0.0});
    s.movement_recipes[mc.index_of("pivot L")] = shared;
    s.movement_recipes[mc.index_of("pivot R")] = shared;
    s.legal_pairs = {{pc.index_of("prone"), mc.index_of("macro still")},
                     {pc.index_of("prone"), mc.index_of("pivot L")},
                     {pc.index_of("crawl posture"), mc.index_of("macro still")},
                     {pc.index_of("crawl posture"), mc.index_of("pivot R")}};
    return s;
}

struct CondSample {
    SequenceSample movement;
    std::vector<int> movement_truth;  // per frame, -1 when unusable
    SequenceSample posture;
};

CondSample make_cond_sample(const Subject& subject, const SensorConfig& sensors) {
    CondSample out;
    SequenceInput input = build_sequence_input(subject.recording, subject.frames, sensors);
    const std::size_t F = subject.frames.size();
    const std::size_t Cp = posture_classes().size();
    const std::size_t Cm = movement_classes().size();

    out.posture.input = input;
    out.posture.targets.assign(F * Cp, 0.0);
    out.posture.mask.assign(F, 0);
    out.movement.input = input;
    out.movement.input.cond.assign(F * Cp, 0.0);
    out.movement.targets.assign(F * Cm, 0.0);
    out.movement.mask.assign(F, 0);
    out.movement_truth.assign(F, -1);
    for (std::size_t f = 0; f < F; ++f) {
        const auto& pp = subject.priors[kPosture][f];
        const auto& mp = subject.priors[kMovement][f];
        if (!subject.usable[f] || !pp || !mp) continue;
        out.posture.mask[f] = 1;
        for (std::size_t c = 0; c < Cp; ++c) out.posture.targets[f * Cp + c] = (*pp)[c];
        out.movement.mask[f] = 1;
        for (std::size_t c = 0; c < Cm; ++c) out.movement.targets[f * Cm + c] = (*mp)[c];
        out.movement.input.cond[f * Cp + static_cast<std::size_t>(pp->argmax())] = 1.0;
        out.movement_truth[f] = mp->argmax();
    }
    return out;
}

}  // namespace

TEST_CASE("shuffled posture conditioning degrades movement UAR") {
    const Scenario scenario = condition_scenario();
    const SensorConfig sensors;
    double mean_gap = 0.0;
    int positive = 0;
    const int seeds = 5;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        // 3 training subjects + 1 test subject, noise-free annotators
        std::vector<Subject> subjects;
        for (std::size_t i = 0; i < 4; ++i) {
            auto infant =
                generate_infant(scenario, "c" + std::to_string(i), mix_seed(seed, i));
            Subject s;
            s.id = "c" + std::to_string(i);
            s.recording = infant.recording;
            s.annotations = simulate_annotators(infant, AnnotatorNoise{0, 0, 1}, 3);
            derive_subject(s, kDefaultWindow, kDefaultHop);
            subjects.push_back(std::move(s));
        }

        std::vector<CondSample> samples;
        for (const auto& s : subjects) samples.push_back(make_cond_sample(s, sensors));

        ModelConfig pc_cfg;
        pc_cfg.num_classes = posture_classes().size();
        ModelConfig mv_cfg;
        mv_cfg.condition_dim = posture_classes().size();
        mv_cfg.num_classes = movement_classes().size();

        TrainConfig tc;
        tc.epochs = 25;
        tc.lr = 3e-3;
        tc.seed = mix_seed(seed, 99);
        Network posture_net = build_model(pc_cfg, mix_seed(seed, 5));
        Network movement_net = build_model(mv_cfg, mix_seed(seed, 6));
        std::vector<SequenceSample> ptrain, mtrain;
        for (int i = 0; i < 3; ++i) {
            ptrain.push_back(samples[i].posture);
            mtrain.push_back(samples[i].movement);
        }
        train(posture_net, ptrain, tc);
        train(movement_net, mtrain, tc);

        // test subject prediction with the true conditioning path
        auto pred = predict_recording(posture_net, movement_net, subjects[3].recording,
                                      subjects[3].frames, sensors);
        // and with the condition rows shuffled across frames
        SequenceInput shuffled = samples[3].movement.input;
        {
            std::mt19937_64 rng(mix_seed(seed, 1234));
            const std::size_t Cp = posture_classes().size();
            const std::size_t F = shuffled.frames;
            std::vector<std::size_t> perm(F);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            SequenceInput base = samples[3].movement.input;
            for (std::size_t f = 0; f < F; ++f)
                for (std::size_t c = 0; c < Cp; ++c)
                    shuffled.cond[f * Cp + c] = base.cond[perm[f] * Cp + c];
        }
        auto rows = forward_probs(movement_net, shuffled);

        std::vector<int> truth, with_true, with_shuffled;
        const std::size_t Cm = movement_classes().size();
        for (std::size_t f = 0; f < subjects[3].frames.size(); ++f) {
            if (samples[3].movement_truth[f] < 0) continue;
            truth.push_back(samples[3].movement_truth[f]);
            with_true.push_back(pred.movement[f]);
            SoftLabel row(Cm);
            for (std::size_t c = 0; c < Cm; ++c) row[c] = rows[f * Cm + c];
            with_shuffled.push_back(row.argmax());
        }
        const double uar_true = uar_against(with_true, truth, movement_classes());
        const double uar_shuffled = uar_against(with_shuffled, truth, movement_classes());
        INFO("seed " << seed << ": true " << uar_true << " shuffled " << uar_shuffled);
        mean_gap += uar_true - uar_shuffled;
        if (uar_true > uar_shuffled) ++positive;
    }
    mean_gap /= seeds;
    CHECK(mean_gap > 0.0);
    CHECK(positive >= 4);
}

TEST_CASE("posture net labels a supine-only recording supine") {
    // train on the mixed standard scenario, test on a supine-only one
    Scenario train_scenario = Scenario::standard();
    train_scenario.duration_s = 150.0;
    train_scenario.meta_events = false;

    Scenario supine_only = Scenario::standard();
    supine_only.duration_s = 60.0;
    supine_only.meta_events = false;
    {
        const auto& pc = posture_classes();
        const auto& mc = movement_classes();
        supine_only.legal_pairs = {{pc.index_of("supine"), mc.index_of("macro still")},
                                   {pc.index_of("supine"), mc.index_of("turn L")},
                                   {pc.index_of("supine"), mc.index_of("turn R")}};
    }

    const SensorConfig sensors;
    std::vector<SequenceSample> train_set;
    for (std::size_t i = 0; i < 4; ++i) {
        auto infant = generate_infant(train_scenario, "t" + std::to_string(i),
                                      mix_seed(404, i));
        Subject s;
        s.id = "t" + std::to_string(i);
        s.recording = infant.recording;
        s.annotations = simulate_annotators(infant, AnnotatorNoise{0, 0, 1}, 3);
        derive_subject(s, kDefaultWindow, kDefaultHop);
        train_set.push_back(make_cond_sample(s, sensors).posture);
    }
    ModelConfig cfg;
    cfg.num_classes = posture_classes().size();
    Network net = build_model(cfg, 505);
    TrainConfig tc;
    tc.epochs = 30;
    tc.lr = 3e-3;
    tc.seed = 506;
    train(net, train_set, tc);

    auto probe = generate_infant(supine_only, "probe", 606);
    auto frames = window_frames(probe.recording);
    auto input = build_sequence_input(probe.recording, frames, sensors);
    auto rows = forward_probs(net, input);
    const std::size_t C = posture_classes().size();
    const int supine = posture_classes().index_of("supine");
    std::size_t hits = 0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        SoftLabel row(C);
        for (std::size_t c = 0; c < C; ++c) row[c] = rows[f * C + c];
        if (row.argmax() == supine) ++hits;
    }
    INFO(hits << " of " << frames.size());
    CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(frames.size()));
}

TEST_CASE("cli integration: synth feeds eval feeds report") {
    const fs::path root = fs::temp_directory_path() / "motus-cli-test";
    fs::remove_all(root);
    fs::create_directories(root);

    // small scenario file for a fast run
    Scenario scenario = Scenario::standard();
    scenario.duration_s = 120.0;
    const fs::path scenario_path = root / "scenario.json";
    {
        std::ofstream out(scenario_path);
        out << scenario.to_json().dump(2) << "\n";
    }

    RunConfig synth_cfg;
    synth_cfg.out_dir = (root / "data").string();
    synth_cfg.scenario_file = scenario_path.string();
    synth_cfg.subjects = 3;
    synth_cfg.seed = 9;
    synth_cfg.annotator_jitter_s = 0.2;
    synth_cfg.annotator_confusion = 0.05;
    std::ostringstream err;
    REQUIRE(cmd_synth(synth_cfg, err) == 0);

    SECTION("file counts match the contract") {
        std::size_t recs = 0, anns = 0, truths = 0;
        for (const auto& e : fs::directory_iterator(root / "data")) {
            const auto name = e.path().filename().string();
            if (name.ends_with(".rec.csv")) ++recs;
            if (name.ends_with(".ann.jsonl")) ++anns;
            if (name.ends_with(".truth.jsonl")) ++truths;
        }
        CHECK(recs == 3);
        CHECK(anns == 9);
        CHECK(truths == 3);
    }

    RunConfig eval_cfg;
    eval_cfg.data_dir = (root / "data").string();
    eval_cfg.out_dir = (root / "run").string();
    eval_cfg.classifier = "svm";
    eval_cfg.seed = 21;
    eval_cfg.jobs = 2;
    REQUIRE(cmd_eval(eval_cfg, err) == 0);
    REQUIRE(fs::exists(root / "run" / "metrics.json"));
    REQUIRE(fs::exists(root / "run" / "table1.txt"));

    SECTION("identical config and seeds give a byte-identical metrics document") {
        RunConfig again = eval_cfg;
        again.out_dir = (root / "run2").string();
        REQUIRE(cmd_eval(again, err) == 0);
        auto a = slurp(root / "run" / "metrics.json");
        auto b = slurp(root / "run2" / "metrics.json");
        // the out_dir is part of the embedded config; normalize it away
        const std::string norm_a = std::regex_replace(
            a, std::regex("run\\\""), "X\"");
        const std::string norm_b = std::regex_replace(
            b, std::regex("run2\\\""), "X\"");
        REQUIRE(norm_a == norm_b);
    }

    SECTION("report renders well-formed SVG figures") {
        REQUIRE(cmd_report((root / "run").string(), err) == 0);
        for (const char* name :
             {"profiles_posture.svg", "profiles_movement.svg",
              "confusion_posture_full_agreement.svg", "fscores_posture.svg"}) {
            const fs::path p = root / "run" / name;
            REQUIRE(fs::exists(p));
            REQUIRE(xml_well_formed(slurp(p)));
        }
    }

    SECTION("config file overrides flags") {
        RunConfig cfg2 = eval_cfg;
        const fs::path cfile = root / "override.json";
        {
            std::ofstream out(cfile);
            out << R"({"seed": 99})" << "\n";
        }
        cfg2.apply_overrides_file(cfile.string());
        CHECK(cfg2.seed == 99);
        CHECK(cfg2.classifier == "svm");
    }

    SECTION("missing input gives a nonzero exit and a diagnostic") {
        RunConfig bad = eval_cfg;
        bad.data_dir = (root / "nope").string();
        std::ostringstream diag;
        CHECK(cmd_eval(bad, diag) != 0);
        CHECK_FALSE(diag.str().empty());
    }

    SECTION("corrupt bundle gives a nonzero report exit") {
        const fs::path broken = root / "broken";
        fs::create_directories(broken);
        {
            std::ofstream out(broken / "metrics.json");
            out << "{ not json";
        }
        std::ostringstream diag;
        CHECK(cmd_report(broken.string(), diag) != 0);
    }

    SECTION("report refuses an empty directory") {
        const fs::path empty = root / "empty";
        fs::create_directories(empty);
        std::ostringstream diag;
        CHECK(cmd_report(empty.string(), diag) != 0);
    }
}
