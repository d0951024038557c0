#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "motus/annotations.hpp"
#include "motus/class_set.hpp"
#include "motus/common.hpp"
#include "motus/metrics.hpp"
#include "motus/recording.hpp"
#include "motus/soft_label.hpp"
#include "motus/synth.hpp"
#include "motus/windowing.hpp"

namespace motus {

// Dataset directory layout (see docs/formats.md):
//   <sid>.rec.csv          recording table
//   <sid>.<rater>.ann.jsonl  annotator's posture/movement/meta intervals
//   <sid>.truth.jsonl      generator truth (synthetic data only; never
//                          loaded by the evaluation path)

inline constexpr int kPosture = 0;
inline constexpr int kMovement = 1;

inline Track track_of(int t) { return t == kPosture ? Track::Posture : Track::Movement; }

struct Subject {
    std::string id;
    Recording recording;
    std::vector<AnnotationSet> annotations;
    std::vector<std::string> rater_ids;

    FrameIndex frames;
    std::vector<char> usable;
    // [track][rater][frame]
    std::array<std::vector<std::vector<std::optional<int>>>, 2> rater_labels;
    // [track][frame]: vote priors over cast votes
    std::array<std::vector<std::optional<SoftLabel>>, 2> priors;
    std::array<MajorityTruth, 2> majority;
};

struct Dataset {
    std::vector<Subject> subjects;
    std::size_t window_len = kDefaultWindow;
    std::size_t hop = kDefaultHop;

    const Subject& by_id(const std::string& id) const {
        for (const auto& s : subjects)
            if (s.id == id) return s;
        throw InvalidArgument("no subject '" + id + "'");
    }
};

// Builds frames, the usable mask, per-rater frame labels, vote priors and
// majority ground truth for one subject.
inline void derive_subject(Subject& subject, std::size_t window_len, std::size_t hop) {
    subject.frames = window_frames(subject.recording, window_len, hop);

    std::set<std::string> raters;
    std::vector<AnnotationSet> metas;
    for (const auto& set : subject.annotations) {
        raters.insert(set.annotator_id);
        if (set.track == Track::Meta) metas.push_back(set);
    }
    subject.rater_ids.assign(raters.begin(), raters.end());
    subject.usable = usable_mask(metas, subject.frames, subject.recording);

    const double rate = subject.recording.sample_rate;
    for (int t : {kPosture, kMovement}) {
        const auto& cs = class_set_for(track_of(t));
        auto& labels = subject.rater_labels[t];
        labels.assign(subject.rater_ids.size(), {});
        for (std::size_t r = 0; r < subject.rater_ids.size(); ++r) {
            labels[r].assign(subject.frames.size(), std::nullopt);
            const AnnotationSet* set = nullptr;
            for (const auto& a : subject.annotations)
                if (a.annotator_id == subject.rater_ids[r] && a.track == track_of(t))
                    set = &a;
            if (!set) continue;
            for (std::size_t f = 0; f < subject.frames.size(); ++f) {
                auto name = frame_label(*set, subject.frames.start_seconds(f, rate),
                                        subject.frames.end_seconds(f, rate), rate);
                if (name) labels[r][f] = cs.index_of(*name);
            }
        }
        auto& priors = subject.priors[t];
        priors.assign(subject.frames.size(), std::nullopt);
        for (std::size_t f = 0; f < subject.frames.size(); ++f) {
            std::vector<std::optional<std::string>> votes;
            for (std::size_t r = 0; r < subject.rater_ids.size(); ++r)
                votes.push_back(labels[r][f] ? std::optional<std::string>(
                                                   cs.classes[*labels[r][f]])
                                             : std::nullopt);
            priors[f] = vote_priors(votes, cs);
        }
        subject.majority[t] = majority_truth(labels, cs.size());
    }
}

inline Dataset load_dataset(const std::filesystem::path& dir,
                            std::size_t window_len = kDefaultWindow,
                            std::size_t hop = kDefaultHop) {
    if (!std::filesystem::is_directory(dir))
        throw FormatError("dataset directory not found: " + dir.string());
    Dataset ds;
    ds.window_len = window_len;
    ds.hop = hop;

    std::vector<std::string> sids;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 8 && name.substr(name.size() - 8) == ".rec.csv")
            sids.push_back(name.substr(0, name.size() - 8));
    }
    std::sort(sids.begin(), sids.end());
    if (sids.empty()) throw FormatError("no recordings (*.rec.csv) in " + dir.string());

    for (const auto& sid : sids) {
        Subject subject;
        subject.id = sid;
        {
            std::ifstream in(dir / (sid + ".rec.csv"));
            subject.recording = parse_recording(in, sid);
        }
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            const std::string prefix = sid + ".";
            const std::string suffix = ".ann.jsonl";
            if (name.rfind(prefix, 0) == 0 && name.size() > suffix.size() &&
                name.substr(name.size() - suffix.size()) == suffix) {
                std::ifstream in(entry.path());
                auto sets = parse_annotations(in);
                for (auto& s : sets) subject.annotations.push_back(std::move(s));
            }
        }
        derive_subject(subject, window_len, hop);
        ds.subjects.push_back(std::move(subject));
    }
    return ds;
}

// Writes one synthetic cohort: recordings, K noisy annotator files and the
// generator truth per subject. Emits exactly the formats load_dataset reads.
inline void write_synth_dataset(const std::filesystem::path& dir, const Scenario& scenario,
                                std::size_t subjects, std::uint64_t seed,
                                const AnnotatorNoise& noise, std::size_t raters = 3) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < subjects; ++i) {
        char sid[16];
        std::snprintf(sid, sizeof(sid), "s%02zu", i + 1);
        auto infant = generate_infant(scenario, sid, mix_seed(seed, i));
        {
            std::ofstream out(dir / (std::string(sid) + ".rec.csv"));
            serialize_recording(infant.recording, out);
        }
        AnnotatorNoise per_subject = noise;
        per_subject.seed = mix_seed(mix_seed(seed, i), 0x5eed);
        auto sets = simulate_annotators(infant, per_subject, raters);
        for (std::size_t k = 0; k < raters; ++k) {
            const std::string rater = "a" + std::to_string(k + 1);
            std::vector<AnnotationSet> mine;
            for (const auto& s : sets)
                if (s.annotator_id == rater) mine.push_back(s);
            std::ofstream out(dir / (std::string(sid) + "." + rater + ".ann.jsonl"));
            write_annotations(mine, out);
        }
        {
            std::ofstream out(dir / (std::string(sid) + ".truth.jsonl"));
            write_annotations({infant.posture_truth, infant.movement_truth, infant.meta_truth},
                              out);
        }
    }
}

// Generator truth for one subject; test/audit helper, never used by
// the evaluation path.
inline std::vector<AnnotationSet> load_truth(const std::filesystem::path& dir,
                                             const std::string& sid) {
    std::ifstream in(dir / (sid + ".truth.jsonl"));
    if (!in) throw FormatError("no truth file for subject " + sid);
    return parse_annotations(in);
}

// Refined-label audit export: one JSON record per (infant, frame).
inline void write_refined_labels(
    const std::vector<std::string>& subject_ids,
    const std::vector<std::vector<std::optional<SoftLabel>>>& labels, std::ostream& out) {
    if (subject_ids.size() != labels.size())
        throw InvalidArgument("subject/label count mismatch");
    for (std::size_t j = 0; j < labels.size(); ++j) {
        for (std::size_t f = 0; f < labels[j].size(); ++f) {
            if (!labels[j][f]) continue;
            nlohmann::ordered_json rec;
            rec["infant"] = subject_ids[j];
            rec["frame"] = f;
            rec["class_probs"] = labels[j][f]->p;
            out << rec.dump() << "\n";
        }
    }
}

}  // namespace motus
