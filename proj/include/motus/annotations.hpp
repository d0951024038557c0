#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motus/class_set.hpp"
#include "motus/common.hpp"
#include "motus/soft_label.hpp"

namespace motus {

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string label;
};

// Interval labels from one annotator on one track. Intervals are kept
// sorted by start and must not overlap.
struct AnnotationSet {
    std::string annotator_id;
    Track track = Track::Posture;
    std::vector<Interval> intervals;

    void validate() const {
        for (const auto& iv : intervals) {
            if (!(iv.start_s < iv.end_s))
                throw FormatError("annotation interval with start >= end (annotator '" +
                                  annotator_id + "')");
            if (track == Track::Meta) {
                const auto& tags = meta_tags();
                if (std::find(tags.begin(), tags.end(), iv.label) == tags.end())
                    throw FormatError("unknown meta tag '" + iv.label + "'");
            } else if (class_set_for(track).index_of(iv.label) < 0) {
                throw FormatError("label '" + iv.label + "' not in " +
                                  track_name(track) + " class set");
            }
        }
        for (std::size_t i = 1; i < intervals.size(); ++i)
            if (intervals[i].start_s < intervals[i - 1].end_s)
                throw FormatError("overlapping intervals on (" + annotator_id + ", " +
                                  track_name(track) + ")");
    }

    void sort_and_validate() {
        std::sort(intervals.begin(), intervals.end(),
                  [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
        validate();
    }
};

// Majority-of-samples label for one frame span. Samples are placed at
// t/rate seconds; a sample belongs to an interval when its time falls in
// [start_s, end_s). Ties go to the class whose covering interval starts
// earliest; returns nullopt when no sample is annotated.
inline std::optional<std::string> frame_label(const AnnotationSet& track,
                                              double span_start_s, double span_end_s,
                                              double sample_rate) {
    if (track.track == Track::Meta) throw InvalidArgument("frame_label on meta track");
    const long long first =
        static_cast<long long>(std::ceil(span_start_s * sample_rate - 1e-9));
    const long long last =
        static_cast<long long>(std::ceil(span_end_s * sample_rate - 1e-9));

    struct Tally {
        long long count = 0;
        double earliest = 0.0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& iv : track.intervals) {
        const long long a = std::max(
            first, static_cast<long long>(std::ceil(iv.start_s * sample_rate - 1e-9)));
        const long long b = std::min(
            last, static_cast<long long>(std::ceil(iv.end_s * sample_rate - 1e-9)));
        if (b <= a) continue;
        auto [it, fresh] = tallies.try_emplace(iv.label, Tally{0, iv.start_s});
        it->second.count += b - a;
        if (!fresh) it->second.earliest = std::min(it->second.earliest, iv.start_s);
    }
    if (tallies.empty()) return std::nullopt;
    const Tally* best = nullptr;
    const std::string* best_label = nullptr;
    for (const auto& [label, tally] : tallies) {
        if (!best || tally.count > best->count ||
            (tally.count == best->count && tally.earliest < best->earliest)) {
            best = &tally;
            best_label = &label;
        }
    }
    return *best_label;
}

// Vote priors over K annotator labels: p(c) = votes(c) / #cast votes.
// All-abstain input yields nullopt (unusable frame).
inline std::optional<SoftLabel> vote_priors(
    const std::vector<std::optional<std::string>>& labels, const ClassSet& class_set) {
    SoftLabel prior(class_set.size());
    int cast = 0;
    for (const auto& label : labels) {
        if (!label) continue;
        int idx = class_set.index_of(*label);
        if (idx < 0)
            throw InvalidArgument("vote label '" + *label + "' not in class set");
        prior[static_cast<std::size_t>(idx)] += 1.0;
        ++cast;
    }
    if (cast == 0) return std::nullopt;
    for (double& v : prior.p) v /= cast;
    return prior;
}

// ---- annotation file format (line-delimited JSON records) ----

inline void write_annotations(const std::vector<AnnotationSet>& sets, std::ostream& out) {
    for (const auto& set : sets) {
        for (const auto& iv : set.intervals) {
            nlohmann::ordered_json rec;
            rec["annotator"] = set.annotator_id;
            rec["track"] = track_name(set.track);
            rec["start_s"] = iv.start_s;
            rec["end_s"] = iv.end_s;
            rec["label"] = iv.label;
            out << rec.dump() << "\n";
        }
    }
}

inline std::vector<AnnotationSet> parse_annotations(std::istream& in) {
    std::map<std::pair<std::string, int>, AnnotationSet> grouped;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("annotation line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        for (const char* key : {"annotator", "track", "start_s", "end_s", "label"})
            if (!rec.contains(key))
                throw FormatError("annotation line " + std::to_string(line_no) +
                                  ": missing field '" + key + "'");
        Track track = parse_track(rec["track"].get<std::string>());
        auto key = std::make_pair(rec["annotator"].get<std::string>(),
                                  static_cast<int>(track));
        auto& set = grouped[key];
        set.annotator_id = key.first;
        set.track = track;
        set.intervals.push_back(Interval{rec["start_s"].get<double>(),
                                         rec["end_s"].get<double>(),
                                         rec["label"].get<std::string>()});
    }
    std::vector<AnnotationSet> out;
    out.reserve(grouped.size());
    for (auto& [key, set] : grouped) {
        set.sort_and_validate();
        out.push_back(std::move(set));
    }
    return out;
}

}  // namespace motus
