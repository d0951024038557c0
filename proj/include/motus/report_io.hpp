#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "motus/ablation.hpp"
#include "motus/dataset.hpp"
#include "motus/loso.hpp"
#include "motus/svg.hpp"

namespace motus {

inline constexpr const char* kReportSchema = "motus-report-v1";

namespace detail {

inline nlohmann::ordered_json metrics_json(const Metrics& m,
                                           const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["frames"] = m.frames;
    j["acc"] = m.acc;
    j["uar"] = m.uar;
    j["uap"] = m.uap;
    j["uaf"] = m.uaf;
    nlohmann::ordered_json per;
    for (std::size_t c = 0; c < m.per_class.size(); ++c) {
        per[names[c]] = {{"recall", m.per_class[c].recall},
                         {"precision", m.per_class[c].precision},
                         {"f", m.per_class[c].f_score},
                         {"in_truth", m.per_class[c].in_truth},
                         {"in_pred", m.per_class[c].in_pred}};
    }
    j["per_class"] = per;
    return j;
}

inline nlohmann::ordered_json subset_json(const ConfusionMatrix& cm, const Metrics& pooled,
                                          const std::vector<Metrics>& per_fold,
                                          const std::vector<std::string>& names) {
    nlohmann::ordered_json j = metrics_json(pooled, names);
    j["confusion"] = cm.counts;
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& m : per_fold) folds.push_back(metrics_json(m, names));
    j["per_fold"] = folds;
    return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const EvalReport& report,
                                          const nlohmann::ordered_json& resolved_config) {
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["config"] = resolved_config;
    j["subjects"] = report.subjects;
    j["warnings"] = report.warnings;
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& f : report.folds) {
        nlohmann::ordered_json fj;
        fj["subject"] = f.subject;
        fj["skipped"] = f.skipped;
        fj["fingerprint"] = f.fingerprint;
        folds.push_back(fj);
    }
    j["folds"] = folds;

    for (int track : {kPosture, kMovement}) {
        if (!report.tracks[track]) continue;
        const auto& tr = *report.tracks[track];
        const auto& names = class_set_for(track_of(track)).classes;
        nlohmann::ordered_json tj;
        tj["chance_level"] = tr.chance_level;
        tj["subsets"] = {{"full_agreement", detail::subset_json(tr.pooled_full,
                                                                tr.metrics_full,
                                                                tr.fold_full, names)},
                         {"all_frames", detail::subset_json(tr.pooled_all, tr.metrics_all,
                                                            tr.fold_all, names)}};
        nlohmann::ordered_json kappa;
        kappa["fleiss_annotators"] = tr.fleiss_annotators;
        nlohmann::ordered_json pairwise;
        for (const auto& [name, value] : tr.cohen_vs_annotator) pairwise[name] = value;
        kappa["cohen_classifier_vs_annotator"] = pairwise;
        kappa["mean_classifier_vs_annotator"] = tr.mean_cohen;
        tj["kappa"] = kappa;
        nlohmann::ordered_json profiles = nlohmann::ordered_json::array();
        for (std::size_t s = 0; s < tr.profiles.size(); ++s) {
            nlohmann::ordered_json pj;
            pj["subject"] = report.subjects[s];
            pj["human"] = tr.profiles[s].human;
            pj["machine"] = tr.profiles[s].machine;
            profiles.push_back(pj);
        }
        tj["activity_profiles"] = profiles;
        j["tracks"][track_name(track_of(track))] = tj;
    }
    return j;
}

// The Table-1 layout: agreement subsets x ACC/UAR/UAP/UAF, one row per track.
inline void write_table1(const EvalReport& report, std::ostream& out) {
    auto pct = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * v);
        return std::string(buf);
    };
    auto block = [&](const char* title, bool full) {
        out << std::left << std::setw(24) << title << std::right << std::setw(8) << "ACC"
            << std::setw(8) << "UAR" << std::setw(8) << "UAP" << std::setw(8) << "UAF"
            << "\n";
        for (int track : {kPosture, kMovement}) {
            if (!report.tracks[track]) continue;
            const auto& tr = *report.tracks[track];
            const Metrics& m = full ? tr.metrics_full : tr.metrics_all;
            const std::string row =
                std::string(track == kPosture ? "Posture" : "Movement") + " track";
            out << std::left << std::setw(24) << row << std::right << std::setw(8)
                << pct(m.acc) << std::setw(8) << pct(m.uar) << std::setw(8) << pct(m.uap)
                << std::setw(8) << pct(m.uaf) << "\n";
        }
    };
    block("Full agreement frames", true);
    out << "\n";
    block("All frames", false);
}

inline void write_confusion_table(const ConfusionMatrix& cm, std::ostream& out) {
    const std::size_t C = cm.size();
    std::size_t width = 10;
    for (const auto& n : cm.class_names) width = std::max(width, n.size() + 2);
    out << std::left << std::setw(static_cast<int>(width)) << "truth\\pred";
    for (const auto& n : cm.class_names)
        out << std::right << std::setw(static_cast<int>(width)) << n;
    out << "\n";
    for (std::size_t i = 0; i < C; ++i) {
        long long row_total = 0;
        for (long long v : cm.counts[i]) row_total += v;
        out << std::left << std::setw(static_cast<int>(width)) << cm.class_names[i];
        for (std::size_t jj = 0; jj < C; ++jj) {
            std::ostringstream cell;
            cell << cm.counts[i][jj];
            if (row_total > 0) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), " (%.0f%%)",
                              100.0 * static_cast<double>(cm.counts[i][jj]) /
                                  static_cast<double>(row_total));
                cell << buf;
            }
            out << std::right << std::setw(static_cast<int>(width)) << cell.str();
        }
        out << "\n";
    }
}

// ---- figures ----

// Per-class F-score chart: pooled bars with per-fold whiskers and dots.
inline std::string fscore_chart(const TrackReport& tr, const std::string& title,
                                const std::vector<std::string>& names) {
    const double W = 640, H = 360, left = 60, bottom = 60, top = 40;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 20, title + ": per-class F-score", 14, "middle");
    const double plot_w = W - left - 20, plot_h = H - top - bottom;
    auto yf = [&](double v) { return top + (1.0 - v) * plot_h; };
    for (double grid : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg.line(left, yf(grid), left + plot_w, yf(grid), "#ddd");
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%.2f", grid);
        svg.text(left - 6, yf(grid) + 4, buf, 10, "end");
    }
    const std::size_t C = names.size();
    const double slot = plot_w / static_cast<double>(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double x0 = left + slot * static_cast<double>(c);
        const double bar_w = slot * 0.5;
        const double pooled = c < tr.metrics_full.per_class.size()
                                  ? tr.metrics_full.per_class[c].f_score
                                  : 0.0;
        svg.rect(x0 + slot * 0.25, yf(pooled), bar_w, plot_h - (yf(pooled) - top),
                 "#7fb3d5", "#34678a");
        double lo = 1.0, hi = 0.0;
        for (const auto& fold : tr.fold_full) {
            if (c >= fold.per_class.size() || !fold.per_class[c].in_truth) continue;
            const double v = fold.per_class[c].f_score;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            svg.circle(x0 + slot * 0.5, yf(v), 2.2, "#1a3a52");
        }
        if (hi >= lo) svg.line(x0 + slot * 0.5, yf(lo), x0 + slot * 0.5, yf(hi), "#1a3a52");
        svg.text(x0 + slot * 0.5, H - bottom + 14 + (c % 2) * 12, names[c], 9, "middle");
    }
    svg.line(left, top, left, top + plot_h, "#222");
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#222");
    return svg.finish();
}

// Activity profile chart on a log scale; paired human (cross) and machine
// (triangle) markers joined by hairlines, one pair per subject.
inline std::string profile_chart(const TrackReport& tr, const std::string& title,
                                 const std::vector<std::string>& names,
                                 const std::vector<std::string>& subjects) {
    const double W = 680, H = 400, left = 70, bottom = 70, top = 40;
    const double floor_log = -3.0;  // 0.1% floor
    SvgCanvas svg(W, H);
    svg.text(W / 2, 20, title + ": activity profiles (human x, machine triangle)", 13,
             "middle");
    const double plot_w = W - left - 20, plot_h = H - top - bottom;
    auto yf = [&](double freq) {
        const double l = freq > 0.0 ? std::max(floor_log, std::log10(freq)) : floor_log;
        return top + (l / floor_log) * plot_h;
    };
    for (double decade : {0.0, -1.0, -2.0, -3.0}) {
        const double y = top + (decade / floor_log) * plot_h;
        svg.line(left, y, left + plot_w, y, "#ddd");
        char buf[12];
        std::snprintf(buf, sizeof(buf), "%g", std::pow(10.0, decade));
        svg.text(left - 6, y + 4, buf, 10, "end");
    }
    const std::size_t C = names.size();
    const double slot = plot_w / static_cast<double>(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double xh = left + slot * (static_cast<double>(c) + 0.35);
        const double xm = left + slot * (static_cast<double>(c) + 0.65);
        for (std::size_t s = 0; s < tr.profiles.size(); ++s) {
            const auto& p = tr.profiles[s];
            if (p.human.size() != C || p.machine.size() != C) continue;
            svg.line(xh, yf(p.human[c]), xm, yf(p.machine[c]), "#bbb", 0.8);
            svg.cross(xh, yf(p.human[c]), 3.0, "#c0392b");
            svg.triangle(xm, yf(p.machine[c]), 3.2, "#2471a3");
        }
        svg.text(left + slot * (static_cast<double>(c) + 0.5),
                 H - bottom + 14 + (c % 2) * 12, names[c], 9, "middle");
    }
    svg.line(left, top, left, top + plot_h, "#222");
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#222");
    svg.text(W / 2, H - 18, std::to_string(subjects.size()) + " subjects", 10, "middle");
    return svg.finish();
}

// Sensor-ablation bar chart, grouped per configuration, one bar per track.
inline std::string ablation_chart(const std::vector<AblationRow>& rows,
                                  const std::string& title) {
    const double W = 720, H = 380, left = 60, bottom = 90, top = 40;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 20, title, 14, "middle");
    const double plot_w = W - left - 20, plot_h = H - top - bottom;
    auto yf = [&](double v) { return top + (1.0 - v) * plot_h; };
    for (double grid : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        svg.line(left, yf(grid), left + plot_w, yf(grid), "#ddd");
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%.2f", grid);
        svg.text(left - 6, yf(grid) + 4, buf, 10, "end");
    }
    const double slot = plot_w / static_cast<double>(rows.size());
    const char* colors[2] = {"#7fb3d5", "#f5b041"};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double x0 = left + slot * static_cast<double>(r);
        for (int track : {kPosture, kMovement}) {
            const double v = rows[r].uar[track];
            const double bw = slot * 0.3;
            const double x = x0 + slot * (track == kPosture ? 0.15 : 0.55);
            svg.rect(x, yf(v), bw, plot_h - (yf(v) - top), colors[track],
                     rows[r].baseline ? "#222" : "none");
        }
        svg.text(x0 + slot * 0.5, H - bottom + 14 + (r % 2) * 12, rows[r].config, 9,
                 "middle");
    }
    svg.rect(left, H - 28, 10, 10, colors[0]);
    svg.text(left + 14, H - 19, "posture UAR", 10);
    svg.rect(left + 110, H - 28, 10, 10, colors[1]);
    svg.text(left + 124, H - 19, "movement UAR", 10);
    svg.line(left, top, left, top + plot_h, "#222");
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#222");
    return svg.finish();
}

// Confusion heat table: cells shaded by class recall, counts printed.
inline std::string confusion_heatmap(const ConfusionMatrix& cm, const std::string& title) {
    const std::size_t C = cm.size();
    const double cell = 70, left = 130, top = 70;
    const double W = left + cell * static_cast<double>(C) + 20;
    const double H = top + cell * static_cast<double>(C) + 30;
    SvgCanvas svg(W, H);
    svg.text(W / 2, 22, title, 13, "middle");
    for (std::size_t i = 0; i < C; ++i) {
        long long row_total = 0;
        for (long long v : cm.counts[i]) row_total += v;
        svg.text(left - 8, top + cell * (static_cast<double>(i) + 0.55), cm.class_names[i],
                 10, "end");
        svg.text(left + cell * (static_cast<double>(i) + 0.5), top - 8, cm.class_names[i],
                 9, "middle");
        for (std::size_t jj = 0; jj < C; ++jj) {
            const double share = row_total > 0 ? static_cast<double>(cm.counts[i][jj]) /
                                                     static_cast<double>(row_total)
                                               : 0.0;
            const int shade = static_cast<int>(255.0 - 185.0 * share);
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02xff", shade, shade);
            const double x = left + cell * static_cast<double>(jj);
            const double y = top + cell * static_cast<double>(i);
            svg.rect(x, y, cell - 2, cell - 2, color, "#999");
            svg.text(x + cell / 2, y + cell / 2 - 4, std::to_string(cm.counts[i][jj]), 11,
                     "middle");
            char pct[16];
            std::snprintf(pct, sizeof(pct), "%.1f%%", 100.0 * share);
            svg.text(x + cell / 2, y + cell / 2 + 12, pct, 9, "middle", "#555");
        }
    }
    return svg.finish();
}

// ---- bundle writer ----

inline void write_report_bundle(const std::filesystem::path& dir, const EvalReport& report,
                                const nlohmann::ordered_json& resolved_config,
                                bool dump_refined = false) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "resolved_config.json");
        out << resolved_config.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "metrics.json");
        out << report_json(report, resolved_config).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "table1.txt");
        write_table1(report, out);
    }
    for (int track : {kPosture, kMovement}) {
        if (!report.tracks[track]) continue;
        const auto& tr = *report.tracks[track];
        const std::string tname = track_name(track_of(track));
        const auto& names = class_set_for(track_of(track)).classes;
        {
            std::ofstream out(dir / ("confusion_" + tname + "_full_agreement.txt"));
            write_confusion_table(tr.pooled_full, out);
        }
        {
            std::ofstream out(dir / ("confusion_" + tname + "_all_frames.txt"));
            write_confusion_table(tr.pooled_all, out);
        }
        {
            std::ofstream out(dir / ("fscores_" + tname + ".svg"));
            out << fscore_chart(tr, tname, names);
        }
    }
    for (const auto& fold : report.folds) {
        for (int track : {kPosture, kMovement}) {
            if (fold.loss_trace[track].empty()) continue;
            std::ofstream out(dir / ("loss_trace_" + fold.subject + "_" +
                                     track_name(track_of(track)) + ".txt"));
            write_loss_trace(fold.loss_trace[track], out);
        }
        if (dump_refined) {
            for (int track : {kPosture, kMovement}) {
                if (fold.refined_labels[track].empty()) continue;
                std::ofstream out(dir / ("refined_labels_fold_" + fold.subject + "_" +
                                         track_name(track_of(track)) + ".jsonl"));
                write_refined_labels(fold.training_subjects, fold.refined_labels[track],
                                     out);
            }
        }
    }
}

inline void write_ablation_bundle(const std::filesystem::path& dir,
                                  const std::vector<AblationRow>& rows,
                                  const nlohmann::ordered_json& resolved_config) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json j;
    j["schema"] = "motus-ablation-v1";
    j["config"] = resolved_config;
    nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"config", r.config},
                             {"baseline", r.baseline},
                             {"uar_posture", r.uar[kPosture]},
                             {"uar_movement", r.uar[kMovement]}});
    }
    j["rows"] = rows_json;
    std::ofstream out(dir / "ablation.json");
    out << j.dump(2) << "\n";
}

}  // namespace motus
