#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "motus/dataset.hpp"
#include "motus/ecoc.hpp"
#include "motus/features.hpp"
#include "motus/iar.hpp"
#include "motus/metrics.hpp"
#include "motus/network.hpp"
#include "motus/nn_train.hpp"
#include "motus/standardize.hpp"

namespace motus {

enum class ClassifierKind { Svm, Cnn };
enum class TrackSelect { Posture, Movement, Both };

inline const char* classifier_name(ClassifierKind k) {
    return k == ClassifierKind::Svm ? "svm" : "cnn";
}

struct PipelineConfig {
    ClassifierKind classifier = ClassifierKind::Svm;
    TrackSelect track = TrackSelect::Both;
    SensorConfig sensors;
    SvmParams svm;
    ModelConfig cnn_base;       // architecture; per-track fields are filled in
    double cnn_lr = 1e-3;
    int cnn_epochs = 30;
    bool iar_enabled = false;
    int iar_iterations = 5;
    std::optional<ClassifierKind> iar_trainer;  // defaults to `classifier`
    bool iar_condition_refined = true;          // movement IAR conditions on refined posture
    bool keep_refined = false;                  // retain refined labels for audit export
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 = hardware concurrency

    bool run_track(int t) const {
        if (track == TrackSelect::Both) return true;
        return (track == TrackSelect::Posture) == (t == kPosture);
    }
    ClassifierKind effective_iar_trainer() const {
        return iar_trainer.value_or(classifier);
    }
    int effective_jobs() const {
        if (jobs > 0) return jobs;
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 2;
    }
};

struct FoldResult {
    std::string subject;
    bool skipped = false;
    std::string warning;
    std::array<std::vector<std::optional<int>>, 2> predictions;  // per frame, per track
    std::array<std::vector<double>, 2> loss_trace;
    std::uint64_t fingerprint = 0;  // hash of everything the fold trained on
    // populated only with keep_refined: refined labels of the fold's
    // training subjects, for audit diffs against the vote priors
    std::vector<std::string> training_subjects;
    std::array<std::vector<SoftSeq>, 2> refined_labels;
};

struct SubjectProfile {
    std::vector<double> human;
    std::vector<double> machine;
};

struct TrackReport {
    ConfusionMatrix pooled_full;
    ConfusionMatrix pooled_all;
    Metrics metrics_full;
    Metrics metrics_all;
    std::vector<Metrics> fold_full;
    std::vector<Metrics> fold_all;
    double fleiss_annotators = 0.0;
    std::vector<std::pair<std::string, double>> cohen_vs_annotator;
    double mean_cohen = 0.0;
    std::vector<SubjectProfile> profiles;
    double chance_level = 0.0;
};

struct EvalReport {
    std::vector<std::string> subjects;
    std::vector<std::string> warnings;
    std::array<std::optional<TrackReport>, 2> tracks;
    std::vector<FoldResult> folds;
};

// Per-subject feature matrices over usable frames, full four-sensor
// columns; fold pipelines select the active sensor block.
struct PreparedFeatures {
    std::vector<FeatureMatrix> matrix;                  // [subject]
    std::vector<std::vector<std::size_t>> row_frame;    // [subject][row] -> frame
};

inline PreparedFeatures prepare_features(const Dataset& ds, int jobs) {
    PreparedFeatures out;
    out.matrix.resize(ds.subjects.size());
    out.row_frame.resize(ds.subjects.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (std::size_t i = cursor.fetch_add(1); i < ds.subjects.size();
             i = cursor.fetch_add(1)) {
            const auto& subject = ds.subjects[i];
            const SensorConfig all;
            for (std::size_t f = 0; f < subject.frames.size(); ++f) {
                if (!subject.usable[f]) continue;
                out.matrix[i].append_row(frame_features(
                    subject.recording, subject.frames.starts[f], ds.window_len, all));
                out.row_frame[i].push_back(f);
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::max(1, jobs);
    for (int j = 0; j < n; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

namespace detail {

inline void fingerprint_soft_seqs(Fnv1a& h, const std::vector<SoftSeq>& seqs) {
    for (const auto& seq : seqs)
        for (const auto& l : seq) {
            h.feed(std::uint64_t{l.has_value()});
            if (l) h.feed(l->p);
        }
}

// SVM branch helpers -------------------------------------------------------

struct SvmTrackModel {
    Standardizer standardizer;
    EcocModel model;
};

inline SvmTrackModel train_svm_track(const Dataset& ds, const PreparedFeatures& feats,
                                     const std::vector<std::size_t>& train_ids,
                                     const std::vector<SoftSeq>& labels_by_local, int track,
                                     const SensorConfig& sensors, const SvmParams& params,
                                     std::uint64_t seed) {
    FeatureMatrix X;
    std::vector<int> y;
    for (std::size_t local = 0; local < train_ids.size(); ++local) {
        const std::size_t sidx = train_ids[local];
        const auto& rows = feats.matrix[sidx];
        const auto& row_frame = feats.row_frame[sidx];
        for (std::size_t r = 0; r < rows.rows; ++r) {
            const auto& label = labels_by_local[local][row_frame[r]];
            if (!label) continue;
            std::vector<double> full(&rows.values[r * rows.cols],
                                     &rows.values[(r + 1) * rows.cols]);
            FeatureMatrix one;
            one.append_row(full);
            auto sel = one.select_sensors(sensors);
            X.append_row(std::vector<double>(sel.values.begin(), sel.values.end()));
            y.push_back(label->argmax());
        }
    }
    if (X.rows == 0) throw InvalidArgument("no labeled training frames for SVM");
    SvmTrackModel out;
    out.standardizer = Standardizer::fit(X);
    const FeatureMatrix Z = out.standardizer.apply(X);
    out.model = ecoc_train(Z, y, class_set_for(track_of(track)), params, seed);
    return out;
}

inline std::vector<std::optional<int>> predict_svm_track(const Dataset& ds,
                                                         const PreparedFeatures& feats,
                                                         std::size_t test_idx,
                                                         const SvmTrackModel& model,
                                                         const SensorConfig& sensors) {
    const auto& subject = ds.subjects[test_idx];
    std::vector<std::optional<int>> pred(subject.frames.size());
    const auto& rows = feats.matrix[test_idx];
    const auto sel = rows.rows > 0 ? rows.select_sensors(sensors) : FeatureMatrix{};
    for (std::size_t r = 0; r < sel.rows; ++r) {
        std::vector<double> x(&sel.values[r * sel.cols], &sel.values[(r + 1) * sel.cols]);
        pred[feats.row_frame[test_idx][r]] =
            ecoc_predict(model.model, model.standardizer.apply(x)).first;
    }
    return pred;
}

// CNN branch helpers -------------------------------------------------------

inline std::vector<SequenceInput> prepare_sequences(const Dataset& ds,
                                                    const SensorConfig& sensors) {
    std::vector<SequenceInput> out;
    out.reserve(ds.subjects.size());
    for (const auto& s : ds.subjects)
        out.push_back(build_sequence_input(s.recording, s.frames, sensors));
    return out;
}

inline ModelConfig track_model_config(const PipelineConfig& cfg, int track) {
    ModelConfig mc = cfg.cnn_base;
    mc.sensors = cfg.sensors.sensor_count();
    mc.condition_dim = track == kMovement ? posture_classes().size() : 0;
    mc.num_classes = class_set_for(track_of(track)).size();
    return mc;
}

// Builds one training sample: soft targets where labels exist and the
// frame is usable, a matching mask, and (movement) the posture condition.
inline SequenceSample make_sample(const Subject& subject, const SequenceInput& input,
                                  const SoftSeq& labels, int track,
                                  const SoftSeq* posture_labels) {
    SequenceSample s;
    s.input = input;
    const std::size_t C = class_set_for(track_of(track)).size();
    const std::size_t F = subject.frames.size();
    s.targets.assign(F * C, 0.0);
    s.mask.assign(F, 0);
    for (std::size_t f = 0; f < F; ++f) {
        if (!subject.usable[f] || !labels[f]) continue;
        s.mask[f] = 1;
        for (std::size_t c = 0; c < C; ++c) s.targets[f * C + c] = (*labels[f])[c];
    }
    if (track == kMovement) {
        const std::size_t Cp = posture_classes().size();
        s.input.cond.assign(F * Cp, 0.0);
        for (std::size_t f = 0; f < F; ++f) {
            if (posture_labels && (*posture_labels)[f]) {
                s.input.cond[f * Cp +
                             static_cast<std::size_t>((*posture_labels)[f]->argmax())] = 1.0;
            }
        }
    }
    return s;
}

inline Network train_cnn_track(const Dataset& ds, const std::vector<SequenceInput>& seqs,
                               const std::vector<std::size_t>& train_ids,
                               const std::vector<SoftSeq>& labels_by_local, int track,
                               const std::vector<SoftSeq>* posture_by_local,
                               const PipelineConfig& cfg, std::uint64_t seed,
                               std::vector<double>* trace_out) {
    std::vector<SequenceSample> samples;
    for (std::size_t local = 0; local < train_ids.size(); ++local) {
        const std::size_t sidx = train_ids[local];
        samples.push_back(make_sample(ds.subjects[sidx], seqs[sidx],
                                      labels_by_local[local], track,
                                      posture_by_local ? &(*posture_by_local)[local]
                                                       : nullptr));
    }
    Network net = build_model(track_model_config(cfg, track), mix_seed(seed, 0xC0DE));
    TrainConfig tc;
    tc.lr = cfg.cnn_lr;
    tc.epochs = cfg.cnn_epochs;
    tc.seed = mix_seed(seed, 0x7EA1);
    auto trace = train(net, samples, tc);
    if (trace_out) *trace_out = std::move(trace);
    return net;
}

}  // namespace detail

// IAR driver over the training subjects of one fold; local_* containers
// are indexed by position in train_ids. Returns refined labels per track
// (posture first; movement conditioning follows the config flag).
struct FoldLabels {
    std::array<std::vector<SoftSeq>, 2> labels;  // [track][local subject]
    std::array<bool, 2> refined{false, false};
};

inline FoldLabels fold_training_labels(const Dataset& ds, const PreparedFeatures* feats,
                                       const std::vector<SequenceInput>* seqs,
                                       const std::vector<std::size_t>& train_ids,
                                       const PipelineConfig& cfg, std::uint64_t fold_seed,
                                       bool need_posture, bool need_movement) {
    FoldLabels out;
    for (int track : {kPosture, kMovement}) {
        if ((track == kPosture && !need_posture) || (track == kMovement && !need_movement))
            continue;
        out.labels[track].reserve(train_ids.size());
        for (std::size_t sidx : train_ids)
            out.labels[track].push_back(ds.subjects[sidx].priors[track]);
    }
    if (!cfg.iar_enabled) return out;

    const ClassifierKind trainer_kind = cfg.effective_iar_trainer();
    auto make_trainer = [&](int track, const std::vector<SoftSeq>* posture_now) -> IarTrainer {
        if (trainer_kind == ClassifierKind::Svm) {
            return [&, track](const std::vector<std::size_t>& local_train,
                              const std::vector<SoftSeq>& current, std::size_t target,
                              std::uint64_t seed) -> SoftSeq {
                std::vector<std::size_t> global_train;
                std::vector<SoftSeq> labels;
                for (std::size_t l : local_train) {
                    global_train.push_back(train_ids[l]);
                    labels.push_back(current[l]);
                }
                auto model = detail::train_svm_track(ds, *feats, global_train, labels, track,
                                                     cfg.sensors, cfg.svm, seed);
                const std::size_t gtarget = train_ids[target];
                const auto& subject = ds.subjects[gtarget];
                SoftSeq lk(subject.frames.size());
                const auto& rows = (*feats).matrix[gtarget];
                const auto sel =
                    rows.rows > 0 ? rows.select_sensors(cfg.sensors) : FeatureMatrix{};
                for (std::size_t r = 0; r < sel.rows; ++r) {
                    std::vector<double> x(&sel.values[r * sel.cols],
                                          &sel.values[(r + 1) * sel.cols]);
                    lk[(*feats).row_frame[gtarget][r]] =
                        ecoc_likelihood(model.model, model.standardizer.apply(x));
                }
                return lk;
            };
        }
        return [&, track, posture_now](const std::vector<std::size_t>& local_train,
                                       const std::vector<SoftSeq>& current,
                                       std::size_t target, std::uint64_t seed) -> SoftSeq {
            std::vector<std::size_t> global_train;
            std::vector<SoftSeq> labels;
            std::vector<SoftSeq> posture_local;
            for (std::size_t l : local_train) {
                global_train.push_back(train_ids[l]);
                labels.push_back(current[l]);
                if (posture_now) posture_local.push_back((*posture_now)[l]);
            }
            Network net = detail::train_cnn_track(
                ds, *seqs, global_train, labels, track,
                posture_now ? &posture_local : nullptr, cfg, seed, nullptr);
            const std::size_t gtarget = train_ids[target];
            const auto& subject = ds.subjects[gtarget];
            SequenceSample probe = detail::make_sample(
                subject, (*seqs)[gtarget], SoftSeq(subject.frames.size()), track,
                posture_now ? &(*posture_now)[target] : nullptr);
            auto rows = forward_probs(net, probe.input);
            const std::size_t C = net.config.num_classes;
            SoftSeq lk(subject.frames.size());
            for (std::size_t f = 0; f < subject.frames.size(); ++f) {
                SoftLabel l(C);
                for (std::size_t c = 0; c < C; ++c) l[c] = rows[f * C + c];
                lk[f] = std::move(l);
            }
            return lk;
        };
    };

    if (need_posture || need_movement) {
        // posture refinement first; movement conditioning may use it
        auto posture_trainer = make_trainer(kPosture, nullptr);
        std::vector<SoftSeq> posture_priors;
        for (std::size_t sidx : train_ids)
            posture_priors.push_back(ds.subjects[sidx].priors[kPosture]);
        auto refined_posture = iar_refine(posture_priors, posture_trainer,
                                          cfg.iar_iterations, mix_seed(fold_seed, 0xA1));
        if (need_posture) {
            out.labels[kPosture] = refined_posture;
            out.refined[kPosture] = true;
        }
        if (need_movement) {
            const std::vector<SoftSeq>& cond_labels =
                cfg.iar_condition_refined ? refined_posture : posture_priors;
            auto movement_trainer = make_trainer(kMovement, &cond_labels);
            auto movement_priors = out.labels[kMovement];
            out.labels[kMovement] =
                iar_refine(movement_priors, movement_trainer, cfg.iar_iterations,
                           mix_seed(fold_seed, 0xB2));
            out.refined[kMovement] = true;
        }
    }
    return out;
}

// Leave-one-subject-out evaluation: per fold, refine training labels (when
// IAR is on), fit the classifier on the N-1 training subjects only, predict
// the held-out subject, and score against the original human majority
// labels on both agreement subsets.
inline EvalReport loso_run(const Dataset& ds, const PipelineConfig& cfg,
                           const PreparedFeatures* shared_features = nullptr) {
    if (ds.subjects.size() < 3)
        throw InvalidArgument("LOSO needs at least 3 subjects");
    if (cfg.iar_enabled && cfg.iar_iterations < 1)
        throw InvalidArgument("IAR enabled with iterations < 1");

    const std::size_t N = ds.subjects.size();
    const bool need_movement = cfg.run_track(kMovement);
    const bool need_posture =
        cfg.run_track(kPosture) ||
        (need_movement && cfg.classifier == ClassifierKind::Cnn);

    PreparedFeatures local_features;
    const PreparedFeatures* feats = shared_features;
    const bool need_svm = cfg.classifier == ClassifierKind::Svm ||
                          (cfg.iar_enabled &&
                           cfg.effective_iar_trainer() == ClassifierKind::Svm);
    if (need_svm && !feats) {
        local_features = prepare_features(ds, cfg.effective_jobs());
        feats = &local_features;
    }
    std::vector<SequenceInput> seqs;
    const bool need_cnn = cfg.classifier == ClassifierKind::Cnn ||
                          (cfg.iar_enabled &&
                           cfg.effective_iar_trainer() == ClassifierKind::Cnn);
    if (need_cnn) seqs = detail::prepare_sequences(ds, cfg.sensors);

    EvalReport report;
    for (const auto& s : ds.subjects) report.subjects.push_back(s.id);
    report.folds.resize(N);

    auto run_fold = [&](std::size_t k) {
        FoldResult fold;
        fold.subject = ds.subjects[k].id;
        const auto& test_subject = ds.subjects[k];

        bool any_evaluable = false;
        for (std::size_t f = 0; f < test_subject.frames.size(); ++f)
            if (test_subject.usable[f] &&
                (test_subject.majority[kPosture].labels[f] ||
                 test_subject.majority[kMovement].labels[f]))
                any_evaluable = true;
        if (!any_evaluable) {
            fold.skipped = true;
            fold.warning = "subject " + test_subject.id +
                           " has no usable annotated frames; fold skipped";
            report.folds[k] = std::move(fold);
            return;
        }

        std::vector<std::size_t> train_ids;
        for (std::size_t j = 0; j < N; ++j)
            if (j != k) train_ids.push_back(j);
        const std::uint64_t fold_seed = mix_seed(cfg.seed, k);

        FoldLabels labels = fold_training_labels(ds, feats, need_cnn ? &seqs : nullptr,
                                                 train_ids, cfg, fold_seed, need_posture,
                                                 need_movement);

        Fnv1a fp;
        for (int track : {kPosture, kMovement})
            if (!labels.labels[track].empty())
                detail::fingerprint_soft_seqs(fp, labels.labels[track]);

        if (cfg.keep_refined) {
            for (std::size_t sidx : train_ids)
                fold.training_subjects.push_back(ds.subjects[sidx].id);
            for (int track : {kPosture, kMovement})
                if (labels.refined[track]) fold.refined_labels[track] = labels.labels[track];
        }

        if (cfg.classifier == ClassifierKind::Svm) {
            for (int track : {kPosture, kMovement}) {
                if (!cfg.run_track(track)) continue;
                auto model = detail::train_svm_track(ds, *feats, train_ids,
                                                     labels.labels[track], track,
                                                     cfg.sensors, cfg.svm,
                                                     mix_seed(fold_seed, 0x50 + track));
                fp.feed(model.standardizer.mean);
                fp.feed(model.standardizer.std_dev);
                for (const auto& learner : model.model.learners) {
                    fp.feed(learner.w);
                    fp.feed(learner.b);
                }
                fold.predictions[track] =
                    detail::predict_svm_track(ds, *feats, k, model, cfg.sensors);
            }
        } else {
            Network posture_net = detail::train_cnn_track(
                ds, seqs, train_ids, labels.labels[kPosture], kPosture, nullptr, cfg,
                mix_seed(fold_seed, 0x60), &fold.loss_trace[kPosture]);
            for (const auto& p : posture_net.params) fp.feed(p.tensor.data);
            if (need_movement) {
                Network movement_net = detail::train_cnn_track(
                    ds, seqs, train_ids, labels.labels[kMovement], kMovement,
                    &labels.labels[kPosture], cfg, mix_seed(fold_seed, 0x61),
                    &fold.loss_trace[kMovement]);
                for (const auto& p : movement_net.params) fp.feed(p.tensor.data);
                auto pred = predict_recording(posture_net, movement_net,
                                              test_subject.recording, test_subject.frames,
                                              cfg.sensors);
                fold.predictions[kPosture].assign(test_subject.frames.size(), std::nullopt);
                fold.predictions[kMovement].assign(test_subject.frames.size(), std::nullopt);
                for (std::size_t f = 0; f < pred.posture.size(); ++f) {
                    fold.predictions[kPosture][f] = pred.posture[f];
                    fold.predictions[kMovement][f] = pred.movement[f];
                }
            } else {
                SequenceSample probe = detail::make_sample(
                    test_subject, seqs[k], SoftSeq(test_subject.frames.size()), kPosture,
                    nullptr);
                auto rows = forward_probs(posture_net, probe.input);
                const std::size_t C = posture_net.config.num_classes;
                fold.predictions[kPosture].assign(test_subject.frames.size(), std::nullopt);
                for (std::size_t f = 0; f < test_subject.frames.size(); ++f) {
                    SoftLabel l(C);
                    for (std::size_t c = 0; c < C; ++c) l[c] = rows[f * C + c];
                    fold.predictions[kPosture][f] = l.argmax();
                }
            }
        }
        fold.fingerprint = fp.value();
        report.folds[k] = std::move(fold);
    };

    const int jobs = std::min<int>(cfg.effective_jobs(), static_cast<int>(N));
    std::atomic<std::size_t> cursor{0};
    std::vector<std::string> thread_errors(N);
    auto worker = [&]() {
        for (std::size_t k = cursor.fetch_add(1); k < N; k = cursor.fetch_add(1)) {
            try {
                run_fold(k);
            } catch (const std::exception& e) {
                report.folds[k].subject = ds.subjects[k].id;
                report.folds[k].skipped = true;
                report.folds[k].warning =
                    "fold " + ds.subjects[k].id + " failed: " + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (const auto& fold : report.folds)
        if (!fold.warning.empty()) report.warnings.push_back(fold.warning);

    // ---- reduction in fixed subject order ----
    for (int track : {kPosture, kMovement}) {
        if (!cfg.run_track(track)) continue;
        const auto& cs = class_set_for(track_of(track));
        TrackReport tr;
        tr.pooled_full = ConfusionMatrix(cs);
        tr.pooled_all = ConfusionMatrix(cs);
        tr.chance_level = 1.0 / static_cast<double>(cs.size());

        for (std::size_t k = 0; k < N; ++k) {
            const auto& subject = ds.subjects[k];
            const auto& fold = report.folds[k];
            std::vector<int> pv_full, tv_full, pv_all, tv_all;
            if (!fold.skipped) {
                for (std::size_t f = 0; f < subject.frames.size(); ++f) {
                    if (!subject.usable[f]) continue;
                    const auto& mt = subject.majority[track];
                    if (!mt.labels[f] || f >= fold.predictions[track].size() ||
                        !fold.predictions[track][f])
                        continue;
                    const int truth = *mt.labels[f];
                    const int pred = *fold.predictions[track][f];
                    if (mt.tiers[f] == AgreementTier::Full) {
                        pv_full.push_back(pred);
                        tv_full.push_back(truth);
                    }
                    pv_all.push_back(pred);
                    tv_all.push_back(truth);
                }
            }
            auto cm_full = confusion(pv_full, tv_full, cs);
            auto cm_all = confusion(pv_all, tv_all, cs);
            tr.fold_full.push_back(summary_metrics(cm_full));
            tr.fold_all.push_back(summary_metrics(cm_all));
            tr.pooled_full.add(cm_full);
            tr.pooled_all.add(cm_all);

            SubjectProfile profile;
            if (!tv_all.empty()) {
                profile.human = activity_profile(tv_all, cs.size());
                profile.machine = activity_profile(pv_all, cs.size());
            }
            tr.profiles.push_back(std::move(profile));
        }
        tr.metrics_full = summary_metrics(tr.pooled_full);
        tr.metrics_all = summary_metrics(tr.pooled_all);

        // ---- agreement block ----
        std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> machine_vs;
        std::vector<std::vector<std::optional<int>>> all_raters;
        std::vector<std::string> rater_names;
        for (const auto& subject : ds.subjects)
            for (const auto& r : subject.rater_ids)
                if (std::find(rater_names.begin(), rater_names.end(), r) ==
                    rater_names.end())
                    rater_names.push_back(r);
        all_raters.resize(rater_names.size());

        for (std::size_t k = 0; k < N; ++k) {
            const auto& subject = ds.subjects[k];
            const auto& fold = report.folds[k];
            for (std::size_t f = 0; f < subject.frames.size(); ++f) {
                if (!subject.usable[f]) continue;
                for (std::size_t r = 0; r < rater_names.size(); ++r) {
                    std::optional<int> vote;
                    for (std::size_t rr = 0; rr < subject.rater_ids.size(); ++rr)
                        if (subject.rater_ids[rr] == rater_names[r])
                            vote = subject.rater_labels[track][rr][f];
                    all_raters[r].push_back(vote);
                    if (!fold.skipped && f < fold.predictions[track].size() &&
                        fold.predictions[track][f] && vote) {
                        machine_vs[rater_names[r]].first.push_back(
                            *fold.predictions[track][f]);
                        machine_vs[rater_names[r]].second.push_back(*vote);
                    }
                }
            }
        }
        auto table = fleiss_table(all_raters, cs.size());
        tr.fleiss_annotators =
            table.empty() ? 0.0
                          : fleiss_kappa(table, static_cast<int>(rater_names.size()));
        double cohen_sum = 0.0;
        std::size_t cohen_n = 0;
        for (const auto& name : rater_names) {
            auto it = machine_vs.find(name);
            if (it == machine_vs.end() || it->second.first.empty()) continue;
            const double kappa = cohen_kappa(it->second.first, it->second.second);
            tr.cohen_vs_annotator.emplace_back(name, kappa);
            cohen_sum += kappa;
            ++cohen_n;
        }
        tr.mean_cohen = cohen_n > 0 ? cohen_sum / static_cast<double>(cohen_n) : 0.0;

        report.tracks[track] = std::move(tr);
    }
    return report;
}

}  // namespace motus
