#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "motus/class_set.hpp"
#include "motus/common.hpp"

namespace motus {

// Rows are truth, columns are prediction.
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::vector<long long>> counts;

    explicit ConfusionMatrix(const ClassSet& cs)
        : class_names(cs.classes),
          counts(cs.size(), std::vector<long long>(cs.size(), 0)) {}
    ConfusionMatrix() = default;

    std::size_t size() const { return counts.size(); }

    long long total() const {
        long long n = 0;
        for (const auto& row : counts)
            for (long long v : row) n += v;
        return n;
    }

    void add(const ConfusionMatrix& other) {
        if (other.size() != size()) throw InvalidArgument("confusion size mismatch");
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) counts[i][j] += other.counts[i][j];
    }
};

inline ConfusionMatrix confusion(const std::vector<int>& pred, const std::vector<int>& truth,
                                 const ClassSet& class_set) {
    if (pred.size() != truth.size())
        throw InvalidArgument("confusion: prediction/truth length mismatch");
    ConfusionMatrix cm(class_set);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= static_cast<int>(class_set.size()) || pred[i] < 0 ||
            pred[i] >= static_cast<int>(class_set.size()))
            throw InvalidArgument("confusion: label outside class set");
        ++cm.counts[truth[i]][pred[i]];
    }
    return cm;
}

struct ClassScore {
    double recall = 0.0;
    double precision = 0.0;
    double f_score = 0.0;
    bool in_truth = false;  // class has truth frames (recall defined)
    bool in_pred = false;   // class has predictions
};

// ACC plus unweighted averages with these 0/0 conventions: classes absent
// from the truth are excluded from every unweighted mean; an existing class
// that is never predicted scores precision 0.
struct Metrics {
    double acc = 0.0;
    double uar = 0.0;
    double uap = 0.0;
    double uaf = 0.0;
    std::vector<ClassScore> per_class;
    long long frames = 0;
};

inline Metrics summary_metrics(const ConfusionMatrix& cm) {
    const std::size_t C = cm.size();
    Metrics m;
    m.per_class.resize(C);
    long long diag = 0;
    m.frames = cm.total();
    double uar_sum = 0.0, uap_sum = 0.0, uaf_sum = 0.0;
    std::size_t uar_n = 0, uap_n = 0, uaf_n = 0;
    for (std::size_t c = 0; c < C; ++c) {
        long long tp = cm.counts[c][c];
        long long truth_n = 0, pred_n = 0;
        for (std::size_t j = 0; j < C; ++j) {
            truth_n += cm.counts[c][j];
            pred_n += cm.counts[j][c];
        }
        diag += tp;
        auto& s = m.per_class[c];
        s.in_truth = truth_n > 0;
        s.in_pred = pred_n > 0;
        if (!s.in_truth && !s.in_pred) continue;  // phantom class this fold
        s.precision = pred_n > 0 ? static_cast<double>(tp) / static_cast<double>(pred_n) : 0.0;
        uap_sum += s.precision;
        ++uap_n;
        if (s.in_truth) {
            s.recall = static_cast<double>(tp) / static_cast<double>(truth_n);
            uar_sum += s.recall;
            ++uar_n;
            s.f_score = (s.precision + s.recall) > 0.0
                            ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                            : 0.0;
            uaf_sum += s.f_score;
            ++uaf_n;
        }
    }
    m.acc = m.frames > 0 ? static_cast<double>(diag) / static_cast<double>(m.frames) : 0.0;
    m.uar = uar_n > 0 ? uar_sum / static_cast<double>(uar_n) : 0.0;
    m.uap = uap_n > 0 ? uap_sum / static_cast<double>(uap_n) : 0.0;
    m.uaf = uaf_n > 0 ? uaf_sum / static_cast<double>(uaf_n) : 0.0;
    return m;
}

// Two-rater chance-corrected agreement with marginal-product chance.
// Degenerate p_e = 1 (both raters constant on the same class) is 1.0.
inline double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw InvalidArgument("cohen_kappa needs equal nonempty sequences");
    int max_label = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        max_label = std::max({max_label, a[i], b[i]});
    const std::size_t C = static_cast<std::size_t>(max_label) + 1;
    std::vector<double> pa(C, 0.0), pb(C, 0.0);
    double po = 0.0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        if (a[i] == b[i]) po += 1.0;
    }
    po /= n;
    double pe = 0.0;
    for (std::size_t c = 0; c < C; ++c) pe += (pa[c] / n) * (pb[c] / n);
    if (1.0 - pe < 1e-12) return 1.0;
    return (po - pe) / (1.0 - pe);
}

// Scott's pi: the two-rater agreement with pooled marginals; Fleiss' kappa
// with K=2 reduces to exactly this.
inline double scott_pi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty())
        throw InvalidArgument("scott_pi needs equal nonempty sequences");
    int max_label = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        max_label = std::max({max_label, a[i], b[i]});
    const std::size_t C = static_cast<std::size_t>(max_label) + 1;
    std::vector<double> pooled(C, 0.0);
    double po = 0.0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pooled[a[i]] += 0.5;
        pooled[b[i]] += 0.5;
        if (a[i] == b[i]) po += 1.0;
    }
    po /= n;
    double pe = 0.0;
    for (std::size_t c = 0; c < C; ++c) pe += (pooled[c] / n) * (pooled[c] / n);
    if (1.0 - pe < 1e-12) return 1.0;
    return (po - pe) / (1.0 - pe);
}

// Standard Fleiss' kappa over an items x categories count table where each
// row sums to the rater count K.
inline double fleiss_kappa(const std::vector<std::vector<int>>& table, int raters) {
    if (raters < 2) throw InvalidArgument("fleiss_kappa needs at least 2 raters");
    if (table.empty()) throw InvalidArgument("fleiss_kappa needs at least one item");
    const std::size_t C = table[0].size();
    const double N = static_cast<double>(table.size());
    const double K = static_cast<double>(raters);
    std::vector<double> pj(C, 0.0);
    double pbar = 0.0;
    for (const auto& row : table) {
        if (row.size() != C) throw InvalidArgument("ragged fleiss table");
        int sum = 0;
        double agree = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            sum += row[c];
            agree += static_cast<double>(row[c]) * (row[c] - 1);
            pj[c] += row[c];
        }
        if (sum != raters) throw InvalidArgument("fleiss row does not sum to rater count");
        pbar += agree / (K * (K - 1.0));
    }
    pbar /= N;
    double pe = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const double p = pj[c] / (N * K);
        pe += p * p;
    }
    if (1.0 - pe < 1e-12) return 1.0;
    return (pbar - pe) / (1.0 - pe);
}

// Builds the Fleiss table from aligned per-rater label sequences, skipping
// items where any rater abstained.
inline std::vector<std::vector<int>> fleiss_table(
    const std::vector<std::vector<std::optional<int>>>& raters, std::size_t num_classes) {
    if (raters.empty()) throw InvalidArgument("no rater sequences");
    const std::size_t n = raters[0].size();
    std::vector<std::vector<int>> table;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> row(num_classes, 0);
        bool complete = true;
        for (const auto& r : raters) {
            if (r.size() != n) throw InvalidArgument("rater sequence length mismatch");
            if (!r[i] || *r[i] < 0 || *r[i] >= static_cast<int>(num_classes)) {
                complete = false;
                break;
            }
            ++row[*r[i]];
        }
        if (complete) table.push_back(std::move(row));
    }
    return table;
}

enum class AgreementTier { Full, Majority, None };

struct MajorityTruth {
    std::vector<std::optional<int>> labels;
    std::vector<AgreementTier> tiers;
};

// Per-frame majority vote across K annotators: a modal count of K is a
// full-agreement frame, a strict majority of 2 (for K=3) is a majority
// frame, anything else is excluded from both evaluation subsets.
inline MajorityTruth majority_truth(const std::vector<std::vector<std::optional<int>>>& raters,
                                    std::size_t num_classes) {
    if (raters.empty()) throw InvalidArgument("no rater sequences");
    const std::size_t n = raters[0].size();
    const std::size_t K = raters.size();
    for (const auto& r : raters)
        if (r.size() != n) throw InvalidArgument("rater sequence length mismatch");
    MajorityTruth out;
    out.labels.resize(n);
    out.tiers.assign(n, AgreementTier::None);
    std::vector<int> votes(num_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& r : raters)
            if (r[i] && *r[i] >= 0 && *r[i] < static_cast<int>(num_classes)) ++votes[*r[i]];
        int best = 0;
        for (std::size_t c = 1; c < num_classes; ++c)
            if (votes[c] > votes[best]) best = static_cast<int>(c);
        if (votes[best] == static_cast<int>(K)) {
            out.labels[i] = best;
            out.tiers[i] = AgreementTier::Full;
        } else if (votes[best] * 2 > static_cast<int>(K)) {
            out.labels[i] = best;
            out.tiers[i] = AgreementTier::Majority;
        }
    }
    return out;
}

// Relative class frequencies of one label sequence.
inline std::vector<double> activity_profile(const std::vector<int>& labels,
                                            std::size_t num_classes) {
    if (labels.empty()) throw InvalidArgument("activity_profile needs labels");
    std::vector<double> freq(num_classes, 0.0);
    for (int l : labels) {
        if (l < 0 || l >= static_cast<int>(num_classes))
            throw InvalidArgument("label outside class set");
        freq[l] += 1.0;
    }
    for (double& v : freq) v /= static_cast<double>(labels.size());
    return freq;
}

}  // namespace motus
