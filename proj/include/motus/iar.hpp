#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "motus/common.hpp"
#include "motus/soft_label.hpp"

namespace motus {

// Multiply-and-renormalize update of one frame's label. Zero-prior classes
// can never gain mass; if the product underflows the prior wins unchanged.
inline SoftLabel combine_posterior(const SoftLabel& prior, const SoftLabel& likelihood) {
    if (prior.size() != likelihood.size())
        throw InvalidArgument("combine_posterior: length mismatch");
    SoftLabel out(prior.size());
    for (std::size_t c = 0; c < prior.size(); ++c) out[c] = prior[c] * likelihood[c];
    if (!out.normalize(1e-300)) return prior;
    return out;
}

// Per-subject soft-label sequences; nullopt marks frames without priors.
using SoftSeq = std::vector<std::optional<SoftLabel>>;

// Inner-fold trainer: fit a classifier on `train_ids` using the given
// current labels, then return per-frame likelihoods for subject `target`.
// A nullopt likelihood leaves that frame's label untouched.
using IarTrainer = std::function<SoftSeq(const std::vector<std::size_t>& train_ids,
                                         const std::vector<SoftSeq>& current_labels,
                                         std::size_t target, std::uint64_t seed)>;

// Iterative annotation refinement over one training set. Every iteration
// holds out each subject in turn, trains on the remaining subjects' current
// labels, and multiplies the predicted likelihoods into the ORIGINAL vote
// priors (not the previous iterate), renormalizing. Intended for training
// folds only; held-out test subjects must never pass through here.
inline std::vector<SoftSeq> iar_refine(const std::vector<SoftSeq>& originals,
                                       const IarTrainer& trainer, int iterations,
                                       std::uint64_t seed,
                                       bool zero_iterations_identity = false) {
    if (originals.size() < 2)
        throw InvalidArgument("inner fold impossible: need at least 2 training subjects");
    if (iterations < 0) throw InvalidArgument("negative iteration count");
    if (iterations == 0) {
        if (zero_iterations_identity) return originals;
        throw InvalidArgument(
            "iterations=0 requested (set zero_iterations_identity to allow the identity)");
    }

    const std::size_t n = originals.size();
    std::vector<SoftSeq> current = originals;
    std::vector<SoftSeq> next = originals;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> train_ids;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) train_ids.push_back(k);
            const SoftSeq likelihood = trainer(
                train_ids, current, j,
                mix_seed(seed, static_cast<std::uint64_t>(it) * n + j));
            if (likelihood.size() != originals[j].size())
                throw InvalidArgument("trainer returned misaligned likelihoods");
            for (std::size_t f = 0; f < likelihood.size(); ++f) {
                if (originals[j][f] && likelihood[f])
                    next[j][f] = combine_posterior(*originals[j][f], *likelihood[f]);
                else
                    next[j][f] = originals[j][f];
            }
        }
        current = next;
    }
    return current;
}

}  // namespace motus
