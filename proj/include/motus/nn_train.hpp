#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "motus/network.hpp"

namespace motus {

// One recording's worth of training data: the frame sequence, frame-major
// soft targets, and the mask of frames that contribute to the loss.
struct SequenceSample {
    SequenceInput input;
    std::vector<double> targets;
    std::vector<char> mask;
};

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 30;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t t = 0;

    explicit AdamState(const Network& net) {
        for (const auto& p : net.params) {
            m.emplace_back(p.tensor.data.size(), 0.0);
            v.emplace_back(p.tensor.data.size(), 0.0);
        }
    }

    void step(Network& net, const TrainConfig& cfg) {
        ++t;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (std::size_t p = 0; p < net.params.size(); ++p) {
            auto& tensor = net.params[p].tensor;
            for (std::size_t i = 0; i < tensor.data.size(); ++i) {
                const double g = tensor.grad[i];
                m[p][i] = cfg.beta1 * m[p][i] + (1.0 - cfg.beta1) * g;
                v[p][i] = cfg.beta2 * v[p][i] + (1.0 - cfg.beta2) * g * g;
                tensor.data[i] -=
                    cfg.lr * (m[p][i] / bc1) / (std::sqrt(v[p][i] / bc2) + cfg.eps);
            }
        }
    }
};

// Mean soft-target cross-entropy of one sample plus d(loss)/d(logits).
inline std::pair<double, std::size_t> sample_loss(const Network& net,
                                                  const SequenceSample& sample,
                                                  ForwardTrace& tr,
                                                  std::vector<double>* dlogits) {
    forward(net, sample.input, tr);
    const std::size_t C = net.config.num_classes;
    const std::size_t F = sample.input.frames;
    if (sample.targets.size() != F * C) throw InvalidArgument("target shape mismatch");
    if (!sample.mask.empty() && sample.mask.size() != F)
        throw InvalidArgument("mask length mismatch");
    std::vector<double> scratch;
    std::vector<double>& grad = dlogits ? *dlogits : scratch;
    grad.assign(C * F, 0.0);
    if (F == 0) return {0.0, 0};
    return soft_ce_loss_grad(tr.probs.data(), C, F, sample.targets.data(),
                             sample.mask.empty() ? nullptr : sample.mask.data(),
                             grad.data());
}

// Batching is by recording: every Adam step consumes one full sequence.
// The per-epoch trace entry is the frame-weighted mean training loss.
inline std::vector<double> train(Network& net, const std::vector<SequenceSample>& data,
                                 const TrainConfig& cfg) {
    if (data.empty()) throw InvalidArgument("empty dataset");
    for (const auto& s : data) {
        if (s.targets.size() != s.input.frames * net.config.num_classes)
            throw InvalidArgument("target shape mismatch");
    }
    net.alloc_grads();
    AdamState adam(net);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> trace;
    ForwardTrace tr;
    std::vector<double> dlogits;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t frame_sum = 0;
        for (std::size_t idx : order) {
            const auto& sample = data[idx];
            auto [loss, counted] = sample_loss(net, sample, tr, &dlogits);
            if (counted == 0) continue;
            net.zero_grads();
            backward(net, sample.input, tr, dlogits);
            adam.step(net, cfg);
            loss_sum += loss * static_cast<double>(counted);
            frame_sum += counted;
        }
        trace.push_back(frame_sum > 0 ? loss_sum / static_cast<double>(frame_sum) : 0.0);
    }
    return trace;
}

inline void write_loss_trace(const std::vector<double>& trace, std::ostream& out) {
    out << "epoch\tloss\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        out << e + 1 << "\t" << round_trip_decimal(trace[e]) << "\n";
}

// Compares analytic parameter gradients against central finite differences
// (step 1e-5) on a strided sample of entries from every parameter group.
// `corrupt` is a test hook that may tamper with the analytic grads.
inline double gradient_check(Network& net, const SequenceSample& microbatch,
                             std::size_t entries_per_group = 10,
                             const std::function<void(Network&)>& corrupt = nullptr) {
    net.alloc_grads();
    net.zero_grads();
    ForwardTrace tr;
    std::vector<double> dlogits;
    sample_loss(net, microbatch, tr, &dlogits);
    backward(net, microbatch.input, tr, dlogits);
    if (corrupt) corrupt(net);

    std::vector<std::vector<double>> analytic;
    for (const auto& p : net.params) analytic.push_back(p.tensor.grad);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < net.params.size(); ++p) {
        auto& data = net.params[p].tensor.data;
        const std::size_t n = data.size();
        const std::size_t count = std::min(entries_per_group, n);
        const std::size_t stride = std::max<std::size_t>(1, n / count);
        for (std::size_t i = 0; i < n; i += stride) {
            const double saved = data[i];
            data[i] = saved + h;
            const double up = sample_loss(net, microbatch, tr, nullptr).first;
            data[i] = saved - h;
            const double down = sample_loss(net, microbatch, tr, nullptr).first;
            data[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[p][i];
            const double err =
                std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-6});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

// Runs the posture net, feeds its per-frame argmax one-hot into the
// movement net's temporal input, and returns aligned label sequences.
struct RecordingPrediction {
    std::vector<int> posture;
    std::vector<int> movement;
    std::vector<SoftLabel> posture_probs;
    std::vector<SoftLabel> movement_probs;
};

inline RecordingPrediction predict_recording(const Network& posture_net,
                                             const Network& movement_net,
                                             const Recording& rec, const FrameIndex& frames,
                                             const SensorConfig& sensors) {
    if (posture_net.config.condition_dim != 0)
        throw InvalidArgument("posture network must be unconditioned");
    if (movement_net.config.condition_dim != posture_net.config.num_classes)
        throw InvalidArgument("movement network must be conditioned on posture classes");
    if (posture_net.config.window_len != frames.window_len ||
        movement_net.config.window_len != frames.window_len)
        throw InvalidArgument("window length mismatch between networks and frame index");
    if (posture_net.config.sensors != sensors.sensor_count() ||
        movement_net.config.sensors != sensors.sensor_count())
        throw InvalidArgument("sensor count mismatch between networks and sensor config");

    RecordingPrediction out;
    SequenceInput input = build_sequence_input(rec, frames, sensors);
    const std::size_t F = input.frames;
    if (F == 0) return out;

    const std::size_t Cp = posture_net.config.num_classes;
    auto posture_rows = forward_probs(posture_net, input);
    out.posture.resize(F);
    out.posture_probs.resize(F);
    SequenceInput cond_input = input;
    cond_input.cond.assign(F * Cp, 0.0);
    for (std::size_t f = 0; f < F; ++f) {
        SoftLabel row(Cp);
        for (std::size_t c = 0; c < Cp; ++c) row[c] = posture_rows[f * Cp + c];
        out.posture[f] = row.argmax();
        cond_input.cond[f * Cp + static_cast<std::size_t>(out.posture[f])] = 1.0;
        out.posture_probs[f] = std::move(row);
    }

    const std::size_t Cm = movement_net.config.num_classes;
    auto movement_rows = forward_probs(movement_net, cond_input);
    out.movement.resize(F);
    out.movement_probs.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
        SoftLabel row(Cm);
        for (std::size_t c = 0; c < Cm; ++c) row[c] = movement_rows[f * Cm + c];
        out.movement[f] = row.argmax();
        out.movement_probs[f] = std::move(row);
    }
    return out;
}

}  // namespace motus
