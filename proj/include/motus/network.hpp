#pragma once

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motus/class_set.hpp"
#include "motus/common.hpp"
#include "motus/features.hpp"
#include "motus/nn_layers.hpp"
#include "motus/recording.hpp"
#include "motus/soft_label.hpp"
#include "motus/windowing.hpp"

namespace motus {

// Values plus an optional same-shape gradient buffer.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;

    std::size_t size() const {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               std::multiplies<>());
    }
    void alloc_grad() { grad.assign(data.size(), 0.0); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

struct Param {
    std::string name;
    Tensor tensor;
};

// Architecture of one track classifier: shared per-sensor conv paths, a
// fusion layer to frame embeddings, and a residual dilated conv stack over
// the frame sequence with a softmax head.
struct ModelConfig {
    std::size_t sensors = kNumSensors;
    std::size_t window_len = kDefaultWindow;
    std::size_t path_filters = 8;
    std::size_t path_kernel_t = 5;
    std::size_t fusion_width = 64;
    std::size_t temporal_kernel = 3;
    std::vector<std::size_t> dilations = {1, 2, 4, 8};
    std::size_t condition_dim = 0;  // 0 (posture net) or 5 (movement net)
    std::size_t num_classes = 5;

    std::size_t conv_positions() const { return window_len - path_kernel_t + 1; }
    std::size_t sensor_feature_dim() const { return 3 * path_filters; }
    std::size_t fused_input_dim() const { return sensors * sensor_feature_dim(); }
    std::size_t temporal_input_dim() const { return fusion_width + condition_dim; }

    std::size_t receptive_field() const {
        std::size_t rf = 1;
        for (std::size_t d : dilations) rf += (temporal_kernel - 1) * d;
        return rf;
    }

    void validate() const {
        if (sensors == 0 || sensors > kNumSensors)
            throw InvalidArgument("sensor count must be 1..4");
        if (path_kernel_t == 0 || path_kernel_t > window_len)
            throw InvalidArgument("path kernel exceeds window (layer sensor.path)");
        if (path_filters == 0) throw InvalidArgument("path_filters must be positive");
        if (fusion_width == 0) throw InvalidArgument("fusion width must be positive");
        if (temporal_kernel % 2 == 0)
            throw InvalidArgument("temporal kernel must be odd (layer temporal.block)");
        if (dilations.empty()) throw InvalidArgument("temporal stack needs >= 1 block");
        for (std::size_t i = 0; i < dilations.size(); ++i) {
            const std::size_t d = dilations[i];
            if (d == 0 || (d & (d - 1)) != 0)
                throw InvalidArgument("dilations must be powers of two (layer temporal.block" +
                                      std::to_string(i) + ")");
            if (i > 0 && d <= dilations[i - 1])
                throw InvalidArgument("dilations must be strictly increasing");
        }
        if (condition_dim != 0 && condition_dim != posture_classes().size())
            throw InvalidArgument("condition_dim must be 0 or the posture class count");
        if (num_classes < 2) throw InvalidArgument("need at least 2 classes");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["sensors"] = sensors;
        j["window_len"] = window_len;
        j["path_filters"] = path_filters;
        j["path_kernel_t"] = path_kernel_t;
        j["fusion_width"] = fusion_width;
        j["temporal_kernel"] = temporal_kernel;
        j["dilations"] = dilations;
        j["condition_dim"] = condition_dim;
        j["num_classes"] = num_classes;
        return j;
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.sensors = j.at("sensors").get<std::size_t>();
        c.window_len = j.at("window_len").get<std::size_t>();
        c.path_filters = j.at("path_filters").get<std::size_t>();
        c.path_kernel_t = j.at("path_kernel_t").get<std::size_t>();
        c.fusion_width = j.at("fusion_width").get<std::size_t>();
        c.temporal_kernel = j.at("temporal_kernel").get<std::size_t>();
        c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
        c.condition_dim = j.at("condition_dim").get<std::size_t>();
        c.num_classes = j.at("num_classes").get<std::size_t>();
        c.validate();
        return c;
    }
};

struct Network {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::vector<Param> params;

    Param& param(const std::string& name) {
        for (auto& p : params)
            if (p.name == name) return p;
        throw InvalidArgument("no parameter named '" + name + "'");
    }
    const Param& param(const std::string& name) const {
        return const_cast<Network*>(this)->param(name);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& p : params) n += p.tensor.size();
        return n;
    }

    void alloc_grads() {
        for (auto& p : params) p.tensor.alloc_grad();
    }
    void zero_grads() {
        for (auto& p : params) p.tensor.zero_grad();
    }
};

namespace detail {

inline void add_param(Network& net, const std::string& name,
                      std::vector<std::size_t> shape, double init_std,
                      std::mt19937_64& rng) {
    Param p;
    p.name = name;
    p.tensor.shape = std::move(shape);
    p.tensor.data.resize(p.tensor.size());
    if (init_std > 0.0) {
        std::normal_distribution<double> dist(0.0, init_std);
        for (double& v : p.tensor.data) v = dist(rng);
    }
    net.params.push_back(std::move(p));
}

}  // namespace detail

// Instantiates all parameter tensors. The sensor module is built once and
// applied to every sensor with shared weights; weights get He-style init
// from the seed, biases start at zero.
inline Network build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Network net;
    net.config = config;
    net.seed = seed;
    std::mt19937_64 rng(seed);

    const std::size_t pf = config.path_filters;
    const std::size_t kt = config.path_kernel_t;
    auto he = [](std::size_t fan_in) { return std::sqrt(2.0 / static_cast<double>(fan_in)); };

    detail::add_param(net, "sensor.accel.w", {pf, 3, kt}, he(3 * kt), rng);
    detail::add_param(net, "sensor.accel.b", {pf}, 0.0, rng);
    detail::add_param(net, "sensor.gyro.w", {pf, 3, kt}, he(3 * kt), rng);
    detail::add_param(net, "sensor.gyro.b", {pf}, 0.0, rng);
    detail::add_param(net, "sensor.shared.w", {pf, kChannelsPerSensor, kt},
                      he(kChannelsPerSensor * kt), rng);
    detail::add_param(net, "sensor.shared.b", {pf}, 0.0, rng);

    const std::size_t fw = config.fusion_width;
    detail::add_param(net, "fusion.w", {fw, config.fused_input_dim()},
                      he(config.fused_input_dim()), rng);
    detail::add_param(net, "fusion.b", {fw}, 0.0, rng);

    detail::add_param(net, "temporal.in.w", {fw, config.temporal_input_dim()},
                      he(config.temporal_input_dim()), rng);
    detail::add_param(net, "temporal.in.b", {fw}, 0.0, rng);
    for (std::size_t blk = 0; blk < config.dilations.size(); ++blk) {
        const std::string base = "temporal.block" + std::to_string(blk);
        detail::add_param(net, base + ".w", {fw, fw, config.temporal_kernel},
                          he(fw * config.temporal_kernel), rng);
        detail::add_param(net, base + ".b", {fw}, 0.0, rng);
    }
    detail::add_param(net, "head.w", {config.num_classes, fw}, he(fw), rng);
    detail::add_param(net, "head.b", {config.num_classes}, 0.0, rng);
    return net;
}

// One recording's frames as network input: x is [frame][sensor][6][window]
// and cond, when the config asks for it, is frame-major one-hot rows.
struct SequenceInput {
    std::size_t frames = 0;
    std::vector<double> x;
    std::vector<double> cond;
};

// Fixed per-modality input scales bringing both signal families to O(1);
// data-independent, so nothing can leak across folds through them.
inline constexpr double kAccelScale = 1.0 / 9.81;   // m/s^2 -> g units
inline constexpr double kGyroScale = 1.0 / 100.0;   // deg/s -> ~unit range

// Builds the input tensor from a recording; samples flagged invalid read
// as zero so masked frames cannot inject NaN into the forward pass.
inline SequenceInput build_sequence_input(const Recording& rec, const FrameIndex& frames,
                                          const SensorConfig& sensors) {
    SequenceInput in;
    in.frames = frames.size();
    const auto active = sensors.sensors();
    const std::size_t window = frames.window_len;
    in.x.assign(in.frames * active.size() * kChannelsPerSensor * window, 0.0);
    std::size_t idx = 0;
    for (std::size_t f = 0; f < in.frames; ++f) {
        const std::size_t start = frames.starts[f];
        for (std::size_t s : active) {
            for (std::size_t ch = 0; ch < kChannelsPerSensor; ++ch) {
                const std::size_t col = s * kChannelsPerSensor + ch;
                const double scale = ch < 3 ? kAccelScale : kGyroScale;
                for (std::size_t t = 0; t < window; ++t) {
                    const double v = rec.at(start + t, col);
                    in.x[idx++] =
                        rec.valid[start + t] && std::isfinite(v) ? v * scale : 0.0;
                }
            }
        }
    }
    return in;
}

// Activations stored by forward for the matching backward pass.
struct ForwardTrace {
    std::size_t frames = 0;
    std::vector<double> sensor_feat;      // [J][F] channel-major, J = fused input dim
    std::vector<std::size_t> pool_argmax; // [F][S][3*pf]
    std::vector<double> fused_pre;        // [fw][F]
    std::vector<double> tin;              // [fw+cond][F]
    std::vector<double> z0;               // [fw][F]
    std::vector<double> block_pre;        // [nb][fw][F]
    std::vector<double> block_out;        // [nb][fw][F]
    std::vector<double> logits;           // [C][F]
    std::vector<double> probs;            // [C][F]
};

namespace detail {

inline void sensor_module_forward(const Network& net, const SequenceInput& in,
                                  ForwardTrace& tr) {
    const auto& cfg = net.config;
    const std::size_t F = in.frames;
    const std::size_t S = cfg.sensors;
    const std::size_t W = cfg.window_len;
    const std::size_t pf = cfg.path_filters;
    const std::size_t kt = cfg.path_kernel_t;
    const std::size_t P = cfg.conv_positions();
    const std::size_t J = cfg.fused_input_dim();

    const double* aw = net.param("sensor.accel.w").tensor.data.data();
    const double* ab = net.param("sensor.accel.b").tensor.data.data();
    const double* gw = net.param("sensor.gyro.w").tensor.data.data();
    const double* gb = net.param("sensor.gyro.b").tensor.data.data();
    const double* sw = net.param("sensor.shared.w").tensor.data.data();
    const double* sb = net.param("sensor.shared.b").tensor.data.data();

    tr.sensor_feat.assign(J * F, 0.0);
    tr.pool_argmax.assign(F * S * 3 * pf, 0);
    std::vector<double> conv(pf * P);

    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t s = 0; s < S; ++s) {
            const double* window = in.x.data() + (f * S + s) * kChannelsPerSensor * W;
            std::size_t* amax = tr.pool_argmax.data() + (f * S + s) * 3 * pf;
            // path 0: accel rows, path 1: gyro rows, path 2: both
            for (int path = 0; path < 3; ++path) {
                const double* w = path == 0 ? aw : path == 1 ? gw : sw;
                const double* b = path == 0 ? ab : path == 1 ? gb : sb;
                const double* x = path == 1 ? window + 3 * W : window;
                const std::size_t rows = path == 2 ? kChannelsPerSensor : 3;
                conv2d_fh_forward(x, rows, W, w, b, pf, kt, conv.data());
                for (std::size_t k = 0; k < pf; ++k) {
                    std::size_t arg = 0;
                    const double v = maxpool_relu(conv.data() + k * P, P, &arg);
                    amax[path * pf + k] = arg;
                    const std::size_t j = s * 3 * pf + path * pf + k;
                    tr.sensor_feat[j * F + f] = v;
                }
            }
        }
    }
}

inline void sensor_module_backward(Network& net, const SequenceInput& in,
                                   const ForwardTrace& tr, const double* dsensor_feat) {
    const auto& cfg = net.config;
    const std::size_t F = tr.frames;
    const std::size_t S = cfg.sensors;
    const std::size_t W = cfg.window_len;
    const std::size_t pf = cfg.path_filters;
    const std::size_t kt = cfg.path_kernel_t;

    double* daw = net.param("sensor.accel.w").tensor.grad.data();
    double* dab = net.param("sensor.accel.b").tensor.grad.data();
    double* dgw = net.param("sensor.gyro.w").tensor.grad.data();
    double* dgb = net.param("sensor.gyro.b").tensor.grad.data();
    double* dsw = net.param("sensor.shared.w").tensor.grad.data();
    double* dsb = net.param("sensor.shared.b").tensor.grad.data();

    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t s = 0; s < S; ++s) {
            const double* window = in.x.data() + (f * S + s) * kChannelsPerSensor * W;
            const std::size_t* amax = tr.pool_argmax.data() + (f * S + s) * 3 * pf;
            for (int path = 0; path < 3; ++path) {
                double* dw = path == 0 ? daw : path == 1 ? dgw : dsw;
                double* db = path == 0 ? dab : path == 1 ? dgb : dsb;
                const double* x = path == 1 ? window + 3 * W : window;
                const std::size_t rows = path == 2 ? kChannelsPerSensor : 3;
                for (std::size_t k = 0; k < pf; ++k) {
                    const std::size_t j = s * 3 * pf + path * pf + k;
                    // the pooled value is relu(max); gradient flows only
                    // through an active maximum
                    if (tr.sensor_feat[j * F + f] <= 0.0) continue;
                    const double g = dsensor_feat[j * F + f];
                    if (g == 0.0) continue;
                    const std::size_t p = amax[path * pf + k];
                    db[k] += g;
                    double* dwk = dw + k * rows * kt;
                    for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t dt = 0; dt < kt; ++dt)
                            dwk[r * kt + dt] += g * x[r * W + p + dt];
                }
            }
        }
    }
}

}  // namespace detail

// Full forward pass over one recording's frame sequence. Returns nothing;
// read probabilities from the trace (channel-major) or via forward_probs.
inline void forward(const Network& net, const SequenceInput& in, ForwardTrace& tr) {
    const auto& cfg = net.config;
    const std::size_t F = in.frames;
    const std::size_t fw = cfg.fusion_width;
    const std::size_t C = cfg.num_classes;
    const std::size_t tin_dim = cfg.temporal_input_dim();
    const std::size_t nb = cfg.dilations.size();

    if (cfg.condition_dim > 0) {
        if (in.cond.size() != F * cfg.condition_dim)
            throw InvalidArgument("conditioning vector missing or mis-sized");
    } else if (!in.cond.empty()) {
        throw InvalidArgument("conditioning vector supplied to an unconditioned network");
    }
    if (in.x.size() != F * cfg.sensors * kChannelsPerSensor * cfg.window_len)
        throw InvalidArgument("sequence input does not match network config");

    tr.frames = F;
    if (F == 0) {
        tr.probs.clear();
        tr.logits.clear();
        return;
    }

    detail::sensor_module_forward(net, in, tr);

    tr.fused_pre.assign(fw * F, 0.0);
    seq_dense_forward(tr.sensor_feat.data(), cfg.fused_input_dim(),
                      net.param("fusion.w").tensor.data.data(),
                      net.param("fusion.b").tensor.data.data(), fw, F, tr.fused_pre.data());

    tr.tin.assign(tin_dim * F, 0.0);
    for (std::size_t u = 0; u < fw; ++u)
        for (std::size_t f = 0; f < F; ++f)
            tr.tin[u * F + f] = std::max(0.0, tr.fused_pre[u * F + f]);
    for (std::size_t c = 0; c < cfg.condition_dim; ++c)
        for (std::size_t f = 0; f < F; ++f)
            tr.tin[(fw + c) * F + f] = in.cond[f * cfg.condition_dim + c];

    tr.z0.assign(fw * F, 0.0);
    seq_dense_forward(tr.tin.data(), tin_dim, net.param("temporal.in.w").tensor.data.data(),
                      net.param("temporal.in.b").tensor.data.data(), fw, F, tr.z0.data());

    tr.block_pre.assign(nb * fw * F, 0.0);
    tr.block_out.assign(nb * fw * F, 0.0);
    const double* z = tr.z0.data();
    for (std::size_t blk = 0; blk < nb; ++blk) {
        const std::string base = "temporal.block" + std::to_string(blk);
        double* pre = tr.block_pre.data() + blk * fw * F;
        double* out = tr.block_out.data() + blk * fw * F;
        seq_conv1d_forward(z, fw, net.param(base + ".w").tensor.data.data(),
                           net.param(base + ".b").tensor.data.data(), fw,
                           cfg.temporal_kernel, cfg.dilations[blk], F, pre);
        for (std::size_t i = 0; i < fw * F; ++i) out[i] = z[i] + std::max(0.0, pre[i]);
        z = out;
    }

    tr.logits.assign(C * F, 0.0);
    seq_dense_forward(z, fw, net.param("head.w").tensor.data.data(),
                      net.param("head.b").tensor.data.data(), C, F, tr.logits.data());
    tr.probs.assign(C * F, 0.0);
    softmax_columns(tr.logits.data(), C, F, tr.probs.data());
}

// Frame-major probability rows (one row per frame).
inline std::vector<double> forward_probs(const Network& net, const SequenceInput& in) {
    ForwardTrace tr;
    forward(net, in, tr);
    const std::size_t C = net.config.num_classes;
    std::vector<double> out(in.frames * C);
    for (std::size_t f = 0; f < in.frames; ++f)
        for (std::size_t c = 0; c < C; ++c) out[f * C + c] = tr.probs[c * in.frames + f];
    return out;
}

// Backpropagates d(loss)/d(logits) (channel-major) into parameter grads.
inline void backward(Network& net, const SequenceInput& in, const ForwardTrace& tr,
                     const std::vector<double>& dlogits) {
    const auto& cfg = net.config;
    const std::size_t F = tr.frames;
    if (F == 0) return;
    const std::size_t fw = cfg.fusion_width;
    const std::size_t C = cfg.num_classes;
    const std::size_t nb = cfg.dilations.size();
    const std::size_t tin_dim = cfg.temporal_input_dim();

    std::vector<double> dz(fw * F, 0.0);
    const double* z_top =
        nb > 0 ? tr.block_out.data() + (nb - 1) * fw * F : tr.z0.data();
    seq_dense_backward(z_top, fw, net.param("head.w").tensor.data.data(), C, F,
                       dlogits.data(), net.param("head.w").tensor.grad.data(),
                       net.param("head.b").tensor.grad.data(), dz.data());

    std::vector<double> dpre(fw * F);
    std::vector<double> dz_prev(fw * F);
    for (std::size_t blk = nb; blk-- > 0;) {
        const std::string base = "temporal.block" + std::to_string(blk);
        const double* pre = tr.block_pre.data() + blk * fw * F;
        const double* z_in = blk == 0 ? tr.z0.data() : tr.block_out.data() + (blk - 1) * fw * F;
        for (std::size_t i = 0; i < fw * F; ++i) dpre[i] = pre[i] > 0.0 ? dz[i] : 0.0;
        std::fill(dz_prev.begin(), dz_prev.end(), 0.0);
        seq_conv1d_backward(z_in, fw, net.param(base + ".w").tensor.data.data(), fw,
                            cfg.temporal_kernel, cfg.dilations[blk], F, dpre.data(),
                            net.param(base + ".w").tensor.grad.data(),
                            net.param(base + ".b").tensor.grad.data(), dz_prev.data());
        for (std::size_t i = 0; i < fw * F; ++i) dz[i] += dz_prev[i];
    }

    std::vector<double> dtin(tin_dim * F, 0.0);
    seq_dense_backward(tr.tin.data(), tin_dim, net.param("temporal.in.w").tensor.data.data(),
                       fw, F, dz.data(), net.param("temporal.in.w").tensor.grad.data(),
                       net.param("temporal.in.b").tensor.grad.data(), dtin.data());

    // relu mask of the fusion output; condition rows carry no gradient
    std::vector<double> dfused(fw * F);
    for (std::size_t i = 0; i < fw * F; ++i)
        dfused[i] = tr.fused_pre[i] > 0.0 ? dtin[i] : 0.0;

    std::vector<double> dsf(cfg.fused_input_dim() * F, 0.0);
    seq_dense_backward(tr.sensor_feat.data(), cfg.fused_input_dim(),
                       net.param("fusion.w").tensor.data.data(), fw, F, dfused.data(),
                       net.param("fusion.w").tensor.grad.data(),
                       net.param("fusion.b").tensor.grad.data(), dsf.data());

    detail::sensor_module_backward(net, in, tr, dsf.data());
}

// ---- checkpoint (versioned text, hexfloat, round-trip exact) ----

inline void save_network(const Network& net, std::ostream& out) {
    out << "motus-net-v1\n";
    out << net.config.to_json().dump() << "\n";
    out << net.seed << " " << net.params.size() << "\n";
    for (const auto& p : net.params) {
        out << p.name;
        out << " " << p.tensor.shape.size();
        for (auto d : p.tensor.shape) out << " " << d;
        for (double v : p.tensor.data) out << " " << hexfloat(v);
        out << "\n";
    }
}

inline Network load_network(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "motus-net-v1")
        throw FormatError("not a motus-net-v1 checkpoint");
    if (!std::getline(in, line)) throw FormatError("truncated checkpoint");
    Network net;
    net.config = ModelConfig::from_json(nlohmann::json::parse(line));
    std::size_t n_params = 0;
    in >> net.seed >> n_params;
    std::getline(in, line);
    net.params.resize(n_params);
    for (auto& p : net.params) {
        if (!std::getline(in, line)) throw FormatError("truncated checkpoint");
        std::istringstream ls(line);
        std::size_t rank = 0;
        ls >> p.name >> rank;
        p.tensor.shape.resize(rank);
        for (auto& d : p.tensor.shape) ls >> d;
        if (!ls) throw FormatError("bad tensor header in checkpoint");
        p.tensor.data.resize(p.tensor.size());
        std::string tok;
        for (double& v : p.tensor.data) {
            if (!(ls >> tok)) throw FormatError("truncated tensor in checkpoint");
            v = parse_hexfloat(tok);
        }
    }
    return net;
}

}  // namespace motus
