#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "motus/common.hpp"

namespace motus {

// Layer primitives for the sequence classifier. Sequence buffers are
// channel-major: in[c][f] is stored at in[c * frames + f], which keeps the
// innermost loops contiguous over frames. Each primitive has a forward and
// a matching backward that accumulates into caller-owned grad buffers.

// -- full-height 2-D convolution over one in-frame window ------------------
// in: rows x width (row-major), weights: filters x rows x kw, out: filters x positions
inline void conv2d_fh_forward(const double* in, std::size_t rows, std::size_t width,
                              const double* w, const double* b, std::size_t filters,
                              std::size_t kw, double* out) {
    const std::size_t positions = width - kw + 1;
    for (std::size_t k = 0; k < filters; ++k) {
        double* o = out + k * positions;
        for (std::size_t p = 0; p < positions; ++p) o[p] = b[k];
        const double* wk = w + k * rows * kw;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* x = in + r * width;
            for (std::size_t dt = 0; dt < kw; ++dt) {
                const double wv = wk[r * kw + dt];
                for (std::size_t p = 0; p < positions; ++p) o[p] += wv * x[p + dt];
            }
        }
    }
}

// Parameter gradients only; the raw signal below needs no gradient.
inline void conv2d_fh_param_grads(const double* in, std::size_t rows, std::size_t width,
                                  std::size_t filters, std::size_t kw, const double* dout,
                                  double* dw, double* db) {
    const std::size_t positions = width - kw + 1;
    for (std::size_t k = 0; k < filters; ++k) {
        const double* go = dout + k * positions;
        for (std::size_t p = 0; p < positions; ++p) db[k] += go[p];
        double* dwk = dw + k * rows * kw;
        for (std::size_t r = 0; r < rows; ++r) {
            const double* x = in + r * width;
            for (std::size_t dt = 0; dt < kw; ++dt) {
                double acc = 0.0;
                for (std::size_t p = 0; p < positions; ++p) acc += go[p] * x[p + dt];
                dwk[r * kw + dt] += acc;
            }
        }
    }
}

// -- global max pooling with rectification over conv positions -------------
// Returns relu(max) and the argmax needed to route the gradient.
inline double maxpool_relu(const double* row, std::size_t n, std::size_t* argmax) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < n; ++p)
        if (row[p] > row[best]) best = p;
    *argmax = best;
    return row[best] > 0.0 ? row[best] : 0.0;
}

// -- per-frame dense layer on channel-major sequences (a 1x1 convolution) --
inline void seq_dense_forward(const double* in, std::size_t cin, const double* w,
                              const double* b, std::size_t cout, std::size_t frames,
                              double* out) {
    for (std::size_t o = 0; o < cout; ++o) {
        double* dst = out + o * frames;
        for (std::size_t f = 0; f < frames; ++f) dst[f] = b[o];
        const double* wo = w + o * cin;
        for (std::size_t i = 0; i < cin; ++i) {
            const double wv = wo[i];
            const double* src = in + i * frames;
            for (std::size_t f = 0; f < frames; ++f) dst[f] += wv * src[f];
        }
    }
}

inline void seq_dense_backward(const double* in, std::size_t cin, const double* w,
                               std::size_t cout, std::size_t frames, const double* dout,
                               double* dw, double* db, double* din) {
    for (std::size_t o = 0; o < cout; ++o) {
        const double* go = dout + o * frames;
        double acc_b = 0.0;
        for (std::size_t f = 0; f < frames; ++f) acc_b += go[f];
        db[o] += acc_b;
        const double* wo = w + o * cin;
        double* dwo = dw + o * cin;
        for (std::size_t i = 0; i < cin; ++i) {
            const double* src = in + i * frames;
            double acc = 0.0;
            for (std::size_t f = 0; f < frames; ++f) acc += go[f] * src[f];
            dwo[i] += acc;
            if (din) {
                double* dst = din + i * frames;
                const double wv = wo[i];
                for (std::size_t f = 0; f < frames; ++f) dst[f] += wv * go[f];
            }
        }
    }
}

// -- dilated 1-D convolution over the frame axis, zero-padded edges --------
// weights: cout x cin x k, tap offsets (tap - k/2) * dilation.
inline void seq_conv1d_forward(const double* in, std::size_t cin, const double* w,
                               const double* b, std::size_t cout, std::size_t k,
                               std::size_t dilation, std::size_t frames, double* out) {
    const long long half = static_cast<long long>(k / 2);
    for (std::size_t o = 0; o < cout; ++o) {
        double* dst = out + o * frames;
        for (std::size_t f = 0; f < frames; ++f) dst[f] = b[o];
        for (std::size_t i = 0; i < cin; ++i) {
            const double* src = in + i * frames;
            for (std::size_t tap = 0; tap < k; ++tap) {
                const double wv = w[(o * cin + i) * k + tap];
                const long long off =
                    (static_cast<long long>(tap) - half) * static_cast<long long>(dilation);
                const long long lo = std::max<long long>(0, -off);
                const long long hi = std::min<long long>(static_cast<long long>(frames),
                                                         static_cast<long long>(frames) - off);
                for (long long f = lo; f < hi; ++f) dst[f] += wv * src[f + off];
            }
        }
    }
}

inline void seq_conv1d_backward(const double* in, std::size_t cin, const double* w,
                                std::size_t cout, std::size_t k, std::size_t dilation,
                                std::size_t frames, const double* dout, double* dw,
                                double* db, double* din) {
    const long long half = static_cast<long long>(k / 2);
    for (std::size_t o = 0; o < cout; ++o) {
        const double* go = dout + o * frames;
        double acc_b = 0.0;
        for (std::size_t f = 0; f < frames; ++f) acc_b += go[f];
        db[o] += acc_b;
        for (std::size_t i = 0; i < cin; ++i) {
            const double* src = in + i * frames;
            double* dsrc = din ? din + i * frames : nullptr;
            for (std::size_t tap = 0; tap < k; ++tap) {
                const long long off =
                    (static_cast<long long>(tap) - half) * static_cast<long long>(dilation);
                const long long lo = std::max<long long>(0, -off);
                const long long hi = std::min<long long>(static_cast<long long>(frames),
                                                         static_cast<long long>(frames) - off);
                double acc = 0.0;
                for (long long f = lo; f < hi; ++f) acc += go[f] * src[f + off];
                dw[(o * cin + i) * k + tap] += acc;
                if (dsrc) {
                    const double wv = w[(o * cin + i) * k + tap];
                    for (long long f = lo; f < hi; ++f) dsrc[f + off] += wv * go[f];
                }
            }
        }
    }
}

// -- softmax rows + cross-entropy against soft targets ---------------------
// logits/probs channel-major [C][F]; targets frame-major [F][C].
inline void softmax_columns(const double* logits, std::size_t classes, std::size_t frames,
                            double* probs) {
    for (std::size_t f = 0; f < frames; ++f) {
        double mx = logits[f];
        for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, logits[c * frames + f]);
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double e = std::exp(logits[c * frames + f] - mx);
            probs[c * frames + f] = e;
            sum += e;
        }
        for (std::size_t c = 0; c < classes; ++c) probs[c * frames + f] /= sum;
    }
}

// Mean cross-entropy over masked frames; writes d(loss)/d(logits) (already
// divided by the masked count) and returns (loss, masked_count).
inline std::pair<double, std::size_t> soft_ce_loss_grad(
    const double* probs, std::size_t classes, std::size_t frames, const double* targets,
    const char* mask, double* dlogits) {
    std::size_t counted = 0;
    for (std::size_t f = 0; f < frames; ++f)
        if (!mask || mask[f]) ++counted;
    std::fill(dlogits, dlogits + classes * frames, 0.0);
    if (counted == 0) return {0.0, 0};
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(counted);
    for (std::size_t f = 0; f < frames; ++f) {
        if (mask && !mask[f]) continue;
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = probs[c * frames + f];
            const double q = targets[f * classes + c];
            if (q > 0.0) loss -= q * std::log(std::max(p, 1e-300));
            dlogits[c * frames + f] = (p - q) * inv;
        }
    }
    return {loss * inv, counted};
}

}  // namespace motus
