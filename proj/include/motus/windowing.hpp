#pragma once

#include <cstddef>
#include <vector>

#include "motus/annotations.hpp"
#include "motus/common.hpp"
#include "motus/recording.hpp"

namespace motus {

inline constexpr std::size_t kDefaultWindow = 120;
inline constexpr std::size_t kDefaultHop = 60;

// Sliding-window frame layout over one recording.
struct FrameIndex {
    std::size_t window_len = kDefaultWindow;
    std::size_t hop = kDefaultHop;
    std::vector<std::size_t> starts;

    std::size_t size() const { return starts.size(); }

    double start_seconds(std::size_t frame, double rate) const {
        return static_cast<double>(starts[frame]) / rate;
    }
    double end_seconds(std::size_t frame, double rate) const {
        return static_cast<double>(starts[frame] + window_len) / rate;
    }
};

inline FrameIndex window_frames(std::size_t num_samples, std::size_t window_len = kDefaultWindow,
                                std::size_t hop = kDefaultHop) {
    if (window_len == 0) throw InvalidArgument("window_len must be positive");
    if (hop == 0 || hop > window_len)
        throw InvalidArgument("hop must satisfy 0 < hop <= window_len");
    FrameIndex idx;
    idx.window_len = window_len;
    idx.hop = hop;
    if (num_samples >= window_len) {
        const std::size_t n = (num_samples - window_len) / hop + 1;
        idx.starts.reserve(n);
        for (std::size_t i = 0; i < n; ++i) idx.starts.push_back(i * hop);
    }
    return idx;
}

inline FrameIndex window_frames(const Recording& rec, std::size_t window_len = kDefaultWindow,
                                std::size_t hop = kDefaultHop) {
    return window_frames(rec.num_samples, window_len, hop);
}

// A frame is usable iff none of its samples is meta-tagged by any
// annotator and none is marked invalid in the recording.
inline std::vector<char> usable_mask(const std::vector<AnnotationSet>& meta_tracks,
                                     const FrameIndex& frames, const Recording& rec) {
    std::vector<char> excluded(rec.num_samples, 0);
    for (std::size_t t = 0; t < rec.num_samples; ++t)
        if (!rec.valid[t]) excluded[t] = 1;
    for (const auto& meta : meta_tracks) {
        if (meta.track != Track::Meta)
            throw InvalidArgument("usable_mask expects meta tracks only");
        for (const auto& iv : meta.intervals) {
            auto a = static_cast<long long>(std::ceil(iv.start_s * rec.sample_rate - 1e-9));
            auto b = static_cast<long long>(std::ceil(iv.end_s * rec.sample_rate - 1e-9));
            a = std::max<long long>(a, 0);
            b = std::min<long long>(b, static_cast<long long>(rec.num_samples));
            for (long long t = a; t < b; ++t) excluded[static_cast<std::size_t>(t)] = 1;
        }
    }
    std::vector<char> usable(frames.size(), 1);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const std::size_t start = frames.starts[f];
        for (std::size_t t = start; t < start + frames.window_len; ++t) {
            if (excluded[t]) {
                usable[f] = 0;
                break;
            }
        }
    }
    return usable;
}

}  // namespace motus
