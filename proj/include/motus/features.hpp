#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "motus/channels.hpp"
#include "motus/common.hpp"
#include "motus/fft.hpp"
#include "motus/recording.hpp"
#include "motus/windowing.hpp"

namespace motus {

inline constexpr std::size_t kFeaturesPerChannel = 14;

inline const std::array<std::string, kFeaturesPerChannel>& feature_names() {
    static const std::array<std::string, kFeaturesPerChannel> names = {
        "mean",          "variance",     "max",           "min",
        "sma",           "energy",       "iqr",           "skewness",
        "kurtosis",      "dominant_hz",  "weighted_hz",   "freq_skewness",
        "freq_kurtosis", "spectral_entropy"};
    return names;
}

// Which of the four limb sensors feed the feature vector / network input.
struct SensorConfig {
    std::array<bool, kNumSensors> enabled{true, true, true, true};

    std::size_t sensor_count() const {
        std::size_t n = 0;
        for (bool b : enabled) n += b ? 1 : 0;
        return n;
    }
    std::size_t channel_count() const { return sensor_count() * kChannelsPerSensor; }

    std::vector<std::size_t> channels() const {
        std::vector<std::size_t> out;
        for (std::size_t c = 0; c < kNumChannels; ++c)
            if (enabled[c / kChannelsPerSensor]) out.push_back(c);
        return out;
    }

    std::vector<std::size_t> sensors() const {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s < kNumSensors; ++s)
            if (enabled[s]) out.push_back(s);
        return out;
    }

    std::string to_string() const {
        if (sensor_count() == kNumSensors) return "all";
        std::string s;
        for (std::size_t i = 0; i < kNumSensors; ++i) {
            if (!enabled[i]) continue;
            if (!s.empty()) s += "+";
            s += sensor_name(static_cast<Sensor>(i));
        }
        return s;
    }

    // Parses "all" or '+'-joined sensor names, e.g. "left_arm+right_leg".
    static SensorConfig parse(const std::string& spec) {
        SensorConfig cfg;
        if (spec == "all" || spec.empty()) return cfg;
        cfg.enabled = {false, false, false, false};
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            std::size_t next = spec.find('+', pos);
            std::string name = spec.substr(pos, next == std::string::npos ? next : next - pos);
            bool found = false;
            for (std::size_t s = 0; s < kNumSensors; ++s) {
                if (name == sensor_name(static_cast<Sensor>(s))) {
                    cfg.enabled[s] = true;
                    found = true;
                }
            }
            if (!found) throw InvalidArgument("unknown sensor '" + name + "' in config spec");
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (cfg.sensor_count() == 0) throw InvalidArgument("empty sensor config");
        return cfg;
    }
};

namespace detail {

// Linear-interpolation quantile over a sorted copy (numpy default scheme).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

// The 14 per-channel features: time-domain moments plus the shape of the
// magnitude spectrum of the mean-removed window (DC excluded throughout;
// degenerate cases return 0 rather than NaN).
inline std::array<double, kFeaturesPerChannel> channel_features(
    const std::vector<double>& window, double sample_rate) {
    const std::size_t n = window.size();
    if (n == 0) throw InvalidArgument("empty window");
    for (double v : window)
        if (!std::isfinite(v)) throw InvalidArgument("non-finite sample in window");

    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0, sma = 0.0, energy = 0.0;
    double mx = window[0], mn = window[0];
    for (double v : window) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        sma += std::fabs(v);
        energy += v * v;
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    sma /= static_cast<double>(n);
    energy /= static_cast<double>(n);

    const double variance = m2;
    const double sd = std::sqrt(m2);
    const double skewness = sd > 0.0 ? m3 / (sd * sd * sd) : 0.0;
    const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;  // excess

    std::vector<double> sorted(window);
    std::sort(sorted.begin(), sorted.end());
    const double iqr =
        detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);

    // Spectrum of the mean-removed window; a constant window then has an
    // all-zero spectrum and the frequency features fall back to 0.
    std::vector<double> centered(window);
    for (double& v : centered) v -= mean;
    const std::vector<double> mags = magnitude_spectrum(centered);

    double mass = 0.0;
    double peak = 0.0;
    std::size_t peak_bin = 0;
    for (std::size_t k = 1; k < mags.size(); ++k) {
        mass += mags[k];
        if (mags[k] > peak) {
            peak = mags[k];
            peak_bin = k;
        }
    }

    double dominant_hz = 0.0, weighted_hz = 0.0, f_skew = 0.0, f_kurt = 0.0, entropy = 0.0;
    if (mass > 0.0 && peak > 0.0) {
        dominant_hz = bin_to_hz(peak_bin, sample_rate);
        double fmean = 0.0;
        for (std::size_t k = 1; k < mags.size(); ++k)
            fmean += bin_to_hz(k, sample_rate) * mags[k];
        fmean /= mass;
        weighted_hz = fmean;
        double fm2 = 0.0, fm3 = 0.0, fm4 = 0.0;
        for (std::size_t k = 1; k < mags.size(); ++k) {
            const double w = mags[k] / mass;
            const double d = bin_to_hz(k, sample_rate) - fmean;
            fm2 += w * d * d;
            fm3 += w * d * d * d;
            fm4 += w * d * d * d * d;
        }
        const double fsd = std::sqrt(fm2);
        f_skew = fsd > 0.0 ? fm3 / (fsd * fsd * fsd) : 0.0;
        f_kurt = fm2 > 0.0 ? fm4 / (fm2 * fm2) - 3.0 : 0.0;
        for (std::size_t k = 1; k < mags.size(); ++k) {
            const double w = mags[k] / mass;
            if (w > 0.0) entropy -= w * std::log(w);
        }
    }

    return {mean,     variance,    mx,     mn,     sma,    energy,  iqr,
            skewness, kurtosis,    dominant_hz,    weighted_hz,     f_skew,
            f_kurt,   entropy};
}

// Feature vector for one frame: 14 features per channel, channels in
// fixed order restricted to the sensor config. Invalid samples are not
// special-cased here; callers extract features from usable frames only.
inline std::vector<double> frame_features(const Recording& rec, std::size_t frame_start,
                                          std::size_t window_len, const SensorConfig& config) {
    if (frame_start + window_len > rec.num_samples)
        throw InvalidArgument("frame exceeds recording length");
    const auto chans = config.channels();
    std::vector<double> out;
    out.reserve(chans.size() * kFeaturesPerChannel);
    std::vector<double> window(window_len);
    for (std::size_t c : chans) {
        for (std::size_t t = 0; t < window_len; ++t) window[t] = rec.at(frame_start + t, c);
        const auto f = channel_features(window, rec.sample_rate);
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

inline std::vector<std::string> feature_column_names(const SensorConfig& config) {
    std::vector<std::string> cols;
    for (std::size_t c : config.channels())
        for (const auto& f : feature_names())
            cols.push_back(channel_name(channel_at(c)) + "." + f);
    return cols;
}

// Frames x features design matrix, row-major.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

    void append_row(const std::vector<double>& row) {
        if (cols == 0) cols = row.size();
        if (row.size() != cols) throw InvalidArgument("feature row dimension mismatch");
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }

    // Column block for the given sensor config, assuming this matrix was
    // built with all four sensors. Lets ablation reuse one extraction pass.
    FeatureMatrix select_sensors(const SensorConfig& config) const {
        if (cols != kNumChannels * kFeaturesPerChannel)
            throw InvalidArgument("select_sensors requires a full 336-column matrix");
        FeatureMatrix out;
        const auto chans = config.channels();
        out.rows = rows;
        out.cols = chans.size() * kFeaturesPerChannel;
        out.values.resize(out.rows * out.cols);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t j = 0;
            for (std::size_t c : chans)
                for (std::size_t f = 0; f < kFeaturesPerChannel; ++f)
                    out.values[r * out.cols + j++] = at(r, c * kFeaturesPerChannel + f);
        }
        return out;
    }
};

inline void write_feature_matrix(const FeatureMatrix& m,
                                 const std::vector<std::string>& column_names,
                                 std::ostream& out) {
    if (column_names.size() != m.cols)
        throw InvalidArgument("column name count does not match matrix");
    out << "frame";
    for (const auto& c : column_names) out << "," << c;
    out << "\n";
    for (std::size_t r = 0; r < m.rows; ++r) {
        out << r;
        for (std::size_t c = 0; c < m.cols; ++c) out << "," << round_trip_decimal(m.at(r, c));
        out << "\n";
    }
}

}  // namespace motus
