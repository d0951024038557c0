#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "motus/common.hpp"

namespace motus {

inline constexpr std::size_t kDftLength = 128;
inline constexpr std::size_t kSpectrumBins = kDftLength / 2 + 1;  // 65

// In-place iterative radix-2 Cooley-Tukey. Length must be a power of two.
inline void fft(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0) throw InvalidArgument("fft length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = x[i + k];
                const std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// One-sided DFT magnitudes of a real window, zero-padded to 128 points.
// Returns bins 0..64; bin k maps to k * rate / 128 Hz.
inline std::vector<double> magnitude_spectrum(const std::vector<double>& window) {
    if (window.size() > kDftLength)
        throw InvalidArgument("window longer than DFT length");
    for (double v : window)
        if (!std::isfinite(v)) throw InvalidArgument("non-finite sample in window");
    std::vector<std::complex<double>> buf(kDftLength, {0.0, 0.0});
    for (std::size_t i = 0; i < window.size(); ++i) buf[i] = {window[i], 0.0};
    fft(buf);
    std::vector<double> mags(kSpectrumBins);
    for (std::size_t k = 0; k < kSpectrumBins; ++k) mags[k] = std::abs(buf[k]);
    return mags;
}

inline double bin_to_hz(std::size_t bin, double sample_rate) {
    return static_cast<double>(bin) * sample_rate / static_cast<double>(kDftLength);
}

}  // namespace motus
