#pragma once

#include <cmath>
#include <vector>

#include "motus/common.hpp"
#include "motus/features.hpp"

namespace motus {

// Global mean/variance normalization fitted on training frames only.
// Zero-variance dimensions are clamped to std 1 and flagged.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;
    std::vector<char> clamped;

    static Standardizer fit(const FeatureMatrix& train) {
        if (train.rows == 0) throw InvalidArgument("cannot fit standardizer on empty matrix");
        Standardizer s;
        s.mean.assign(train.cols, 0.0);
        s.std_dev.assign(train.cols, 0.0);
        s.clamped.assign(train.cols, 0);
        for (std::size_t r = 0; r < train.rows; ++r)
            for (std::size_t c = 0; c < train.cols; ++c) s.mean[c] += train.at(r, c);
        for (double& m : s.mean) m /= static_cast<double>(train.rows);
        for (std::size_t r = 0; r < train.rows; ++r)
            for (std::size_t c = 0; c < train.cols; ++c) {
                const double d = train.at(r, c) - s.mean[c];
                s.std_dev[c] += d * d;
            }
        for (std::size_t c = 0; c < train.cols; ++c) {
            s.std_dev[c] = std::sqrt(s.std_dev[c] / static_cast<double>(train.rows));
            if (!(s.std_dev[c] > 0.0)) {
                s.std_dev[c] = 1.0;
                s.clamped[c] = 1;
            }
        }
        return s;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != mean.size()) throw InvalidArgument("standardizer dimension mismatch");
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std_dev[i];
        return out;
    }

    FeatureMatrix apply(const FeatureMatrix& m) const {
        if (m.cols != mean.size()) throw InvalidArgument("standardizer dimension mismatch");
        FeatureMatrix out = m;
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c)
                out.at(r, c) = (m.at(r, c) - mean[c]) / std_dev[c];
        return out;
    }
};

}  // namespace motus
