#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "motus/common.hpp"

namespace motus {

// Per-frame probability vector over one track's classes.
struct SoftLabel {
    std::vector<double> p;

    SoftLabel() = default;
    explicit SoftLabel(std::size_t c) : p(c, 0.0) {}
    explicit SoftLabel(std::vector<double> probs) : p(std::move(probs)) {}

    std::size_t size() const { return p.size(); }
    double operator[](std::size_t i) const { return p[i]; }
    double& operator[](std::size_t i) { return p[i]; }

    double sum() const {
        double s = 0.0;
        for (double v : p) s += v;
        return s;
    }

    bool is_normalized(double tol = 1e-9) const { return std::fabs(sum() - 1.0) <= tol; }

    // Lowest index wins ties.
    int argmax() const {
        int best = 0;
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[best]) best = static_cast<int>(i);
        return best;
    }

    // Scales entries to sum 1. Returns false (and leaves the vector
    // untouched) when the total mass is below `floor`.
    bool normalize(double floor = 1e-300) {
        double s = sum();
        if (!(s > floor)) return false;
        for (double& v : p) v /= s;
        return true;
    }

    static SoftLabel one_hot(std::size_t c, std::size_t cls) {
        SoftLabel l(c);
        l.p[cls] = 1.0;
        return l;
    }
};

}  // namespace motus
