#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "motus/common.hpp"

namespace motus {

struct MannWhitneyResult {
    double u = 0.0;        // U statistic of the first sample
    double p_two_sided = 1.0;
    bool exact = false;
};

namespace detail {

// U statistic of sample x against y, ties counted half.
inline double u_statistic(const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double xi : x)
        for (double yj : y) {
            if (xi > yj)
                u += 1.0;
            else if (xi == yj)
                u += 0.5;
        }
    return u;
}

// Walks every n1-subset of the pooled values; the permutation distribution
// of U handles ties with no correction terms.
inline void enumerate_u(const std::vector<double>& pooled, std::size_t n1, double center,
                        double threshold, long long& extreme, long long& total) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> pick(n1);
    for (std::size_t i = 0; i < n1; ++i) pick[i] = i;
    while (true) {
        std::vector<char> in_x(n, 0);
        for (std::size_t i : pick) in_x[i] = 1;
        double u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_x[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (in_x[j]) continue;
                if (pooled[i] > pooled[j])
                    u += 1.0;
                else if (pooled[i] == pooled[j])
                    u += 0.5;
            }
        }
        ++total;
        if (std::fabs(u - center) >= threshold - 1e-12) ++extreme;

        // next combination
        std::size_t k = n1;
        while (k > 0 && pick[k - 1] == n - n1 + k - 1) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t i = k; i < n1; ++i) pick[i] = pick[i - 1] + 1;
    }
}

}  // namespace detail

// Two-sided Mann-Whitney U test. Exact permutation enumeration when
// min(n1, n2) <= 8; otherwise the normal approximation with tie-corrected
// variance. The exact two-sided p is the probability of a U at least as
// far from n1*n2/2 as observed.
inline MannWhitneyResult mann_whitney(const std::vector<double>& x,
                                      const std::vector<double>& y) {
    if (x.empty() || y.empty()) throw InvalidArgument("mann_whitney needs nonempty samples");
    MannWhitneyResult res;
    const double n1 = static_cast<double>(x.size());
    const double n2 = static_cast<double>(y.size());
    res.u = detail::u_statistic(x, y);
    const double center = n1 * n2 / 2.0;

    if (std::min(x.size(), y.size()) <= 8) {
        res.exact = true;
        std::vector<double> pooled(x);
        pooled.insert(pooled.end(), y.begin(), y.end());
        long long extreme = 0, total = 0;
        detail::enumerate_u(pooled, x.size(), center, std::fabs(res.u - center), extreme,
                            total);
        res.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
        return res;
    }

    // tie-corrected normal approximation
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    const double n = n1 + n2;
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (var <= 0.0) {
        res.p_two_sided = 1.0;
        return res;
    }
    const double z = (res.u - center) / std::sqrt(var);
    res.p_two_sided = std::erfc(std::fabs(z) / std::sqrt(2.0));
    return res;
}

}  // namespace motus
