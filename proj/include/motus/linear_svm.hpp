#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "motus/common.hpp"
#include "motus/features.hpp"

namespace motus {

struct SvmParams {
    double lambda = 1e-4;
    int epochs = 20;
};

// One binary max-margin learner, trained by epoch-shuffled subgradient
// descent on the regularized hinge objective.
struct LinearModel {
    std::vector<double> w;
    double b = 0.0;
    double lambda = 1e-4;
    int epochs = 0;
    std::uint64_t seed = 0;
    std::vector<double> objective_trace;  // objective at the averaged iterate, per epoch

    double margin(const std::vector<double>& x) const {
        double m = b;
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * x[i];
        return m;
    }

    double margin(const FeatureMatrix& X, std::size_t row) const {
        double m = b;
        const double* x = &X.values[row * X.cols];
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * x[i];
        return m;
    }
};

// Objective of the bias-augmented formulation actually optimized below:
// the intercept is a regularized coordinate on a constant input of 1.
inline double hinge_objective(const FeatureMatrix& X, const std::vector<int>& y,
                              const std::vector<double>& w, double b, double lambda) {
    double reg = b * b;
    for (double v : w) reg += v * v;
    double loss = 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) {
        double m = b;
        const double* x = &X.values[r * X.cols];
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * x[i];
        loss += std::max(0.0, 1.0 - y[r] * m);
    }
    return 0.5 * lambda * reg + loss / static_cast<double>(X.rows);
}

// Pegasos-style solver: step 1/(lambda*t), projection onto the 1/sqrt(lambda)
// ball, and a running average of the iterates as the returned model. Rows
// are put into a canonical order first so training depends only on the
// multiset of examples, not their input order.
inline LinearModel train_linear_svm(const FeatureMatrix& X, const std::vector<int>& y,
                                    double lambda, int epochs, std::uint64_t seed) {
    if (X.rows != y.size()) throw InvalidArgument("label count mismatch");
    if (X.rows < 2) throw InvalidArgument("degenerate binary task: fewer than 2 samples");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw InvalidArgument("labels must be +1/-1");
    }
    if (!has_pos || !has_neg)
        throw InvalidArgument("degenerate binary task: only one class present");
    if (!(lambda > 0.0) || epochs < 1) throw InvalidArgument("bad SVM hyperparameters");

    std::vector<std::size_t> order(X.rows);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double* xa = &X.values[a * X.cols];
        const double* xb = &X.values[b * X.cols];
        for (std::size_t i = 0; i < X.cols; ++i)
            if (xa[i] != xb[i]) return xa[i] < xb[i];
        return y[a] < y[b];
    });

    LinearModel model;
    model.lambda = lambda;
    model.epochs = epochs;
    model.seed = seed;

    std::vector<double> w(X.cols, 0.0);
    double b = 0.0;
    std::vector<double> w_avg(X.cols, 0.0);
    double b_avg = 0.0;
    const double radius2 = 1.0 / lambda;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> visit(order);
    std::size_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(visit.begin(), visit.end(), rng);
        for (std::size_t pos : visit) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double* x = &X.values[pos * X.cols];
            double m = b;
            for (std::size_t i = 0; i < X.cols; ++i) m += w[i] * x[i];
            const double scale = 1.0 - eta * lambda;
            for (double& v : w) v *= scale;
            b *= scale;
            if (y[pos] * m < 1.0) {
                for (std::size_t i = 0; i < X.cols; ++i) w[i] += eta * y[pos] * x[i];
                b += eta * y[pos];
            }
            double norm2 = b * b;
            for (double v : w) norm2 += v * v;
            if (norm2 > radius2) {
                const double shrink = std::sqrt(radius2 / norm2);
                for (double& v : w) v *= shrink;
                b *= shrink;
            }
            const double alpha = 1.0 / static_cast<double>(t);
            for (std::size_t i = 0; i < X.cols; ++i)
                w_avg[i] += alpha * (w[i] - w_avg[i]);
            b_avg += alpha * (b - b_avg);
        }
        model.objective_trace.push_back(hinge_objective(X, y, w_avg, b_avg, lambda));
    }

    model.w = std::move(w_avg);
    model.b = b_avg;
    return model;
}

}  // namespace motus
