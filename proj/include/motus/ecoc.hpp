#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "motus/class_set.hpp"
#include "motus/common.hpp"
#include "motus/linear_svm.hpp"
#include "motus/soft_label.hpp"

namespace motus {

// One-vs-one coding matrix: L = C(C-1)/2 columns, the column for pair
// (i, j) carries +1 at row i and -1 at row j.
inline std::vector<std::vector<int>> ecoc_code(std::size_t num_classes) {
    if (num_classes < 2) throw InvalidArgument("ECOC needs at least 2 classes");
    const std::size_t L = num_classes * (num_classes - 1) / 2;
    std::vector<std::vector<int>> code(num_classes, std::vector<int>(L, 0));
    std::size_t col = 0;
    for (std::size_t i = 0; i < num_classes; ++i)
        for (std::size_t j = i + 1; j < num_classes; ++j) {
            code[i][col] = 1;
            code[j][col] = -1;
            ++col;
        }
    return code;
}

struct EcocModel {
    std::vector<std::vector<int>> code;  // C x L
    std::vector<LinearModel> learners;   // L entries
    std::vector<std::string> class_names;
    std::vector<char> degenerate;  // columns trained on a single-class task

    std::size_t num_classes() const { return code.size(); }
    std::size_t num_learners() const { return learners.size(); }
};

// Trains the one-vs-one ensemble on hard labels. A pair column whose
// training data lacks one of its two classes gets a neutral zero learner
// (margin 0 contributes equal hinge loss to both rows); if every column
// is degenerate the underlying single-class error propagates.
inline EcocModel ecoc_train(const FeatureMatrix& X, const std::vector<int>& labels,
                            const ClassSet& class_set, const SvmParams& params,
                            std::uint64_t seed) {
    if (X.rows != labels.size()) throw InvalidArgument("label count mismatch");
    const std::size_t C = class_set.size();
    EcocModel model;
    model.code = ecoc_code(C);
    model.class_names = class_set.classes;
    const std::size_t L = model.code[0].size();
    model.learners.resize(L);
    model.degenerate.assign(L, 0);

    std::size_t col = 0;
    std::size_t trained = 0;
    std::string first_error;
    for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t j = i + 1; j < C; ++j, ++col) {
            FeatureMatrix sub;
            sub.cols = X.cols;
            std::vector<int> y;
            for (std::size_t r = 0; r < X.rows; ++r) {
                if (labels[r] == static_cast<int>(i) || labels[r] == static_cast<int>(j)) {
                    sub.values.insert(sub.values.end(), &X.values[r * X.cols],
                                      &X.values[r * X.cols] + X.cols);
                    ++sub.rows;
                    y.push_back(labels[r] == static_cast<int>(i) ? 1 : -1);
                }
            }
            try {
                model.learners[col] =
                    train_linear_svm(sub, y, params.lambda, params.epochs,
                                     mix_seed(seed, col));
                ++trained;
            } catch (const InvalidArgument& e) {
                model.degenerate[col] = 1;
                model.learners[col].w.assign(X.cols, 0.0);
                model.learners[col].b = 0.0;
                if (first_error.empty()) first_error = e.what();
            }
        }
    }
    if (trained == 0) throw InvalidArgument(first_error.empty()
                                                ? "degenerate binary task"
                                                : first_error);
    return model;
}

// Loss-based decoding: per-class score is the sum of hinge losses of the
// class's code entries against the learner margins; the argmin wins,
// lowest index on ties. Returns (class index, score vector).
inline std::pair<int, std::vector<double>> ecoc_predict(const EcocModel& model,
                                                        const std::vector<double>& x) {
    if (!model.learners.empty() && x.size() != model.learners[0].w.size())
        throw InvalidArgument("feature dimension mismatch in ecoc_predict");
    std::vector<double> margins(model.num_learners());
    for (std::size_t l = 0; l < model.num_learners(); ++l)
        margins[l] = model.learners[l].margin(x);
    std::vector<double> scores(model.num_classes(), 0.0);
    for (std::size_t c = 0; c < model.num_classes(); ++c)
        for (std::size_t l = 0; l < model.num_learners(); ++l) {
            const int bit = model.code[c][l];
            if (bit != 0) scores[c] += std::max(0.0, 1.0 - bit * margins[l]);
        }
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c] < scores[best]) best = static_cast<int>(c);
    return {best, scores};
}

// Positive pseudo-likelihood over classes from the decoding losses,
// softmax(-score); feeds the probabilistic label-refinement path.
inline SoftLabel ecoc_likelihood(const EcocModel& model, const std::vector<double>& x) {
    auto [cls, scores] = ecoc_predict(model, x);
    (void)cls;
    double lo = scores[0];
    for (double s : scores) lo = std::min(lo, s);
    SoftLabel out(scores.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        out[c] = std::exp(-(scores[c] - lo));
        sum += out[c];
    }
    for (double& v : out.p) v /= sum;
    return out;
}

// ---- versioned text serialization (hexfloat, round-trip exact) ----

inline void save_ecoc(const EcocModel& model, std::ostream& out) {
    out << "motus-ecoc-v1\n";
    out << model.num_classes() << " " << model.num_learners() << " "
        << (model.learners.empty() ? 0 : model.learners[0].w.size()) << "\n";
    for (const auto& name : model.class_names) out << name << "\n";
    for (const auto& row : model.code) {
        for (std::size_t l = 0; l < row.size(); ++l) out << (l ? " " : "") << row[l];
        out << "\n";
    }
    for (std::size_t l = 0; l < model.num_learners(); ++l) {
        const auto& m = model.learners[l];
        out << static_cast<int>(model.degenerate[l]) << " " << hexfloat(m.lambda) << " "
            << m.epochs << " " << m.seed << " " << hexfloat(m.b);
        for (double v : m.w) out << " " << hexfloat(v);
        out << "\n";
    }
}

inline EcocModel load_ecoc(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "motus-ecoc-v1")
        throw FormatError("not a motus-ecoc-v1 file");
    std::size_t C = 0, L = 0, dim = 0;
    in >> C >> L >> dim;
    in.ignore();
    EcocModel model;
    model.class_names.resize(C);
    for (auto& name : model.class_names)
        if (!std::getline(in, name)) throw FormatError("truncated ecoc file");
    model.code.assign(C, std::vector<int>(L, 0));
    for (auto& row : model.code)
        for (auto& v : row)
            if (!(in >> v)) throw FormatError("truncated ecoc code matrix");
    in.ignore();
    model.learners.resize(L);
    model.degenerate.assign(L, 0);
    for (std::size_t l = 0; l < L; ++l) {
        if (!std::getline(in, line)) throw FormatError("truncated ecoc learners");
        std::istringstream ls(line);
        int degen = 0;
        std::string lambda_s, b_s;
        auto& m = model.learners[l];
        ls >> degen >> lambda_s >> m.epochs >> m.seed >> b_s;
        if (!ls) throw FormatError("bad learner line in ecoc file");
        model.degenerate[l] = static_cast<char>(degen);
        m.lambda = parse_hexfloat(lambda_s);
        m.b = parse_hexfloat(b_s);
        m.w.resize(dim);
        std::string tok;
        for (std::size_t i = 0; i < dim; ++i) {
            if (!(ls >> tok)) throw FormatError("truncated weight vector in ecoc file");
            m.w[i] = parse_hexfloat(tok);
        }
    }
    return model;
}

}  // namespace motus
