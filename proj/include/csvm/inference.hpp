#pragma once

#include "csvm/core.hpp"
#include "csvm/kernel.hpp"
#include "csvm/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace csvm {

/// Decision values f(x) for each row of x.
inline Vector score_batch(const CsvmModel& model, const Matrix& x) {
    if (x.cols() != model.dims()) {
        throw std::invalid_argument("score: feature dimension " + std::to_string(x.cols()) +
                                    " does not match the model's " + std::to_string(model.dims()));
    }
    if (model.coefficients.size() == 0) return Vector::Constant(x.rows(), model.intercept);
    const Matrix k = cross_kernel(model.kernel, x, model.support_features);
    return (k * model.coefficients).array() + model.intercept;
}

inline double score(const CsvmModel& model, const Vector& x) {
    return score_batch(model, x.transpose())(0);
}

/// Score cut points: t_neg bounds class -1 scores from above, t_pos bounds
/// class +1 scores from below.
struct Thresholds {
    double neg = 0.0;
    double pos = 0.0;

    static Thresholds from_margin(double eps) { return {eps, -eps}; }
};

namespace detail {

// k = ceil(x), tolerant to x landing a hair above an integer.
inline std::size_t safe_ceil(double x, std::size_t m) {
    const double c = std::ceil(x - 1e-12 * static_cast<double>(m + 1));
    return static_cast<std::size_t>(std::max(c, 0.0));
}

inline std::size_t safe_floor(double x, std::size_t m) {
    const double f = std::floor(x + 1e-12 * static_cast<double>(m + 1));
    return static_cast<std::size_t>(std::max(f, 0.0));
}

} // namespace detail

/// Type-1 order-statistic quantiles. For class -1 the ceil((1 - a) m)-th
/// smallest score, for class +1 the (floor(a m) + 1)-th smallest, so that at
/// most a fraction a of each class falls on the wrong side.
inline Thresholds robust_thresholds(const Vector& scores, const std::vector<Label>& labels,
                                    const NoncoverageTargets& targets) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) {
        throw std::invalid_argument("robust_thresholds: scores and labels differ in length");
    }
    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        (labels[static_cast<std::size_t>(i)] > 0 ? pos : neg).push_back(scores(i));
    }
    if (neg.empty() || pos.empty()) {
        throw std::invalid_argument("robust_thresholds: both classes must be present in the tuning data");
    }
    std::sort(neg.begin(), neg.end());
    std::sort(pos.begin(), pos.end());

    const std::size_t mn = neg.size();
    const std::size_t mp = pos.size();
    std::size_t kn = detail::safe_ceil((1.0 - targets.neg) * static_cast<double>(mn), mn);
    kn = std::clamp<std::size_t>(kn, 1, mn);
    std::size_t kp = detail::safe_floor(targets.pos * static_cast<double>(mp), mp) + 1;
    kp = std::clamp<std::size_t>(kp, 1, mp);
    return {neg[kn - 1], pos[kp - 1]};
}

/// s > t_neg gives {+1}, s < t_pos gives {-1}, otherwise both. When the
/// thresholds cross, scores between them go by the side of the midpoint,
/// ties to {+1}.
inline SetLabel predict_with_thresholds(double s, const Thresholds& th) {
    const bool above = s > th.neg;
    const bool below = s < th.pos;
    if (above && below) {
        return s >= 0.5 * (th.neg + th.pos) ? SetLabel::PosOnly : SetLabel::NegOnly;
    }
    if (above) return SetLabel::PosOnly;
    if (below) return SetLabel::NegOnly;
    return SetLabel::Both;
}

inline std::vector<SetLabel> predict_with_thresholds(const Vector& s, const Thresholds& th) {
    std::vector<SetLabel> out(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = predict_with_thresholds(s(i), th);
    return out;
}

inline std::vector<SetLabel> predict_by_margin(const Vector& s, double eps) {
    std::vector<SetLabel> out(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = classify_by_margin(s(i), eps);
    return out;
}

/// Non-coverage of a class with no test points is left empty.
struct EvalReport {
    std::optional<double> noncoverage_neg;
    std::optional<double> noncoverage_pos;
    double ambiguity = 0.0;
    Eigen::Index n_test = 0;
    Eigen::Index n_neg = 0;
    Eigen::Index n_pos = 0;
    bool success = false;
};

inline EvalReport evaluate(const std::vector<SetLabel>& predictions, const std::vector<Label>& labels,
                           const NoncoverageTargets& targets) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("evaluate: predictions and labels differ in length");
    }
    EvalReport r;
    r.n_test = static_cast<Eigen::Index>(labels.size());
    Eigen::Index miss_neg = 0, miss_pos = 0, both = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pos = labels[i] > 0;
        (pos ? r.n_pos : r.n_neg) += 1;
        if (!covers(predictions[i], labels[i])) (pos ? miss_pos : miss_neg) += 1;
        if (predictions[i] == SetLabel::Both) ++both;
    }
    if (r.n_neg) r.noncoverage_neg = static_cast<double>(miss_neg) / static_cast<double>(r.n_neg);
    if (r.n_pos) r.noncoverage_pos = static_cast<double>(miss_pos) / static_cast<double>(r.n_pos);
    r.ambiguity = r.n_test ? static_cast<double>(both) / static_cast<double>(r.n_test) : 0.0;
    r.success = r.noncoverage_neg && r.noncoverage_pos && *r.noncoverage_neg <= targets.neg &&
                *r.noncoverage_pos <= targets.pos;
    return r;
}

} // namespace csvm
