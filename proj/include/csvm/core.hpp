#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Label = std::int8_t;

/// Raised when a numerical routine meets data it cannot handle (e.g. an
/// indefinite Gram matrix).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a fit cannot produce a model.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Set-valued prediction: {-1}, {+1} or the ambiguous {-1,+1}.
enum class SetLabel : std::uint8_t { NegOnly, PosOnly, Both };

inline std::string_view to_string(SetLabel s) {
    switch (s) {
    case SetLabel::NegOnly: return "{-1}";
    case SetLabel::PosOnly: return "{+1}";
    case SetLabel::Both: return "{-1,+1}";
    }
    return "?";
}

inline bool covers(SetLabel s, Label y) {
    return s == SetLabel::Both || (y > 0 ? s == SetLabel::PosOnly : s == SetLabel::NegOnly);
}

/// Per-class non-coverage rates. Values in (0, 1]; 1 switches the class
/// constraint off in the calibration step.
struct NoncoverageTargets {
    double neg = 0.05;
    double pos = 0.05;

    NoncoverageTargets() = default;
    NoncoverageTargets(double alpha_neg, double alpha_pos) : neg(alpha_neg), pos(alpha_pos) {
        auto ok = [](double a) { return std::isfinite(a) && a > 0.0 && a <= 1.0; };
        if (!ok(neg) || !ok(pos)) {
            throw std::invalid_argument("non-coverage targets must lie in (0, 1]");
        }
    }

    [[nodiscard]] double of(Label y) const { return y > 0 ? pos : neg; }
};

/// Constants entering the finite-sample bounds.
struct TheoryParams {
    double rkhs_bound = 1.0;     // s
    double kernel_sup = 1.0;     // r = sup K(x, x)
    double margin_gap = 0.1;     // c
    double confidence = 0.05;    // zeta

    TheoryParams() = default;
    TheoryParams(double s, double r, double c, double zeta)
        : rkhs_bound(s), kernel_sup(r), margin_gap(c), confidence(zeta) {
        if (!(s > 0.0) || !(r > 0.0) || !(c > 0.0) || !(zeta > 0.0 && zeta <= 1.0)) {
            throw std::invalid_argument("theory parameters require s, r, c > 0 and zeta in (0, 1]");
        }
    }
};

/// Feature matrix with +-1 labels. Immutable once built.
class Dataset {
public:
    Dataset() = default;

    Dataset(Matrix features, std::vector<Label> labels)
        : features_(std::move(features)), labels_(std::move(labels)) {
        if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
            throw std::invalid_argument("dataset: feature rows and label count differ");
        }
        if (!features_.allFinite()) {
            throw std::invalid_argument("dataset: non-finite feature value");
        }
        for (Label y : labels_) {
            if (y == 1) {
                ++n_pos_;
            } else if (y == -1) {
                ++n_neg_;
            } else {
                throw std::invalid_argument("dataset: labels must be -1 or +1");
            }
        }
    }

    [[nodiscard]] const Matrix& features() const { return features_; }
    [[nodiscard]] const std::vector<Label>& labels() const { return labels_; }
    [[nodiscard]] Label label(Eigen::Index i) const { return labels_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] Eigen::Index size() const { return features_.rows(); }
    [[nodiscard]] Eigen::Index dims() const { return features_.cols(); }
    [[nodiscard]] Eigen::Index count(Label y) const { return y > 0 ? n_pos_ : n_neg_; }

    [[nodiscard]] Vector label_vector() const {
        Vector y(size());
        for (Eigen::Index i = 0; i < size(); ++i) {
            y(i) = label(i);
        }
        return y;
    }

    void require_both_classes(std::string_view context) const {
        if (n_neg_ < 1 || n_pos_ < 1) {
            throw std::invalid_argument(std::string(context) + ": both classes must be present");
        }
    }

    /// Rows selected by index, in the given order.
    [[nodiscard]] Dataset subset(const std::vector<Eigen::Index>& rows) const {
        Matrix x(static_cast<Eigen::Index>(rows.size()), dims());
        std::vector<Label> y;
        y.reserve(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            x.row(static_cast<Eigen::Index>(k)) = features_.row(rows[k]);
            y.push_back(label(rows[k]));
        }
        return {std::move(x), std::move(y)};
    }

private:
    Matrix features_;
    std::vector<Label> labels_;
    Eigen::Index n_neg_ = 0;
    Eigen::Index n_pos_ = 0;
};

/// a-hinge loss H_a(u) = (1 + a - u)_+.
inline double shifted_hinge(double shift, double margin) {
    if (!std::isfinite(shift) || !std::isfinite(margin)) {
        throw std::invalid_argument("shifted_hinge: non-finite input");
    }
    return std::max(0.0, 1.0 + shift - margin);
}

/// Ambiguity region is the closed band |f| <= eps.
inline SetLabel classify_by_margin(double f_value, double eps) {
    if (!(eps >= 0.0)) {
        throw std::invalid_argument("classify_by_margin: eps must be >= 0");
    }
    if (f_value > eps) {
        return SetLabel::PosOnly;
    }
    if (f_value < -eps) {
        return SetLabel::NegOnly;
    }
    return SetLabel::Both;
}

} // namespace csvm
