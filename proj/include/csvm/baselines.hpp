#pragma once

#include "csvm/core.hpp"
#include "csvm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace csvm {

/// Linear score x'beta + b of an L2-penalised logistic fit.
struct LogisticModel {
    Vector beta;
    double intercept = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;  // infinity norm at the returned point
    bool warning = false;        // true when max_iters ran out first

    [[nodiscard]] Vector score_batch(const Matrix& x) const {
        if (x.cols() != beta.size()) throw std::invalid_argument("logistic score: feature dimension mismatch");
        return (x * beta).array() + intercept;
    }
};

namespace detail {

// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
inline double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace detail

/// Minimises (1/n) sum log(1 + exp(-y_i (x_i'beta + b))) + lambda ||beta||^2
/// by Newton steps with Armijo backtracking. The intercept is unpenalised.
inline LogisticModel fit_ridge_logistic(const Dataset& data, double lambda, int max_iters = 100, double tol = 1e-8) {
    data.require_both_classes("fit_ridge_logistic");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("fit_ridge_logistic: lambda must be > 0");
    if (max_iters < 1) throw std::invalid_argument("fit_ridge_logistic: max_iters must be >= 1");
    const Eigen::Index n = data.size();
    const Eigen::Index p = data.dims();
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix xa(n, p + 1);
    xa.leftCols(p) = data.features();
    xa.col(p).setOnes();
    const Vector y = data.label_vector();

    Vector penalty = Vector::Constant(p + 1, 2.0 * lambda);
    penalty(p) = 0.0;

    auto objective = [&](const Vector& w) {
        const Vector m = y.cwiseProduct(xa * w);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) loss += detail::softplus(-m(i));
        return loss * inv_n + lambda * w.head(p).squaredNorm();
    };

    // Start at the class log-odds so the intercept begins near its optimum.
    Vector w = Vector::Zero(p + 1);
    w(p) = std::log(static_cast<double>(data.count(1)) / static_cast<double>(data.count(-1)));
    double f = objective(w);

    LogisticModel out;
    for (int it = 0;; ++it) {
        const Vector m = y.cwiseProduct(xa * w);
        Vector r(n), d(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = detail::sigmoid(-m(i));
            r(i) = -y(i) * s;
            d(i) = s * (1.0 - s);
        }
        const Vector grad = inv_n * (xa.transpose() * r) + penalty.cwiseProduct(w);
        out.gradient_norm = grad.cwiseAbs().maxCoeff();
        out.iterations = it;
        if (out.gradient_norm <= tol) break;
        if (it == max_iters) {
            out.warning = true;
            break;
        }
        Matrix h = inv_n * (xa.transpose() * d.asDiagonal() * xa);
        h.diagonal() += penalty;
        // Tiny ridge keeps the intercept direction solvable on separable data.
        h.diagonal().array() += 1e-12 * (1.0 + h.diagonal().maxCoeff());
        const Vector step = h.ldlt().solve(-grad);
        const double slope = grad.dot(step);
        double t = 1.0;
        Vector trial = w + step;
        double ft = objective(trial);
        while (ft > f + 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            trial = w + t * step;
            ft = objective(trial);
        }
        if (ft > f) {
            out.warning = true;  // no descent possible at working precision
            break;
        }
        w = trial;
        f = ft;
    }
    out.beta = w.head(p);
    out.intercept = w(p);
    return out;
}

/// Fraction of the k nearest training points (Euclidean) labelled +1.
struct KnnModel {
    Matrix features;
    std::vector<Label> labels;
    int k = 1;

    [[nodiscard]] Vector score_batch(const Matrix& x, int jobs = 1) const {
        if (x.cols() != features.cols()) throw std::invalid_argument("knn score: feature dimension mismatch");
        const Eigen::Index n = features.rows();
        const auto kk = static_cast<std::size_t>(k);
        Vector out(x.rows());
        constexpr std::size_t kBlock = 256;
        const std::size_t blocks = (static_cast<std::size_t>(x.rows()) + kBlock - 1) / kBlock;
        parallel_for(blocks, jobs, [&](std::size_t b) {
            std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
            const auto lo = static_cast<Eigen::Index>(b * kBlock);
            const Eigen::Index hi = std::min<Eigen::Index>(x.rows(), lo + static_cast<Eigen::Index>(kBlock));
            for (Eigen::Index q = lo; q < hi; ++q) {
                const Vector d2 = (features.rowwise() - x.row(q)).rowwise().squaredNorm();
                for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = {d2(i), i};
                // Lexicographic order on (distance, index) breaks ties by index.
                std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
                int pos = 0;
                for (std::size_t j = 0; j < kk; ++j) pos += labels[static_cast<std::size_t>(dist[j].second)] > 0;
                out(q) = static_cast<double>(pos) / static_cast<double>(k);
            }
        });
        return out;
    }
};

inline KnnModel fit_knn(const Dataset& data, int k) {
    if (k < 1) throw std::invalid_argument("fit_knn: k must be >= 1");
    if (k > data.size()) {
        throw std::invalid_argument("fit_knn: k = " + std::to_string(k) + " exceeds the training size " +
                                    std::to_string(data.size()));
    }
    return {data.features(), data.labels(), k};
}

} // namespace csvm
