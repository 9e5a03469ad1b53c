#pragma once

#include "csvm/core.hpp"
#include "csvm/qp/problem.hpp"

#include <algorithm>
#include <vector>

namespace csvm {

/// c_i = (zeta_i + tau_i) y_i, so that f(x) = sum_i c_i K(x_i, x) + b.
inline Vector recover_coefficients(const QpSolution& solution, const std::vector<Label>& labels) {
    if (solution.status != QpStatus::Optimal) {
        throw std::invalid_argument("recover_coefficients: QP solution is not optimal");
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (solution.z.size() != 2 * n + 2) {
        throw std::invalid_argument("recover_coefficients: solution does not match label count");
    }
    Vector c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c(i) = (solution.z(i) + solution.z(n + i)) * labels[static_cast<std::size_t>(i)];
    }
    return c;
}

struct InterceptMargin {
    double intercept = 0.0;
    double margin = 0.0;
    Vector xi;             // (1 + eps - y_i f_i)_+
    Vector eta;            // (1 - eps - y_i f_i)_+
    double objective = 0.0;  // lambda' * sum(xi)
};

namespace detail {

/// Smallest u with sum_i w_i (a_i - u)_+ <= budget, budget > 0.
inline double smallest_feasible_shift(std::vector<std::pair<double, double>> a_w, double budget) {
    std::sort(a_w.begin(), a_w.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    double s = 0.0;  // sum w a over the active prefix
    double w = 0.0;  // sum w over the active prefix
    for (std::size_t k = 0; k < a_w.size(); ++k) {
        s += a_w[k].second * a_w[k].first;
        w += a_w[k].second;
        const double next = k + 1 < a_w.size() ? a_w[k + 1].first : -std::numeric_limits<double>::infinity();
        // On [next, a_k] the loss is s - w u.
        const double u = (s - budget) / w;
        if (u >= next) return std::min(u, a_w[k].first);
    }
    return -std::numeric_limits<double>::infinity();  // empty class
}

} // namespace detail

/// With the kernel part h fixed, chooses (b, eps >= 0) minimising sum xi_i
/// subject to sum_{y_i=j} w_i eta_i <= n_j alpha_j.
///
/// In the coordinates P = eps + b and M = eps - b the problem separates:
/// class -1 hinge terms and the class +1 constraint depend on P alone, class
/// +1 hinge terms and the class -1 constraint on M alone. Each constraint is a
/// lower bound (P >= U_1, M >= U_-1) and the objective is non-decreasing in P
/// and in M, so the optimum is the corner (U_1, U_-1) whenever it satisfies
/// eps >= 0, and otherwise lies on eps = 0 where it reduces to a
/// one-dimensional convex piecewise-linear search over the breakpoints.
///
/// Ties go to the smaller eps, then the smaller |b|.
inline InterceptMargin solve_intercept_margin(const Vector& h, const std::vector<Label>& labels,
                                              const Vector& weights, double lambda_prime,
                                              const NoncoverageTargets& targets, Eigen::Index n_neg,
                                              Eigen::Index n_pos) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (h.size() != n || weights.size() != n) {
        throw std::invalid_argument("solve_intercept_margin: size mismatch");
    }
    if (!h.allFinite()) throw std::invalid_argument("solve_intercept_margin: non-finite h");
    if (n_neg < 1 || n_pos < 1) throw std::invalid_argument("solve_intercept_margin: empty class");

    std::vector<std::pair<double, double>> c_pos, c_neg;  // (1 - y h, w) per class
    std::vector<double> hinge_pos, hinge_neg;             // objective breakpoints
    for (Eigen::Index i = 0; i < n; ++i) {
        const Label y = labels[static_cast<std::size_t>(i)];
        if (y > 0) {
            c_pos.emplace_back(1.0 - h(i), weights(i));
            hinge_pos.push_back(h(i) - 1.0);  // (M - (h_i - 1))_+
        } else {
            c_neg.emplace_back(1.0 + h(i), weights(i));
            hinge_neg.push_back(-1.0 - h(i));  // (P - (-1 - h_i))_+
        }
    }
    if (static_cast<Eigen::Index>(c_neg.size()) != n_neg || static_cast<Eigen::Index>(c_pos.size()) != n_pos) {
        throw std::invalid_argument("solve_intercept_margin: class counts do not match labels");
    }
    const double u_pos = detail::smallest_feasible_shift(c_pos, static_cast<double>(n_pos) * targets.pos);
    const double u_neg = detail::smallest_feasible_shift(c_neg, static_cast<double>(n_neg) * targets.neg);

    auto f_neg = [&](double p) {
        double acc = 0.0;
        for (double t : hinge_neg) acc += std::max(0.0, p - t);
        return acc;
    };
    auto f_pos = [&](double m) {
        double acc = 0.0;
        for (double t : hinge_pos) acc += std::max(0.0, m - t);
        return acc;
    };

    double p_opt = u_pos;
    double m_opt = u_neg;
    if (u_pos + u_neg < 0.0) {
        // eps = 0: minimise f_neg(P) + f_pos(-P) over P in [u_pos, -u_neg].
        const double lo = u_pos;
        const double hi = -u_neg;
        std::vector<double> cand{lo, hi};
        for (double t : hinge_neg) {
            if (t > lo && t < hi) cand.push_back(t);
        }
        for (double t : hinge_pos) {
            if (-t > lo && -t < hi) cand.push_back(-t);
        }
        std::sort(cand.begin(), cand.end());
        std::vector<double> val(cand.size());
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cand.size(); ++k) {
            val[k] = f_neg(cand[k]) + f_pos(-cand[k]);
            best = std::min(best, val[k]);
        }
        const double slack = 1e-12 * (1.0 + std::abs(best));
        double first = hi, last = lo;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            if (val[k] <= best + slack) {
                first = std::min(first, cand[k]);
                last = std::max(last, cand[k]);
            }
        }
        p_opt = std::clamp(0.0, first, last);
        m_opt = -p_opt;
    }

    InterceptMargin out;
    out.margin = std::max(0.0, 0.5 * (p_opt + m_opt));
    out.intercept = 0.5 * (p_opt - m_opt);
    out.xi.resize(n);
    out.eta.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double yf = labels[static_cast<std::size_t>(i)] * (h(i) + out.intercept);
        out.xi(i) = std::max(0.0, 1.0 + out.margin - yf);
        out.eta(i) = std::max(0.0, 1.0 - out.margin - yf);
    }
    out.objective = lambda_prime * out.xi.sum();
    return out;
}

/// 1/2 c'Kc + lambda' sum(xi): the primal objective of the scaled problem.
inline double primal_objective(const Matrix& gram, const Vector& coefficients, double lambda_prime,
                               const Vector& xi) {
    return 0.5 * coefficients.dot(gram * coefficients) + lambda_prime * xi.sum();
}

} // namespace csvm
