#pragma once

// Test-only reference computations. Nothing here calls into the solver,
// recovery or calibration code paths it is used to check.

#include "csvm/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace csvm::oracle_test {

/// Exhaustive grid minimisation over a box, re-centred and shrunk around the
/// incumbent. f returns +inf for infeasible points.
struct GridResult {
    std::vector<double> arg;
    double value = std::numeric_limits<double>::infinity();
};

inline GridResult refined_grid_min(std::vector<double> lo, std::vector<double> hi,
                                   const std::function<double(const std::vector<double>&)>& f,
                                   int points, int levels, double shrink = 0.25) {
    const std::size_t d = lo.size();
    GridResult best;
    const std::vector<double> box_lo = lo, box_hi = hi;
    std::vector<double> x(d);
    for (int level = 0; level < levels; ++level) {
        std::vector<int> idx(d, 0);
        GridResult level_best = best;
        while (true) {
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = points == 1 ? lo[k] : lo[k] + (hi[k] - lo[k]) * idx[k] / (points - 1);
            }
            const double v = f(x);
            if (v < level_best.value) {
                level_best.value = v;
                level_best.arg = x;
            }
            std::size_t k = 0;
            while (k < d && ++idx[k] == points) {
                idx[k] = 0;
                ++k;
            }
            if (k == d) break;
        }
        best = level_best;
        if (best.arg.empty()) return best;
        for (std::size_t k = 0; k < d; ++k) {
            const double half = std::max((hi[k] - lo[k]) * shrink, 1e-12);
            lo[k] = std::max(box_lo[k], best.arg[k] - half);
            hi[k] = std::min(box_hi[k], best.arg[k] + half);
        }
    }
    return best;
}

/// Brute-force minimum of the CSVM dual. For fixed u = zeta + tau the
/// objective only depends on the tau split through the theta terms, which
/// are minimised by the smallest admissible tau_i = (u_i - lambda')_+ and
/// theta_j = max_{y_i=j} tau_i / w_i. The remaining search is over u >= 0
/// with y'u = 0 (last coordinate eliminated).
inline double csvm_dual_bruteforce(const Matrix& gram, const std::vector<Label>& y, const Vector& w,
                                   double lambda_prime, double a_neg, double a_pos) {
    const std::size_t n = y.size();
    double n_neg = 0, n_pos = 0;
    for (Label v : y) (v > 0 ? n_pos : n_neg) += 1;

    auto objective = [&](const std::vector<double>& head) {
        std::vector<double> u(head);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) acc += y[i] * u[i];
        const double last = -y[n - 1] * acc;
        if (last < 0.0) return std::numeric_limits<double>::infinity();
        u.push_back(last);
        double quad = 0.0, lin = 0.0, tau_sum = 0.0, u_sum = 0.0;
        double th_neg = 0.0, th_pos = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                quad += u[i] * u[j] * y[i] * y[j] * gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            lin += u[i];
            u_sum += u[i];
            const double tau = std::max(0.0, u[i] - lambda_prime);
            tau_sum += tau;
            const double th = tau / w(static_cast<Eigen::Index>(i));
            if (y[i] > 0) th_pos = std::max(th_pos, th); else th_neg = std::max(th_neg, th);
        }
        if (tau_sum > 0.5 * u_sum + 1e-15) return std::numeric_limits<double>::infinity();
        return 0.5 * quad - lin + n_neg * a_neg * th_neg + n_pos * a_pos * th_pos;
    };

    double box = 2.0 * lambda_prime + 2.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const std::vector<double> lo(n - 1, 0.0), hi(n - 1, box);
        const int pts = n - 1 == 1 ? 401 : (n - 1 == 2 ? 81 : 31);
        const GridResult r = refined_grid_min(lo, hi, objective, pts, 40, n - 1 == 1 ? 0.02 : 0.08);
        bool on_edge = false;
        for (double v : r.arg) on_edge |= v > 0.999 * box;
        if (!on_edge) return r.value;
        box *= 4.0;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Brute-force (b, eps) minimiser of sum xi given h, by grid refinement.
inline std::pair<double, std::vector<double>> intercept_margin_bruteforce(
    const Vector& h, const std::vector<Label>& y, const Vector& w, double a_neg, double a_pos, double span) {
    double n_neg = 0, n_pos = 0;
    for (Label v : y) (v > 0 ? n_pos : n_neg) += 1;
    auto f = [&](const std::vector<double>& be) {
        const double b = be[0], eps = be[1];
        double obj = 0.0, c_neg = 0.0, c_pos = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double yf = y[i] * (h(static_cast<Eigen::Index>(i)) + b);
            obj += std::max(0.0, 1.0 + eps - yf);
            const double eta = w(static_cast<Eigen::Index>(i)) * std::max(0.0, 1.0 - eps - yf);
            (y[i] > 0 ? c_pos : c_neg) += eta;
        }
        if (c_neg > n_neg * a_neg + 1e-12 || c_pos > n_pos * a_pos + 1e-12) {
            return std::numeric_limits<double>::infinity();
        }
        return obj;
    };
    const GridResult r = refined_grid_min({-span, 0.0}, {span, 2.0 * span}, f, 201, 30, 0.05);
    return {r.value, r.arg};
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
}

/// Random labels with both classes present.
inline std::vector<Label> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::bernoulli_distribution coin(0.5);
    std::vector<Label> y(n);
    do {
        for (auto& v : y) v = coin(rng) ? 1 : -1;
    } while (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0);
    return y;
}

/// Smallest class -1 score t with #{s > t} <= a m and largest class +1
/// score t with #{s < t} <= a m, found by scanning every observed score.
inline std::pair<double, double> thresholds_by_enumeration(const Vector& s, const std::vector<Label>& y,
                                                           double a_neg, double a_pos) {
    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < s.size(); ++i) (y[static_cast<std::size_t>(i)] > 0 ? pos : neg).push_back(s(i));
    double tn = std::numeric_limits<double>::infinity();
    for (double t : neg) {
        const auto above = std::count_if(neg.begin(), neg.end(), [&](double v) { return v > t; });
        if (static_cast<double>(above) <= a_neg * static_cast<double>(neg.size()) + 1e-9) tn = std::min(tn, t);
    }
    double tp = -std::numeric_limits<double>::infinity();
    for (double t : pos) {
        const auto below = std::count_if(pos.begin(), pos.end(), [&](double v) { return v < t; });
        if (static_cast<double>(below) <= a_pos * static_cast<double>(pos.size()) + 1e-9) tp = std::max(tp, t);
    }
    return {tn, tp};
}

} // namespace csvm::oracle_test
