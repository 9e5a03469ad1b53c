#pragma once

#include "csvm/core.hpp"

#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace csvm {

/// Maps QP variable indices to their role. The CSVM dual stores
/// (zeta_1..zeta_n, tau_1..tau_n, theta_-1, theta_+1) in that order.
struct VariableLayout {
    enum class Kind : std::uint8_t { Generic, CsvmDual };

    Kind kind = Kind::Generic;
    Eigen::Index n = 0;

    static VariableLayout csvm_dual(Eigen::Index n) { return {Kind::CsvmDual, n}; }

    [[nodiscard]] Eigen::Index zeta(Eigen::Index i) const { return i; }
    [[nodiscard]] Eigen::Index tau(Eigen::Index i) const { return n + i; }
    [[nodiscard]] Eigen::Index theta(Label y) const { return 2 * n + (y > 0 ? 1 : 0); }
    [[nodiscard]] Eigen::Index variables() const { return 2 * n + 2; }
};

/// minimize 1/2 z'Qz + q'z
/// subject to A_eq z = b_eq, A_ineq z <= b_ineq, lower <= z <= upper.
/// Bounds may be infinite.
struct QpProblem {
    Matrix Q;
    Vector q;
    Matrix A_ineq;
    Vector b_ineq;
    Matrix A_eq;
    Vector b_eq;
    Vector lower;
    Vector upper;
    VariableLayout layout;

    [[nodiscard]] Eigen::Index size() const { return q.size(); }

    /// Builds an unconstrained-shape problem with free variables; callers
    /// fill in whatever constraints they need.
    static QpProblem unconstrained(Matrix Q, Vector q) {
        const Eigen::Index m = q.size();
        QpProblem p;
        p.Q = std::move(Q);
        p.q = std::move(q);
        p.A_ineq.resize(0, m);
        p.b_ineq.resize(0);
        p.A_eq.resize(0, m);
        p.b_eq.resize(0);
        p.lower = Vector::Constant(m, -std::numeric_limits<double>::infinity());
        p.upper = Vector::Constant(m, std::numeric_limits<double>::infinity());
        return p;
    }

    void validate() const {
        const Eigen::Index m = size();
        auto fail = [](std::string_view what) {
            throw std::invalid_argument("QpProblem: " + std::string(what));
        };
        if (Q.rows() != m || Q.cols() != m) fail("Q must be m x m");
        if (A_ineq.cols() != m || A_ineq.rows() != b_ineq.size()) fail("inequality block shape");
        if (A_eq.cols() != m || A_eq.rows() != b_eq.size()) fail("equality block shape");
        if (lower.size() != m || upper.size() != m) fail("bound vector length");
        if (!Q.allFinite() || !q.allFinite() || !A_ineq.allFinite() || !b_ineq.allFinite() ||
            !A_eq.allFinite() || !b_eq.allFinite()) {
            fail("non-finite data");
        }
        const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
        if (m > 0 && asym > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff())) fail("Q is not symmetric");
        for (Eigen::Index i = 0; i < m; ++i) {
            if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) >= upper(i) ||
                lower(i) == std::numeric_limits<double>::infinity() ||
                upper(i) == -std::numeric_limits<double>::infinity()) {
                fail("bounds must satisfy lower < upper");
            }
        }
        if (layout.kind == VariableLayout::Kind::CsvmDual) {
            if (layout.variables() != m) fail("layout does not cover all variables");
            if (A_ineq.rows() != layout.n + 1 || A_eq.rows() != 1) fail("layout/constraint mismatch");
        }
    }
};

enum class QpStatus : std::uint8_t { Optimal, MaxIter, Infeasible };

inline std::string_view to_string(QpStatus s) {
    switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::Infeasible: return "infeasible";
    }
    return "?";
}

/// KKT residual groups, each divided by (1 + ||q||_inf).
struct KktResiduals {
    double stationarity = 0.0;
    double primal_feasibility = 0.0;
    double dual_feasibility = 0.0;
    double complementarity = 0.0;

    [[nodiscard]] double max() const {
        return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity});
    }
};

struct QpSolution {
    Vector z;
    Vector eq_multipliers;     // one per equality row
    Vector ineq_multipliers;   // one per inequality row, >= 0
    Vector lower_multipliers;  // per variable, 0 where the bound is infinite
    Vector upper_multipliers;  // per variable, 0 where the bound is infinite
    double objective = 0.0;
    KktResiduals kkt_residuals;
    int iterations = 0;
    QpStatus status = QpStatus::MaxIter;
    std::vector<double> objective_history;
};

struct QpOptions {
    double tol = 1e-8;
    int max_iter = 200;
    /// Use the structured Newton solver when the layout is CsvmDual.
    bool exploit_structure = true;
};

} // namespace csvm
