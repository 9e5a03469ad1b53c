#pragma once

#include "csvm/qp/problem.hpp"

#include <cmath>

namespace csvm {

struct KktReport {
    KktResiduals residuals;
    bool stationarity = false;
    bool primal_feasibility = false;
    bool dual_feasibility = false;
    bool complementarity = false;

    [[nodiscard]] bool passed() const {
        return stationarity && primal_feasibility && dual_feasibility && complementarity;
    }
};

/// Recomputes the KKT residuals of (z, multipliers) straight from the
/// problem data. Shares no code with the interior-point solver.
///
/// stationarity:  Qz + q + A_eq'y + A_ineq'lambda - mu_l + mu_u = 0
/// primal:        A_eq z = b_eq, A_ineq z <= b_ineq, lower <= z <= upper
/// dual:          lambda, mu_l, mu_u >= 0
/// complementarity: |slack| * multiplier = 0 for every inequality and bound
inline KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& s) {
    const Eigen::Index m = p.size();
    const double scale = 1.0 + (m > 0 ? p.q.cwiseAbs().maxCoeff() : 0.0);
    const Vector& z = s.z;

    auto inf_norm = [](const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };

    Vector grad = p.Q * z + p.q;
    if (p.A_eq.rows()) grad += p.A_eq.transpose() * s.eq_multipliers;
    if (p.A_ineq.rows()) grad += p.A_ineq.transpose() * s.ineq_multipliers;
    grad -= s.lower_multipliers;
    grad += s.upper_multipliers;

    double primal = 0.0;
    if (p.A_eq.rows()) primal = std::max(primal, inf_norm(p.A_eq * z - p.b_eq));
    Vector ineq_slack = p.b_ineq - p.A_ineq * z;
    for (Eigen::Index r = 0; r < ineq_slack.size(); ++r) primal = std::max(primal, -ineq_slack(r));

    double dual = 0.0;
    double comp = 0.0;
    for (Eigen::Index r = 0; r < ineq_slack.size(); ++r) {
        dual = std::max(dual, -s.ineq_multipliers(r));
        comp = std::max(comp, std::abs(ineq_slack(r) * s.ineq_multipliers(r)));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isfinite(p.lower(i))) {
            primal = std::max(primal, p.lower(i) - z(i));
            dual = std::max(dual, -s.lower_multipliers(i));
            comp = std::max(comp, std::abs((z(i) - p.lower(i)) * s.lower_multipliers(i)));
        } else {
            // A multiplier on an absent bound is itself a stationarity defect.
            dual = std::max(dual, std::abs(s.lower_multipliers(i)));
        }
        if (std::isfinite(p.upper(i))) {
            primal = std::max(primal, z(i) - p.upper(i));
            dual = std::max(dual, -s.upper_multipliers(i));
            comp = std::max(comp, std::abs((p.upper(i) - z(i)) * s.upper_multipliers(i)));
        } else {
            dual = std::max(dual, std::abs(s.upper_multipliers(i)));
        }
    }

    return {inf_norm(grad) / scale, primal / scale, dual / scale, comp / scale};
}

inline KktReport verify_kkt(const QpProblem& p, const QpSolution& s, double tol) {
    const Eigen::Index m = p.size();
    if (s.z.size() != m || s.lower_multipliers.size() != m || s.upper_multipliers.size() != m ||
        s.eq_multipliers.size() != p.A_eq.rows() || s.ineq_multipliers.size() != p.A_ineq.rows()) {
        throw std::invalid_argument("verify_kkt: solution does not match problem dimensions");
    }
    KktReport r;
    r.residuals = kkt_residuals(p, s);
    r.stationarity = r.residuals.stationarity <= tol;
    r.primal_feasibility = r.residuals.primal_feasibility <= tol;
    r.dual_feasibility = r.residuals.dual_feasibility <= tol;
    r.complementarity = r.residuals.complementarity <= tol;
    return r;
}

} // namespace csvm
