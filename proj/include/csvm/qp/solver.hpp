#pragma once

#include "csvm/qp/newton.hpp"
#include "csvm/qp/problem.hpp"

#include <cmath>
#include <vector>

namespace csvm {

namespace detail {

/// Largest step in [0, 1] keeping v + step * dv >= 0.
inline double max_step(const Vector& v, const Vector& dv) {
    double step = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
    }
    return step;
}

inline double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace detail

/// Mehrotra predictor-corrector primal-dual interior point method.
///
/// Bounds are kept strictly satisfied by every iterate; general inequalities
/// carry explicit slacks and may start infeasible. Terminates when all four
/// KKT residual groups, scaled by 1 + ||q||_inf, fall below opts.tol.
inline QpSolution solve_qp(const QpProblem& p, const QpOptions& opts) {
    p.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_qp: tol must be > 0");

    using detail::inf_norm;
    const Eigen::Index m = p.size();
    const Eigen::Index k = p.A_ineq.rows();
    const Eigen::Index me = p.A_eq.rows();
    const double scale = 1.0 + inf_norm(p.q);

    std::vector<Eigen::Index> lo_idx, hi_idx;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isfinite(p.lower(i))) lo_idx.push_back(i);
        if (std::isfinite(p.upper(i))) hi_idx.push_back(i);
    }
    const auto nl = static_cast<Eigen::Index>(lo_idx.size());
    const auto nu = static_cast<Eigen::Index>(hi_idx.size());
    const Eigen::Index n_comp = k + nl + nu;

    auto gather = [](const Vector& v, const std::vector<Eigen::Index>& idx) {
        Vector out(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<Eigen::Index>(j)) = v(idx[j]);
        return out;
    };
    auto scatter_add = [](Vector& dst, const Vector& v, const std::vector<Eigen::Index>& idx, double sign) {
        for (std::size_t j = 0; j < idx.size(); ++j) dst(idx[j]) += sign * v(static_cast<Eigen::Index>(j));
    };

    // Starting point: inside the box, unit slacks and multipliers.
    Vector z(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double lo = p.lower(i), hi = p.upper(i);
        if (std::isfinite(lo) && std::isfinite(hi)) {
            z(i) = lo + std::min(1.0, 0.5 * (hi - lo));
        } else if (std::isfinite(lo)) {
            z(i) = lo + 1.0;
        } else if (std::isfinite(hi)) {
            z(i) = hi - 1.0;
        } else {
            z(i) = 0.0;
        }
    }
    Vector s = k ? Vector((p.b_ineq - p.A_ineq * z).cwiseMax(1.0)) : Vector(0);
    Vector lam = Vector::Ones(k);
    Vector y = Vector::Zero(me);
    Vector mu_l = Vector::Ones(nl);
    Vector mu_u = Vector::Ones(nu);

    auto solver = detail::make_newton_solver(p, opts.exploit_structure);

    QpSolution out;
    int suspect_infeasible = 0;
    int tiny_steps = 0;

    auto finish = [&](QpStatus status, int iters, const KktResiduals& res) {
        out.z = z;
        out.eq_multipliers = y;
        out.ineq_multipliers = lam;
        out.lower_multipliers = Vector::Zero(m);
        out.upper_multipliers = Vector::Zero(m);
        scatter_add(out.lower_multipliers, mu_l, lo_idx, 1.0);
        scatter_add(out.upper_multipliers, mu_u, hi_idx, 1.0);
        out.objective = 0.5 * z.dot(p.Q * z) + p.q.dot(z);
        out.kkt_residuals = res;
        out.iterations = iters;
        out.status = status;
        return out;
    };

    for (int iter = 0;; ++iter) {
        const Vector gl = gather(z, lo_idx) - gather(p.lower, lo_idx);
        const Vector gu = gather(p.upper, hi_idx) - gather(z, hi_idx);

        Vector r_d = p.Q * z + p.q;
        if (me) r_d += p.A_eq.transpose() * y;
        if (k) r_d += p.A_ineq.transpose() * lam;
        scatter_add(r_d, mu_l, lo_idx, -1.0);
        scatter_add(r_d, mu_u, hi_idx, 1.0);
        const Vector r_e = me ? Vector(p.A_eq * z - p.b_eq) : Vector(0);
        const Vector cz_minus_d = k ? Vector(p.A_ineq * z - p.b_ineq) : Vector(0);
        const Vector r_i = cz_minus_d + s;

        KktResiduals res;
        res.stationarity = inf_norm(r_d) / scale;
        double primal = inf_norm(r_e);
        if (k) primal = std::max(primal, cz_minus_d.maxCoeff());
        res.primal_feasibility = std::max(primal, 0.0) / scale;
        res.dual_feasibility = 0.0;  // multipliers stay strictly positive
        double comp = 0.0;
        if (k) comp = std::max(comp, cz_minus_d.cwiseProduct(lam).cwiseAbs().maxCoeff());
        if (nl) comp = std::max(comp, gl.cwiseProduct(mu_l).maxCoeff());
        if (nu) comp = std::max(comp, gu.cwiseProduct(mu_u).maxCoeff());
        res.complementarity = comp / scale;

        out.objective_history.push_back(0.5 * z.dot(p.Q * z) + p.q.dot(z));

        if (res.max() <= opts.tol) return finish(QpStatus::Optimal, iter, res);
        if (iter >= opts.max_iter) return finish(QpStatus::MaxIter, iter, res);

        // Primal infeasibility: multipliers diverge while the primal
        // residual refuses to shrink.
        const double cert = std::max({inf_norm(y), inf_norm(lam), inf_norm(mu_l), inf_norm(mu_u)});
        const double prim_abs = std::max(primal, 0.0);
        if (res.primal_feasibility > opts.tol && cert > 1e8 * prim_abs) {
            if (++suspect_infeasible >= 10) return finish(QpStatus::Infeasible, iter, res);
        } else {
            suspect_infeasible = 0;
        }

        const double mu =
            n_comp ? (s.dot(lam) + gl.dot(mu_l) + gu.dot(mu_u)) / static_cast<double>(n_comp) : 0.0;

        Vector bound_diag = Vector::Zero(m);
        scatter_add(bound_diag, mu_l.cwiseQuotient(gl), lo_idx, 1.0);
        scatter_add(bound_diag, mu_u.cwiseQuotient(gu), hi_idx, 1.0);
        const Vector row_w = k ? Vector(lam.cwiseQuotient(s)) : Vector(0);
        solver->factor(bound_diag, row_w);

        struct Direction {
            Vector dz, dy, ds, dlam, dmu_l, dmu_u;
        };
        auto direction = [&](const Vector& r_sl, const Vector& r_l, const Vector& r_u) {
            Vector rx = -r_d;
            if (k) rx -= p.A_ineq.transpose() * (r_sl + lam.cwiseProduct(r_i)).cwiseQuotient(s);
            scatter_add(rx, r_l.cwiseQuotient(gl), lo_idx, 1.0);
            scatter_add(rx, r_u.cwiseQuotient(gu), hi_idx, -1.0);
            Direction d;
            solver->solve(rx, -r_e, d.dz, d.dy);
            d.ds = k ? Vector(-r_i - p.A_ineq * d.dz) : Vector(0);
            d.dlam = k ? Vector((r_sl - lam.cwiseProduct(d.ds)).cwiseQuotient(s)) : Vector(0);
            const Vector dz_l = gather(d.dz, lo_idx);
            const Vector dz_u = gather(d.dz, hi_idx);
            d.dmu_l = (r_l - mu_l.cwiseProduct(dz_l)).cwiseQuotient(gl);
            d.dmu_u = (r_u + mu_u.cwiseProduct(dz_u)).cwiseQuotient(gu);
            return d;
        };
        auto step_to_boundary = [&](const Direction& d) {
            const Vector dz_l = gather(d.dz, lo_idx);
            const Vector dz_u = gather(d.dz, hi_idx);
            double a = 1.0;
            a = std::min(a, detail::max_step(s, d.ds));
            a = std::min(a, detail::max_step(gl, dz_l));
            a = std::min(a, detail::max_step(gu, -dz_u));
            a = std::min(a, detail::max_step(lam, d.dlam));
            a = std::min(a, detail::max_step(mu_l, d.dmu_l));
            a = std::min(a, detail::max_step(mu_u, d.dmu_u));
            return a;
        };

        // Predictor.
        const Vector r_sl_aff = -s.cwiseProduct(lam);
        const Vector r_l_aff = -gl.cwiseProduct(mu_l);
        const Vector r_u_aff = -gu.cwiseProduct(mu_u);
        const Direction aff = direction(r_sl_aff, r_l_aff, r_u_aff);

        double sigma = 0.0;
        if (n_comp) {
            const double a = step_to_boundary(aff);
            const Vector dz_l = gather(aff.dz, lo_idx);
            const Vector dz_u = gather(aff.dz, hi_idx);
            const double mu_aff = ((s + a * aff.ds).dot(lam + a * aff.dlam) +
                                   (gl + a * dz_l).dot(mu_l + a * aff.dmu_l) +
                                   (gu - a * dz_u).dot(mu_u + a * aff.dmu_u)) /
                                  static_cast<double>(n_comp);
            sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
            sigma = std::min(sigma, 1.0);
        }

        // Corrector.
        const Vector dz_l_aff = gather(aff.dz, lo_idx);
        const Vector dz_u_aff = gather(aff.dz, hi_idx);
        const Vector r_sl = r_sl_aff - aff.ds.cwiseProduct(aff.dlam) + Vector::Constant(k, sigma * mu);
        const Vector r_l = r_l_aff - dz_l_aff.cwiseProduct(aff.dmu_l) + Vector::Constant(nl, sigma * mu);
        const Vector r_u = r_u_aff + dz_u_aff.cwiseProduct(aff.dmu_u) + Vector::Constant(nu, sigma * mu);
        const Direction d = direction(r_sl, r_l, r_u);

        const double alpha = std::min(1.0, 0.995 * step_to_boundary(d));
        if (!std::isfinite(alpha) || !d.dz.allFinite()) {
            return finish(QpStatus::MaxIter, iter, res);
        }
        tiny_steps = alpha < 1e-10 ? tiny_steps + 1 : 0;
        if (tiny_steps >= 10) return finish(QpStatus::MaxIter, iter, res);

        z += alpha * d.dz;
        y += alpha * d.dy;
        s += alpha * d.ds;
        lam += alpha * d.dlam;
        mu_l += alpha * d.dmu_l;
        mu_u += alpha * d.dmu_u;
    }
}

inline QpSolution solve_qp(const QpProblem& p, double tol) {
    QpOptions opts;
    opts.tol = tol;
    return solve_qp(p, opts);
}

} // namespace csvm
