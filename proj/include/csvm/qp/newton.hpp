#pragma once

// Linear algebra for one interior-point iteration. Both back ends solve
//
//   [ Q + diag(bound_diag) + C' diag(row_weight) C   A' ] [dz]   [rx]
//   [ A                                              0  ] [dy] = [ry]
//
// where C is the inequality block and A the equality block.

#include "csvm/qp/problem.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace csvm::detail {

class NewtonSolver {
public:
    virtual ~NewtonSolver() = default;
    virtual void factor(const Vector& bound_diag, const Vector& row_weight) = 0;
    virtual void solve(const Vector& rx, const Vector& ry, Vector& dz, Vector& dy) const = 0;
};

inline double psd_jitter(const Matrix& q) {
    const Eigen::Index m = q.rows();
    const double tr = m ? q.trace() / static_cast<double>(m) : 0.0;
    return std::max(1e-10 * tr, 1e-14);
}

/// Dense LDL' on the full Newton matrix, Schur complement for equalities.
class DenseNewtonSolver final : public NewtonSolver {
public:
    explicit DenseNewtonSolver(const QpProblem& p) : p_(p), jitter_(psd_jitter(p.Q)) {}

    void factor(const Vector& bound_diag, const Vector& row_weight) override {
        Matrix h = p_.Q;
        h.diagonal() += bound_diag;
        h.diagonal().array() += jitter_;
        if (p_.A_ineq.rows()) {
            h.noalias() += p_.A_ineq.transpose() * row_weight.asDiagonal() * p_.A_ineq;
        }
        ldlt_.compute(h);
        if (p_.A_eq.rows()) {
            ht_a_ = ldlt_.solve(p_.A_eq.transpose());
            schur_.compute(p_.A_eq * ht_a_);
        }
    }

    void solve(const Vector& rx, const Vector& ry, Vector& dz, Vector& dy) const override {
        Vector t = ldlt_.solve(rx);
        if (p_.A_eq.rows()) {
            dy = schur_.solve(p_.A_eq * t - ry);
            dz = t - ht_a_ * dy;
        } else {
            dy.resize(0);
            dz = std::move(t);
        }
    }

private:
    const QpProblem& p_;
    double jitter_;
    Eigen::LDLT<Matrix> ldlt_;
    Matrix ht_a_;
    Eigen::LDLT<Matrix> schur_;
};

/// Rank-revealing pivoted Cholesky: returns V with G ~= V V' when the
/// numerical rank is at most max_rank, otherwise nothing.
inline std::optional<Matrix> low_rank_factor(const Matrix& g, Eigen::Index max_rank, double rel_tol = 1e-13) {
    const Eigen::Index n = g.rows();
    if (n == 0) return Matrix(0, 0);
    Vector diag = g.diagonal();
    const double stop = rel_tol * std::max(diag.maxCoeff(), 1e-300);
    Matrix v(n, std::max<Eigen::Index>(max_rank, 1));
    Eigen::Index r = 0;
    while (true) {
        Eigen::Index j = 0;
        const double pivot = diag.maxCoeff(&j);
        if (pivot <= stop) break;
        if (r == max_rank) return std::nullopt;
        Vector col = g.col(j);
        if (r > 0) col.noalias() -= v.leftCols(r) * v.row(j).head(r).transpose();
        col /= std::sqrt(pivot);
        v.col(r) = col;
        diag -= col.cwiseAbs2();
        diag(j) = 0.0;
        ++r;
    }
    return Matrix(v.leftCols(r));
}

/// Newton solver specialised to the CSVM dual. With u = zeta + tau the
/// quadratic term is E G E' (E = [I; I]), the inequality rows are one dense
/// row plus n two-entry rows, and the single equality row is (y, y, 0, 0).
/// The (2n+2)-dimensional system is reduced to an n x n SPD solve bordered by
/// a 4 x 4 Schur complement.
class CsvmNewtonSolver final : public NewtonSolver {
public:
    explicit CsvmNewtonSolver(const QpProblem& p)
        : p_(p), n_(p.layout.n), gram_(p.Q.topLeftCorner(n_, n_)), jitter_(psd_jitter(p.Q)) {
        const VariableLayout& lay = p.layout;
        y_.resize(n_);
        w_.resize(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            y_(i) = p.A_eq(0, lay.zeta(i));
            w_(i) = -p.A_ineq(1 + i, lay.theta(y_(i) > 0 ? 1 : -1));
        }
        if (n_ >= 8) {
            low_rank_ = low_rank_factor(gram_, n_ / 4);
        }
        b_.resize(2 * n_, 4);
    }

    void factor(const Vector& bound_diag, const Vector& row_weight) override {
        const Eigen::Index n = n_;
        bound_diag_ = bound_diag;
        row_weight_ = row_weight;
        use_dense_ = false;
        d_zeta_ = bound_diag.head(n).array() + jitter_;
        d_tau_ = (bound_diag.segment(n, n) + row_weight.tail(n)).array() + jitter_;
        s_inv_ = (d_zeta_.array() * d_tau_.array() / (d_zeta_.array() + d_tau_.array())).matrix();

        if (low_rank_) {
            const Matrix& v = *low_rank_;
            const Vector dinv = s_inv_.cwiseInverse();
            Matrix core = Matrix::Identity(v.cols(), v.cols());
            core.noalias() += v.transpose() * dinv.asDiagonal() * v;
            core_llt_.compute(core);
        } else {
            Matrix mtx = gram_;
            mtx.diagonal() += s_inv_;
            llt_.compute(mtx);
            if (llt_.info() != Eigen::Success) {
                ldlt_.compute(mtx);
                use_ldlt_ = true;
            } else {
                use_ldlt_ = false;
            }
        }

        // Border columns: dense inequality row, theta couplings, equality row.
        b_.setZero();
        b_.col(0).head(n).setConstant(-1.0);
        b_.col(0).tail(n).setConstant(1.0);
        Vector h_theta = bound_diag.tail(2).array() + jitter_;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int col = y_(i) > 0 ? 2 : 1;
            const double rw = row_weight(1 + i);
            b_(n + i, col) = -rw * w_(i);
            h_theta(col - 1) += rw * w_(i) * w_(i);
        }
        b_.col(3).head(n) = y_;
        b_.col(3).tail(n) = y_;

        hb_.resize(2 * n, 4);
        for (int c = 0; c < 4; ++c) {
            hb_.col(c) = solve_h0(b_.col(c));
        }
        Matrix small = -b_.transpose() * hb_;
        small(0, 0) += -1.0 / std::max(row_weight(0), 1e-300);
        small(1, 1) += h_theta(0);
        small(2, 2) += h_theta(1);
        small_lu_.compute(small);
    }

    void solve(const Vector& rx, const Vector& ry, Vector& dz, Vector& dy) const override {
        if (use_dense_) {
            dense_->solve(rx, ry, dz, dy);
            return;
        }
        solve_once(rx, ry, dz, dy);
        // Near convergence the diagonal spans many orders of magnitude and the
        // bordered reduction loses accuracy that the multiplier updates then
        // amplify. Refine against the exact system; if that stalls, switch to
        // the dense factorization for the rest of this Newton matrix.
        const double target = 1e-12 * std::max(rx.norm() + ry.norm(), 1e-300);
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 8; ++it) {
            Vector hx, ay;
            apply(dz, dy, hx, ay);
            const Vector ex = rx - hx;
            const Vector ey = ry - ay;
            const double r = std::sqrt(ex.squaredNorm() + ey.squaredNorm());
            if (r <= target) return;
            if (r > 0.5 * prev) break;
            prev = r;
            Vector cz, cy;
            solve_once(ex, ey, cz, cy);
            dz += cz;
            dy += cy;
        }
        if (prev > 1e-8 * std::max(rx.norm() + ry.norm(), 1e-300)) {
            if (!dense_) dense_ = std::make_unique<DenseNewtonSolver>(p_);
            dense_->factor(bound_diag_, row_weight_);
            use_dense_ = true;
            dense_->solve(rx, ry, dz, dy);
        }
    }

private:
    // [H A'; A 0] [dz; dy]
    void apply(const Vector& dz, const Vector& dy, Vector& hx, Vector& ay) const {
        const Eigen::Index n = n_;
        const Vector u = dz.head(n) + dz.segment(n, n);
        const Vector gu = gram_ * u;
        hx = (bound_diag_.array() + jitter_).matrix().cwiseProduct(dz);
        hx.head(n) += gu;
        hx.segment(n, n) += gu;
        const double row0 = row_weight_(0) * (dz.segment(n, n).sum() - dz.head(n).sum());
        hx.head(n).array() -= row0;
        hx.segment(n, n).array() += row0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index th = 2 * n + (y_(i) > 0 ? 1 : 0);
            const double ri = row_weight_(1 + i) * (dz(n + i) - w_(i) * dz(th));
            hx(n + i) += ri;
            hx(th) -= w_(i) * ri;
        }
        hx.head(n) += dy(0) * y_;
        hx.segment(n, n) += dy(0) * y_;
        ay.resize(1);
        ay(0) = y_.dot(u);
    }

    void solve_once(const Vector& rx, const Vector& ry, Vector& dz, Vector& dy) const {
        const Eigen::Index n = n_;
        Vector rs(4);
        rs << 0.0, rx(2 * n), rx(2 * n + 1), ry(0);
        const Vector t0 = solve_h0(rx.head(2 * n));
        const Vector v4 = small_lu_.solve(rs - b_.transpose() * t0);
        dz.resize(2 * n + 2);
        dz.head(2 * n) = t0 - hb_ * v4;
        dz(2 * n) = v4(1);
        dz(2 * n + 1) = v4(2);
        dy.resize(1);
        dy(0) = v4(3);
    }

    // (diag(s_inv) + G) v = r
    [[nodiscard]] Vector solve_m(const Vector& r) const {
        if (!low_rank_) {
            return use_ldlt_ ? Vector(ldlt_.solve(r)) : Vector(llt_.solve(r));
        }
        const Matrix& v = *low_rank_;
        auto apply_inverse = [&](const Vector& rhs) {
            const Vector dr = rhs.cwiseQuotient(s_inv_);
            const Vector inner = core_llt_.solve(v.transpose() * dr);
            return Vector(dr - (v * inner).cwiseQuotient(s_inv_));
        };
        Vector x = apply_inverse(r);
        // Refine against the exact Gram matrix; the factor is only accurate
        // to the pivoting tolerance.
        for (int it = 0; it < 2; ++it) {
            const Vector res = r - s_inv_.cwiseProduct(x) - gram_ * x;
            x += apply_inverse(res);
        }
        return x;
    }

    // (diag(d_zeta, d_tau) + E G E') x = r. The sum u = zeta + tau solves
    // (S^-1 + G) u = (d_tau r_zeta + d_zeta r_tau) / (d_zeta + d_tau); each
    // pair is then split through the larger of its two diagonals, since
    // dividing by the smaller one amplifies cancellation in r - G u.
    [[nodiscard]] Vector solve_h0(const Vector& r) const {
        const Eigen::Index n = n_;
        const Vector rz = r.head(n);
        const Vector rt = r.tail(n);
        const Vector rhs = (d_tau_.cwiseProduct(rz) + d_zeta_.cwiseProduct(rt)).cwiseQuotient(d_zeta_ + d_tau_);
        const Vector u = solve_m(rhs);
        const Vector gu = gram_ * u;
        Vector x(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d_zeta_(i) >= d_tau_(i)) {
                x(i) = (rz(i) - gu(i)) / d_zeta_(i);
                x(n + i) = u(i) - x(i);
            } else {
                x(n + i) = (rt(i) - gu(i)) / d_tau_(i);
                x(i) = u(i) - x(n + i);
            }
        }
        return x;
    }

    const QpProblem& p_;
    Eigen::Index n_;
    Matrix gram_;
    double jitter_;
    Vector y_;
    Vector w_;
    std::optional<Matrix> low_rank_;
    Vector bound_diag_, row_weight_;
    Vector d_zeta_, d_tau_, s_inv_;
    Eigen::LLT<Matrix> llt_;
    Eigen::LDLT<Matrix> ldlt_;
    Eigen::LLT<Matrix> core_llt_;
    bool use_ldlt_ = false;
    Matrix b_, hb_;
    Eigen::FullPivLU<Matrix> small_lu_;
    mutable std::unique_ptr<DenseNewtonSolver> dense_;
    mutable bool use_dense_ = false;
};

inline std::unique_ptr<NewtonSolver> make_newton_solver(const QpProblem& p, bool exploit_structure) {
    if (exploit_structure && p.layout.kind == VariableLayout::Kind::CsvmDual && p.layout.n > 0) {
        return std::make_unique<CsvmNewtonSolver>(p);
    }
    return std::make_unique<DenseNewtonSolver>(p);
}

} // namespace csvm::detail
