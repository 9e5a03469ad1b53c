#pragma once

#include "csvm/qp/problem.hpp"

#include <limits>
#include <sstream>
#include <vector>

namespace csvm {

/// Throws NumericalError if the Gram matrix has an eigenvalue below
/// -1e-8 * trace.
inline void check_psd(const Matrix& gram) {
    const Eigen::Index n = gram.rows();
    if (n == 0) return;
    const double shift = 1e-8 * std::max(gram.trace(), 1e-300);
    Matrix shifted = gram;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) return;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "Gram matrix is not positive semidefinite: smallest eigenvalue " << eig.eigenvalues()(0);
    throw NumericalError(os.str());
}

/// Dual of the CSVM primal in standard QP form:
///
///   min 1/2 (zeta+tau)' G (zeta+tau) - 1'zeta - 1'tau + n_-1 a_-1 th_-1 + n_1 a_1 th_1
///   s.t. y'(zeta + tau) = 0,  1'tau - 1'zeta <= 0,  tau_i - w_i th_{y_i} <= 0,
///        0 <= zeta <= lambda',  tau >= 0,  theta >= 0
///
/// with G_ij = y_i y_j K_ij.
inline QpProblem assemble_dual(const Matrix& gram, const std::vector<Label>& labels, const Vector& weights,
                               double lambda_prime, const NoncoverageTargets& targets, Eigen::Index n_neg,
                               Eigen::Index n_pos) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
        throw std::invalid_argument("assemble_dual: lambda' must be > 0");
    }
    if (gram.rows() != n || gram.cols() != n || weights.size() != n) {
        throw std::invalid_argument("assemble_dual: gram/labels/weights sizes differ");
    }
    Eigen::Index cn = 0, cp = 0;
    for (Label y : labels) (y > 0 ? cp : cn) += 1;
    if (cn != n_neg || cp != n_pos) {
        throw std::invalid_argument("assemble_dual: class counts do not match labels");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(weights(i) > 0.0 && weights(i) <= 1.0)) {
            throw std::invalid_argument("assemble_dual: weights must lie in (0, 1]");
        }
    }
    check_psd(gram);

    const auto layout = VariableLayout::csvm_dual(n);
    const Eigen::Index m = layout.variables();
    const double inf = std::numeric_limits<double>::infinity();

    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)];
    const Matrix g = y.asDiagonal() * gram * y.asDiagonal();

    QpProblem p;
    p.layout = layout;
    p.Q = Matrix::Zero(m, m);
    p.Q.block(0, 0, n, n) = g;
    p.Q.block(0, n, n, n) = g;
    p.Q.block(n, 0, n, n) = g;
    p.Q.block(n, n, n, n) = g;

    p.q = Vector::Constant(m, -1.0);
    p.q(layout.theta(-1)) = static_cast<double>(n_neg) * targets.neg;
    p.q(layout.theta(1)) = static_cast<double>(n_pos) * targets.pos;

    p.A_eq = Matrix::Zero(1, m);
    p.A_eq.block(0, 0, 1, n) = y.transpose();
    p.A_eq.block(0, n, 1, n) = y.transpose();
    p.b_eq = Vector::Zero(1);

    p.A_ineq = Matrix::Zero(n + 1, m);
    p.A_ineq.block(0, 0, 1, n).setConstant(-1.0);
    p.A_ineq.block(0, n, 1, n).setConstant(1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.A_ineq(1 + i, layout.tau(i)) = 1.0;
        p.A_ineq(1 + i, layout.theta(labels[static_cast<std::size_t>(i)])) = -weights(i);
    }
    p.b_ineq = Vector::Zero(n + 1);

    p.lower = Vector::Zero(m);
    p.upper = Vector::Constant(m, inf);
    p.upper.head(n).setConstant(lambda_prime);
    return p;
}

} // namespace csvm
