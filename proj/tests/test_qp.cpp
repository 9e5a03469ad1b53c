#include "csvm/kernel.hpp"
#include "csvm/qp.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace csvm;

namespace {

QpProblem random_csvm_dual(std::mt19937_64& rng, Eigen::Index n, const KernelSpec& kernel, double lambda_prime,
                           double alpha, bool random_weights) {
    const Matrix x = oracle_test::random_matrix(rng, n, 3);
    const auto y = oracle_test::random_labels(rng, static_cast<std::size_t>(n));
    Vector w = Vector::Ones(n);
    if (random_weights) {
        std::uniform_real_distribution<double> u(0.2, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
    }
    const auto n_pos = std::count(y.begin(), y.end(), 1);
    return assemble_dual(gram_matrix(kernel, x), y, w, lambda_prime, NoncoverageTargets(alpha, alpha),
                         static_cast<Eigen::Index>(y.size()) - n_pos, n_pos);
}

} // namespace

TEST(SolveQp, SeparableQuadratic) {
    QpProblem p = QpProblem::unconstrained(Matrix::Identity(2, 2), Vector::Constant(2, -1.0));
    p.lower.setZero();
    const QpSolution s = solve_qp(p, 1e-10);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    EXPECT_NEAR(s.z(0), 1.0, 1e-8);
    EXPECT_NEAR(s.z(1), 1.0, 1e-8);
    EXPECT_NEAR(s.objective, -1.0, 1e-8);
}

TEST(SolveQp, LinearObjectivePushedToLowerBound) {
    QpProblem p = QpProblem::unconstrained(Matrix::Zero(1, 1), Vector::Constant(1, 1.0));
    p.lower(0) = 0.0;
    p.upper(0) = 5.0;
    const QpSolution s = solve_qp(p, 1e-10);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    EXPECT_NEAR(s.z(0), 0.0, 1e-8);
}

TEST(SolveQp, TwoPointCsvmMatchesFullGridSearch) {
    Matrix x(2, 1);
    x << 1, -1;
    const std::vector<Label> y{1, -1};
    const Vector w = Vector::Ones(2);
    const Matrix g = gram_matrix(KernelSpec::linear(), x);
    const QpProblem p = assemble_dual(g, y, w, 1.0, NoncoverageTargets(0.5, 0.5), 1, 1);
    const QpSolution s = solve_qp(p, 1e-10);
    ASSERT_EQ(s.status, QpStatus::Optimal);

    // Grid over (zeta_1, tau_1, tau_2, theta_-1, theta_+1); zeta_2 follows
    // from the equality row y'(zeta + tau) = 0.
    auto dual = [&](const std::vector<double>& v) {
        const double z1 = v[0], t1 = v[1], t2 = v[2], thn = v[3], thp = v[4];
        const double z2 = z1 + t1 - t2;  // y = (+1, -1)
        if (z2 < 0.0 || z2 > 1.0) return std::numeric_limits<double>::infinity();
        if (t1 > thp || t2 > thn) return std::numeric_limits<double>::infinity();
        if (z1 + z2 - t1 - t2 < 0.0) return std::numeric_limits<double>::infinity();
        const double u1 = z1 + t1, u2 = z2 + t2;
        const double quad = u1 * u1 * g(0, 0) - 2 * u1 * u2 * g(0, 1) + u2 * u2 * g(1, 1);
        return 0.5 * quad - z1 - z2 - t1 - t2 + 0.5 * thn + 0.5 * thp;
    };
    const auto r = oracle_test::refined_grid_min({0, 0, 0, 0, 0}, {1, 2, 2, 2, 2}, dual, 13, 30, 0.2);
    EXPECT_NEAR(s.objective, r.value, 1e-4);

    const double reduced = oracle_test::csvm_dual_bruteforce(g, y, w, 1.0, 0.5, 0.5);
    EXPECT_NEAR(s.objective, reduced, 1e-6);
}

TEST(SolveQp, DetectsInfeasibility) {
    // z >= 0 together with z <= -1.
    QpProblem p = QpProblem::unconstrained(Matrix::Identity(1, 1), Vector::Zero(1));
    p.lower(0) = 0.0;
    p.A_ineq = Matrix::Ones(1, 1);
    p.b_ineq = Vector::Constant(1, -1.0);
    const QpSolution s = solve_qp(p, 1e-8);
    EXPECT_EQ(s.status, QpStatus::Infeasible);
}

TEST(SolveQp, RejectsMalformedProblems) {
    QpProblem p = QpProblem::unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
    p.Q(0, 1) = 1.0;
    EXPECT_THROW(solve_qp(p, 1e-8), std::invalid_argument);
    QpProblem ok = QpProblem::unconstrained(Matrix::Identity(2, 2), Vector::Zero(2));
    EXPECT_THROW(solve_qp(ok, 0.0), std::invalid_argument);
}

TEST(VerifyKkt, OptimalPassesPerturbedFails) {
    std::mt19937_64 rng(2);
    const QpProblem p = random_csvm_dual(rng, 12, KernelSpec::linear(), 1.0, 0.1, false);
    const QpSolution s = solve_qp(p, 1e-9);
    ASSERT_EQ(s.status, QpStatus::Optimal);
    EXPECT_TRUE(verify_kkt(p, s, 1e-8).passed());

    // Move a variable sitting on a bound with a positive multiplier.
    Eigen::Index active = -1;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (s.lower_multipliers(i) > 1e-3 || s.upper_multipliers(i) > 1e-3) {
            active = i;
            break;
        }
    }
    ASSERT_GE(active, 0);
    QpSolution moved = s;
    moved.z(active) += s.upper_multipliers(active) > 1e-3 ? -0.1 : 0.1;
    const KktReport r = verify_kkt(p, moved, 1e-6);
    EXPECT_FALSE(r.complementarity && r.primal_feasibility);
}

TEST(VerifyKkt, OriginWithNegativeLinearTermFailsStationarity) {
    QpProblem p = QpProblem::unconstrained(Matrix::Identity(3, 3), Vector::Constant(3, -2.0));
    QpSolution s;
    s.z = Vector::Zero(3);
    s.eq_multipliers.resize(0);
    s.ineq_multipliers.resize(0);
    s.lower_multipliers = Vector::Zero(3);
    s.upper_multipliers = Vector::Zero(3);
    const KktReport r = verify_kkt(p, s, 1e-6);
    EXPECT_FALSE(r.stationarity);
    EXPECT_TRUE(r.primal_feasibility);
}

TEST(SolveQp, RandomCsvmDualsPassKkt) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> size(2, 40);
    std::uniform_real_distribution<double> lam(-1.0, 1.0);
    const KernelSpec kernels[] = {KernelSpec::linear(), KernelSpec::gaussian(1.5), KernelSpec::polynomial(3)};
    const double alphas[] = {0.05, 0.2, 0.5, 1.0};
    for (int t = 0; t < 30; ++t) {
        const KernelSpec& k = kernels[t % 3];
        const QpProblem p =
            random_csvm_dual(rng, size(rng), k, std::pow(10.0, lam(rng)), alphas[t % 4], t % 2 == 1);
        const QpSolution s = solve_qp(p, 1e-8);
        ASSERT_EQ(s.status, QpStatus::Optimal) << "instance " << t;
        EXPECT_TRUE(verify_kkt(p, s, 1e-6).passed()) << "instance " << t;
        EXPECT_LE(s.kkt_residuals.max(), 1e-8);

        // Final iterates decrease the objective up to tolerance.
        const auto& hist = s.objective_history;
        ASSERT_GE(hist.size(), 5u);
        for (std::size_t i = hist.size() - 4; i < hist.size(); ++i) {
            EXPECT_LE(hist[i], hist[i - 1] + 1e-6 * (1.0 + std::abs(hist[i - 1])));
        }
    }
}

TEST(SolveQp, StructuredAndDenseNewtonAgree) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 6; ++t) {
        const KernelSpec k = t % 2 ? KernelSpec::gaussian(1.0) : KernelSpec::linear();
        const QpProblem p = random_csvm_dual(rng, 25, k, 2.0, 0.1, true);
        QpOptions structured, dense;
        dense.exploit_structure = false;
        const QpSolution a = solve_qp(p, structured);
        const QpSolution b = solve_qp(p, dense);
        ASSERT_EQ(a.status, QpStatus::Optimal);
        ASSERT_EQ(b.status, QpStatus::Optimal);
        EXPECT_NEAR(a.objective, b.objective, 1e-7 * (1.0 + std::abs(a.objective)));
    }
}

TEST(AssembleDual, EqualityPatternSingleton) {
    Matrix g(1, 1);
    g << 2.0;
    const QpProblem p = assemble_dual(g, {-1}, Vector::Ones(1), 1.0, NoncoverageTargets(0.1, 0.1), 1, 0);
    ASSERT_EQ(p.A_eq.cols(), 4);
    EXPECT_EQ(p.A_eq(0, 0), -1.0);
    EXPECT_EQ(p.A_eq(0, 1), -1.0);
    EXPECT_EQ(p.A_eq(0, 2), 0.0);
    EXPECT_EQ(p.A_eq(0, 3), 0.0);
}

TEST(AssembleDual, SignPatternAndLinearTerm) {
    Matrix x(2, 2);
    x << 0.3, -1.2, 0.3, -1.2;
    const Matrix g = gram_matrix(KernelSpec::linear(), x);
    const QpProblem p = assemble_dual(g, {1, -1}, Vector::Ones(2), 3.0, NoncoverageTargets(0.1, 0.2), 1, 1);
    const double k = g(0, 0);
    Matrix expect(2, 2);
    expect << k, -k, -k, k;
    EXPECT_TRUE(p.Q.topLeftCorner(2, 2).isApprox(expect));
    EXPECT_TRUE(p.Q.block(0, 2, 2, 2).isApprox(expect));
    EXPECT_EQ(p.q(0), -1.0);
    EXPECT_EQ(p.q(3), -1.0);
    EXPECT_DOUBLE_EQ(p.q(p.layout.theta(-1)), 0.1);
    EXPECT_DOUBLE_EQ(p.q(p.layout.theta(1)), 0.2);
    EXPECT_EQ(p.upper(0), 3.0);
    EXPECT_TRUE(std::isinf(p.upper(2)));
}

TEST(AssembleDual, UnitWeightsGiveTauBelowTheta) {
    std::mt19937_64 rng(4);
    const QpProblem p = random_csvm_dual(rng, 6, KernelSpec::linear(), 1.0, 0.1, false);
    for (Eigen::Index i = 0; i < 6; ++i) {
        const Eigen::RowVectorXd row = p.A_ineq.row(1 + i);
        EXPECT_EQ(row(p.layout.tau(i)), 1.0);
        EXPECT_EQ(row.cwiseAbs().sum(), 2.0);
        const Label yi = static_cast<Label>(p.A_eq(0, i));
        EXPECT_EQ(row(p.layout.theta(yi)), -1.0);
    }
    EXPECT_EQ(p.A_ineq.row(0).head(6).sum(), -6.0);
    EXPECT_EQ(p.A_ineq.row(0).segment(6, 6).sum(), 6.0);
}

TEST(AssembleDual, Errors) {
    Matrix g = Matrix::Identity(2, 2);
    EXPECT_THROW(assemble_dual(g, {1, -1}, Vector::Ones(2), 0.0, {}, 1, 1), std::invalid_argument);
    EXPECT_THROW(assemble_dual(g, {1, -1}, Vector::Constant(2, 1.5), 1.0, {}, 1, 1), std::invalid_argument);
    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;  // eigenvalues 3 and -1
    try {
        assemble_dual(bad, {1, -1}, Vector::Ones(2), 1.0, {}, 1, 1);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("-1"), std::string::npos);
    }
}

TEST(LowRankFactor, ReconstructsLinearGram) {
    std::mt19937_64 rng(5);
    const Matrix x = oracle_test::random_matrix(rng, 30, 3);
    const Matrix g = gram_matrix(KernelSpec::linear(), x);
    const auto v = detail::low_rank_factor(g, 7);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->cols(), 3);
    EXPECT_LE((g - *v * v->transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_FALSE(detail::low_rank_factor(gram_matrix(KernelSpec::gaussian(0.5), x), 7).has_value());
}
