#pragma once

#include "csvm/kernel.hpp"
#include "csvm/model.hpp"
#include "csvm/qp.hpp"
#include "csvm/recover.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csvm {

struct TrainConfig {
    double lambda_prime = 1.0;
    NoncoverageTargets targets;
    KernelSpec kernel;
    bool adaptive = true;
    int max_outer_iters = 5;
    double weight_tol = 1e-3;
    double qp_tol = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
            throw std::invalid_argument("TrainConfig: lambda' must be > 0");
        }
        if (max_outer_iters < 1) throw std::invalid_argument("TrainConfig: max_outer_iters must be >= 1");
        if (!(weight_tol > 0.0)) throw std::invalid_argument("TrainConfig: weight_tol must be > 0");
        if (!(qp_tol > 0.0)) throw std::invalid_argument("TrainConfig: qp_tol must be > 0");
    }
};

struct OuterIteration {
    double primal_objective = 0.0;
    double dual_objective = 0.0;  // QP minimum; primal optimum = -dual_objective
    double margin = 0.0;
    double intercept = 0.0;
    double constraint_neg = 0.0;  // (1/n_-1) sum w_i H_{-eps}(y_i f(x_i)) over class -1
    double constraint_pos = 0.0;
    double weight_change = 0.0;   // max_i |w_i(t+1) - w_i(t)|
    int qp_iterations = 0;
    QpStatus qp_status = QpStatus::Optimal;
};

struct TrainingTrace {
    std::vector<OuterIteration> iterations;
    bool warning = false;
    std::string warning_message;
};

struct FitResult {
    CsvmModel model;
    TrainingTrace trace;
};

/// w_i = 1 / max(1, H_{-eps}(y_i f(x_i))) from decision values f.
inline Vector weights_from_scores(const Vector& f, const std::vector<Label>& labels, double eps) {
    Vector w(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double hinge = shifted_hinge(-eps, labels[static_cast<std::size_t>(i)] * f(i));
        w(i) = 1.0 / std::max(1.0, hinge);
    }
    return w;
}

inline Vector training_scores(const CsvmModel& model, const Matrix& gram) {
    return (gram * model.coefficients).array() + model.intercept;
}

inline Vector compute_weights(const CsvmModel& model, const Dataset& data) {
    if (data.size() != model.support_features.rows() || data.dims() != model.dims()) {
        throw std::invalid_argument("compute_weights: data shape differs from the training set");
    }
    const Matrix k = cross_kernel(model.kernel, data.features(), model.support_features);
    const Vector f = (k * model.coefficients).array() + model.intercept;
    return weights_from_scores(f, data.labels(), model.margin);
}

/// Weighted empirical constraint value (1/n_j) sum_{y_i=j} w_i H_{-eps}(y_i f_i).
inline double weighted_constraint(const Vector& f, const std::vector<Label>& labels, const Vector& w,
                                  double eps, Label cls) {
    double acc = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const Label y = labels[static_cast<std::size_t>(i)];
        if (y != cls) continue;
        acc += w(i) * shifted_hinge(-eps, y * f(i));
        ++count;
    }
    return count ? acc / static_cast<double>(count) : 0.0;
}

/// Adaptive-weight CSVM fit with a precomputed Gram matrix of data.
inline FitResult fit_csvm(const Dataset& data, const Matrix& gram, const TrainConfig& config) {
    config.validate();
    data.require_both_classes("fit_csvm");
    const Eigen::Index n = data.size();
    if (gram.rows() != n || gram.cols() != n) throw std::invalid_argument("fit_csvm: gram size mismatch");
    const Eigen::Index n_neg = data.count(-1);
    const Eigen::Index n_pos = data.count(1);

    QpOptions qp_opts;
    qp_opts.tol = config.qp_tol;

    FitResult result;
    Vector w = Vector::Ones(n);
    const int passes = config.adaptive ? config.max_outer_iters : 1;
    bool have_model = false;

    for (int it = 0; it < passes; ++it) {
        const QpProblem problem =
            assemble_dual(gram, data.labels(), w, config.lambda_prime, config.targets, n_neg, n_pos);
        const QpSolution sol = solve_qp(problem, qp_opts);
        if (sol.status != QpStatus::Optimal) {
            const std::string msg = std::string("QP ended with status ") + std::string(to_string(sol.status)) +
                                    " on outer iteration " + std::to_string(it + 1);
            if (!have_model) {
                throw TrainingError(sol.status == QpStatus::Infeasible ? "targets infeasible: " + msg : msg);
            }
            result.trace.warning = true;
            result.trace.warning_message = msg + "; returning the previous iterate";
            break;
        }

        const Vector c = recover_coefficients(sol, data.labels());
        const Vector h = gram * c;
        const InterceptMargin im =
            solve_intercept_margin(h, data.labels(), w, config.lambda_prime, config.targets, n_neg, n_pos);

        CsvmModel& model = result.model;
        model.coefficients = c;
        model.intercept = im.intercept;
        model.margin = im.margin;
        model.kernel = config.kernel;
        model.weights_final = w;
        have_model = true;

        const Vector f = h.array() + im.intercept;
        OuterIteration rec;
        rec.primal_objective = primal_objective(gram, c, config.lambda_prime, im.xi);
        rec.dual_objective = sol.objective;
        rec.margin = im.margin;
        rec.intercept = im.intercept;
        rec.constraint_neg = weighted_constraint(f, data.labels(), w, im.margin, -1);
        rec.constraint_pos = weighted_constraint(f, data.labels(), w, im.margin, 1);
        rec.qp_iterations = sol.iterations;
        rec.qp_status = sol.status;

        // Weights for the next pass use the freshly recovered eps.
        const Vector w_next = weights_from_scores(f, data.labels(), im.margin);
        rec.weight_change = (w_next - w).cwiseAbs().maxCoeff();
        result.trace.iterations.push_back(rec);
        if (!config.adaptive || rec.weight_change < config.weight_tol) break;
        w = w_next;
    }

    result.model.support_features = data.features();
    result.model.support_labels = data.labels();
    return result;
}

inline FitResult fit_csvm(const Dataset& data, const TrainConfig& config) {
    return fit_csvm(data, gram_matrix(config.kernel, data.features()), config);
}

} // namespace csvm
