#pragma once

#include "csvm/baselines.hpp"
#include "csvm/inference.hpp"
#include "csvm/kernel.hpp"
#include "csvm/parallel.hpp"
#include "csvm/trainer.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace csvm {

enum class Method : std::uint8_t { Csvm, Logistic, Knn };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::Csvm: return "csvm";
    case Method::Logistic: return "logistic";
    case Method::Knn: return "knn";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "csvm") return Method::Csvm;
    if (s == "logistic") return Method::Logistic;
    if (s == "knn") return Method::Knn;
    return std::nullopt;
}

/// 10^-8, 10^-7.5, ..., 10^4 (25 values).
inline std::vector<double> coarse_lambda_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 24; ++i) g.push_back(std::pow(10.0, -8.0 + 0.5 * i));
    return g;
}

/// 10^-0.5, 10^-0.4, ..., 10^0.5 (11 multipliers; the middle one is exactly 1).
inline std::vector<double> fine_lambda_factors() {
    std::vector<double> g;
    for (int i = -5; i <= 5; ++i) g.push_back(i == 0 ? 1.0 : std::pow(10.0, 0.1 * i));
    return g;
}

inline std::vector<KernelSpec> gaussian_rho_grid() {
    std::vector<KernelSpec> g;
    for (double e : {-0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0}) g.push_back(KernelSpec::gaussian(std::pow(10.0, e)));
    return g;
}

inline std::vector<KernelSpec> polynomial_degree_grid() {
    return {KernelSpec::polynomial(2), KernelSpec::polynomial(3), KernelSpec::polynomial(4)};
}

/// Odd neighbourhood sizes spread roughly geometrically; values above the
/// training size are dropped at search time.
inline std::vector<int> default_k_grid() { return {1, 3, 5, 7, 9, 13, 19, 27, 39, 55, 79, 111, 155, 199}; }

struct TuningGrid {
    std::vector<KernelSpec> kernels{KernelSpec::linear()};
    std::vector<double> coarse = coarse_lambda_grid();
    std::vector<double> fine = fine_lambda_factors();  // empty skips the second step
    std::vector<int> k_values = default_k_grid();
};

/// Penalty in the averaged-loss form maps to lambda' = 1 / (2 n lambda).
inline double lambda_prime_from_lambda(double lambda, Eigen::Index n) {
    return 1.0 / (2.0 * static_cast<double>(n) * lambda);
}

struct Candidate {
    KernelSpec kernel;
    double lambda = 0.0;        // csvm and logistic
    double lambda_prime = 0.0;  // csvm only
    int k = 0;                  // knn only
    int stage = 0;              // 0 coarse, 1 fine
};

struct TraceEntry {
    Candidate candidate;
    bool fitted = false;
    std::string error;
    bool warning = false;  // fit returned with a convergence warning
    Thresholds thresholds;
    double ambiguity = 1.0;
    double noncoverage_neg = 1.0;
    double noncoverage_pos = 1.0;
    bool controlled = false;
};

/// Fitted winner: only the member matching the method is set.
struct TuneResult {
    Method method = Method::Csvm;
    std::size_t best_index = 0;
    std::vector<TraceEntry> trace;
    std::optional<CsvmModel> csvm;
    std::optional<TrainingTrace> csvm_trace;
    std::optional<LogisticModel> logistic;
    std::optional<KnnModel> knn;

    [[nodiscard]] const TraceEntry& best() const { return trace[best_index]; }
};

namespace detail {

/// Controlled beats uncontrolled, then smaller ambiguity, then more
/// regularisation (larger lambda, larger k).
inline bool better_entry(const TraceEntry& a, const TraceEntry& b) {
    if (a.fitted != b.fitted) return a.fitted;
    if (a.controlled != b.controlled) return a.controlled;
    if (a.ambiguity != b.ambiguity) return a.ambiguity < b.ambiguity;
    if (a.candidate.lambda != b.candidate.lambda) return a.candidate.lambda > b.candidate.lambda;
    return a.candidate.k > b.candidate.k;
}

inline void score_entry(TraceEntry& e, const Vector& tune_scores, const Dataset& tune,
                        const NoncoverageTargets& targets) {
    e.thresholds = robust_thresholds(tune_scores, tune.labels(), targets);
    const EvalReport r = evaluate(predict_with_thresholds(tune_scores, e.thresholds), tune.labels(), targets);
    e.ambiguity = r.ambiguity;
    e.noncoverage_neg = *r.noncoverage_neg;
    e.noncoverage_pos = *r.noncoverage_pos;
    e.controlled = r.success;
    e.fitted = true;
}

struct CsvmFit {
    Vector coefficients;
    double intercept = 0.0;
    double margin = 0.0;
    Vector weights;
    TrainingTrace trace;
};

} // namespace detail

/// Fits one candidate and returns its tuning-set evaluation. Exposed so a
/// trace entry can be replayed.
inline TraceEntry evaluate_candidate(Method method, const Candidate& c, const Dataset& train, const Dataset& tune,
                                     const NoncoverageTargets& targets, const TrainConfig& base) {
    TraceEntry e;
    e.candidate = c;
    try {
        switch (method) {
        case Method::Csvm: {
            TrainConfig cfg = base;
            cfg.kernel = c.kernel;
            cfg.lambda_prime = c.lambda_prime;
            cfg.targets = targets;
            const FitResult fit = fit_csvm(train, cfg);
            e.warning = fit.trace.warning;
            detail::score_entry(e, score_batch(fit.model, tune.features()), tune, targets);
            break;
        }
        case Method::Logistic: {
            const LogisticModel m = fit_ridge_logistic(train, c.lambda);
            e.warning = m.warning;
            detail::score_entry(e, m.score_batch(tune.features()), tune, targets);
            break;
        }
        case Method::Knn:
            detail::score_entry(e, fit_knn(train, c.k).score_batch(tune.features()), tune, targets);
            break;
        }
    } catch (const std::exception& ex) {
        e.fitted = false;
        e.error = ex.what();
    }
    return e;
}

/// Two-step search: for each kernel a coarse lambda sweep, then a fine sweep
/// around the coarse winner. kNN sweeps k once. Every candidate is trained
/// on `train`, calibrated on `tune` and judged by its tuning ambiguity among
/// those whose tuning non-coverage is within target.
inline TuneResult grid_search(const Dataset& train, const Dataset& tune, const NoncoverageTargets& targets,
                              Method method, const TuningGrid& grid, const TrainConfig& base = {}, int jobs = 1) {
    train.require_both_classes("grid_search(train)");
    tune.require_both_classes("grid_search(tune)");
    if (train.dims() != tune.dims()) throw std::invalid_argument("grid_search: train and tune dimensions differ");

    TuneResult out;
    out.method = method;
    const Eigen::Index n = train.size();

    // Per-kernel Gram and tuning cross-kernel, shared across all lambdas.
    struct KernelCache {
        Matrix gram;
        Matrix cross;
    };

    auto run_stage = [&](const std::vector<Candidate>& cands, const KernelCache* cache,
                         std::vector<detail::CsvmFit>* fits) {
        std::vector<TraceEntry> entries(cands.size());
        if (fits) fits->assign(cands.size(), {});
        parallel_for(cands.size(), jobs, [&](std::size_t i) {
            const Candidate& c = cands[i];
            if (method != Method::Csvm) {
                entries[i] = evaluate_candidate(method, c, train, tune, targets, base);
                return;
            }
            TraceEntry& e = entries[i];
            e.candidate = c;
            try {
                TrainConfig cfg = base;
                cfg.kernel = c.kernel;
                cfg.lambda_prime = c.lambda_prime;
                cfg.targets = targets;
                FitResult fit = fit_csvm(train, cache->gram, cfg);
                e.warning = fit.trace.warning;
                const Vector s = (cache->cross * fit.model.coefficients).array() + fit.model.intercept;
                detail::score_entry(e, s, tune, targets);
                (*fits)[i] = {fit.model.coefficients, fit.model.intercept, fit.model.margin, fit.model.weights_final,
                              std::move(fit.trace)};
            } catch (const std::exception& ex) {
                e.fitted = false;
                e.error = ex.what();
            }
        });
        return entries;
    };

    std::optional<detail::CsvmFit> best_fit;
    auto consider = [&](std::vector<TraceEntry>& entries, std::vector<detail::CsvmFit>* fits) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            out.trace.push_back(std::move(entries[i]));
            const std::size_t idx = out.trace.size() - 1;
            if (idx == 0 || detail::better_entry(out.trace[idx], out.trace[out.best_index])) {
                out.best_index = idx;
                if (fits) best_fit = std::move((*fits)[i]);
            }
        }
    };
    auto stage_best = [](const std::vector<TraceEntry>& entries) {
        std::size_t b = 0;
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (detail::better_entry(entries[i], entries[b])) b = i;
        }
        return b;
    };

    if (method == Method::Knn) {
        std::vector<Candidate> cands;
        for (int k : grid.k_values) {
            if (k >= 1 && k <= n) cands.push_back({KernelSpec::linear(), 0.0, 0.0, k, 0});
        }
        if (cands.empty()) throw std::invalid_argument("grid_search: no k value fits the training size");
        auto entries = run_stage(cands, nullptr, nullptr);
        consider(entries, nullptr);
    } else {
        if (grid.coarse.empty()) throw std::invalid_argument("grid_search: empty lambda grid");
        const std::vector<KernelSpec> kernels =
            method == Method::Csvm ? grid.kernels : std::vector<KernelSpec>{KernelSpec::linear()};
        if (kernels.empty()) throw std::invalid_argument("grid_search: empty kernel grid");
        for (const KernelSpec& kernel : kernels) {
            KernelCache cache;
            if (method == Method::Csvm) {
                cache.gram = gram_matrix(kernel, train.features());
                cache.cross = cross_kernel(kernel, tune.features(), train.features());
            }
            auto make = [&](double lambda, int stage) {
                return Candidate{kernel, lambda, lambda_prime_from_lambda(lambda, n), 0, stage};
            };
            std::vector<Candidate> coarse;
            for (double l : grid.coarse) coarse.push_back(make(l, 0));
            std::vector<detail::CsvmFit> fits;
            auto entries = run_stage(coarse, &cache, method == Method::Csvm ? &fits : nullptr);
            const double lambda1 = coarse[stage_best(entries)].lambda;
            consider(entries, method == Method::Csvm ? &fits : nullptr);
            if (!grid.fine.empty()) {
                std::vector<Candidate> fine;
                for (double f : grid.fine) fine.push_back(make(lambda1 * f, 1));
                auto fine_entries = run_stage(fine, &cache, method == Method::Csvm ? &fits : nullptr);
                consider(fine_entries, method == Method::Csvm ? &fits : nullptr);
            }
        }
    }

    const TraceEntry& best = out.best();
    if (!best.fitted) {
        std::string msg = "grid_search: every candidate failed";
        for (const auto& e : out.trace) msg += "; " + e.error;
        throw TrainingError(msg);
    }
    switch (method) {
    case Method::Csvm: {
        CsvmModel m;
        m.coefficients = best_fit->coefficients;
        m.intercept = best_fit->intercept;
        m.margin = best_fit->margin;
        m.kernel = best.candidate.kernel;
        m.support_features = train.features();
        m.support_labels = train.labels();
        m.weights_final = best_fit->weights;
        out.csvm_trace = best_fit->trace;
        out.csvm = std::move(m);
        break;
    }
    case Method::Logistic: out.logistic = fit_ridge_logistic(train, best.candidate.lambda); break;
    case Method::Knn: out.knn = fit_knn(train, best.candidate.k); break;
    }
    return out;
}

} // namespace csvm
