#pragma once

#include "csvm/core.hpp"
#include "csvm/datagen.hpp"
#include "csvm/inference.hpp"
#include "csvm/parallel.hpp"
#include "csvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace csvm {

/// Bayes rule for one simulation scenario. Thresholds live on the eta scale
/// and are filled by bayes_thresholds.
struct BayesSpec {
    Scenario scenario = Scenario::Example1;
    int noise_dims = 0;
    double t_neg = 1.0;
    double t_pos = 0.0;
    std::int64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    bool calibrated = false;
};

/// P(Y = 1 | x) from the signal coordinates x(0), x(1); noise columns have
/// the same law in both classes and cancel.
inline double eta(Scenario s, double x1, double x2) {
    switch (s) {
    case Scenario::Example1: {
        auto log_density = [&](const double* mu, const double* var) {
            const double d0 = x1 - mu[0];
            const double d1 = x2 - mu[1];
            return -0.5 * (d0 * d0 / var[0] + d1 * d1 / var[1]) - 0.5 * std::log(var[0] * var[1]);
        };
        const double diff = log_density(example1::kMeanNeg, example1::kVarNeg) -
                            log_density(example1::kMeanPos, example1::kVarPos);
        return 1.0 / (1.0 + std::exp(diff));
    }
    case Scenario::Example2: return example2_eta(x1, x2);
    case Scenario::Example3: {
        // Both radial laws have planar density 1 / (1.2 * 2 pi r) on their
        // supports, so eta is the share of supports containing r. Beyond
        // r = 2 neither class has mass; it is assigned to class +1.
        const double r = std::hypot(x1, x2);
        const bool neg = r <= 1.2;
        const bool pos = r >= 0.8;
        if (neg && pos) return 0.5;
        return pos ? 1.0 : 0.0;
    }
    }
    return 0.5;
}

template <class Derived>
double eta(const BayesSpec& spec, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() < 2) throw std::invalid_argument("eta: at least two signal coordinates required");
    if (spec.noise_dims > 0 && x.size() != 2 + spec.noise_dims) {
        throw std::invalid_argument("eta: point has " + std::to_string(x.size()) + " coordinates, expected " +
                                    std::to_string(2 + spec.noise_dims));
    }
    return eta(spec.scenario, x(0), x(1));
}

namespace detail {

inline constexpr std::size_t kMcShards = 64;
inline constexpr std::uint64_t kMcStreamBase = std::uint64_t{1} << 40;

/// Class-conditional eta samples drawn in a fixed number of shards, each
/// with its own stream, concatenated in shard order. The result does not
/// depend on how many workers process the shards.
template <class Draw, class Eta>
void mc_eta_samples(Draw&& draw, Eta&& eta_fn, std::int64_t samples, std::uint64_t seed, int jobs,
                    std::vector<double>& neg, std::vector<double>& pos) {
    if (samples < 1) throw std::invalid_argument("Monte Carlo sample count must be >= 1");
    const auto total = static_cast<std::size_t>(samples);
    std::vector<std::vector<double>> shard_neg(kMcShards), shard_pos(kMcShards);
    parallel_for(kMcShards, jobs, [&](std::size_t k) {
        const std::size_t count = total / kMcShards + (k < total % kMcShards ? 1 : 0);
        Rng rng = make_rng(seed, kMcStreamBase + k);
        shard_neg[k].reserve(count / 2 + 16);
        shard_pos[k].reserve(count / 2 + 16);
        for (std::size_t i = 0; i < count; ++i) {
            const SignalDraw d = draw(rng);
            (d.y > 0 ? shard_pos[k] : shard_neg[k]).push_back(eta_fn(d.x1, d.x2));
        }
    });
    neg.clear();
    pos.clear();
    for (std::size_t k = 0; k < kMcShards; ++k) {
        neg.insert(neg.end(), shard_neg[k].begin(), shard_neg[k].end());
        pos.insert(pos.end(), shard_pos[k].begin(), shard_pos[k].end());
    }
}

} // namespace detail

/// Monte Carlo class-conditional eta quantiles using the same order
/// statistics as robust_thresholds.
template <class Draw, class Eta>
Thresholds mc_eta_thresholds(Draw&& draw, Eta&& eta_fn, std::int64_t samples, std::uint64_t seed,
                             const NoncoverageTargets& targets, int jobs = 1) {
    std::vector<double> neg, pos;
    detail::mc_eta_samples(draw, eta_fn, samples, seed, jobs, neg, pos);
    if (neg.empty() || pos.empty()) throw std::runtime_error("Monte Carlo draw produced a single class");
    Vector scores(static_cast<Eigen::Index>(neg.size() + pos.size()));
    std::vector<Label> labels;
    labels.reserve(neg.size() + pos.size());
    Eigen::Index i = 0;
    for (double v : neg) {
        scores(i++) = v;
        labels.push_back(-1);
    }
    for (double v : pos) {
        scores(i++) = v;
        labels.push_back(1);
    }
    return robust_thresholds(scores, labels, targets);
}

/// Fills spec.t_neg and spec.t_pos from spec.mc_samples draws.
inline Thresholds bayes_thresholds(BayesSpec& spec, const NoncoverageTargets& targets, int jobs = 1) {
    const Scenario s = spec.scenario;
    const Thresholds th = mc_eta_thresholds([s](Rng& rng) { return detail::draw_signal(s, rng); },
                                            [s](double a, double b) { return eta(s, a, b); }, spec.mc_samples,
                                            spec.seed, targets, jobs);
    spec.t_neg = th.neg;
    spec.t_pos = th.pos;
    spec.calibrated = true;
    return th;
}

/// Closed regions: eta > t_neg gives {+1}, eta < t_pos gives {-1}.
inline SetLabel bayes_predict_eta(const BayesSpec& spec, double e) {
    if (!spec.calibrated) throw std::logic_error("bayes_predict: thresholds have not been computed");
    if (e > spec.t_neg) return SetLabel::PosOnly;
    if (e < spec.t_pos) return SetLabel::NegOnly;
    return SetLabel::Both;
}

template <class Derived>
SetLabel bayes_predict(const BayesSpec& spec, const Eigen::MatrixBase<Derived>& x) {
    return bayes_predict_eta(spec, eta(spec, x));
}

inline std::vector<SetLabel> bayes_predict(const BayesSpec& spec, const Matrix& x) {
    std::vector<SetLabel> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = bayes_predict(spec, x.row(i));
    return out;
}

/// Non-coverage and ambiguity of the Bayes rule on fresh Monte Carlo draws.
inline EvalReport bayes_mc_evaluate(const BayesSpec& spec, const NoncoverageTargets& targets,
                                    std::int64_t samples, std::uint64_t seed, int jobs = 1) {
    std::vector<double> neg, pos;
    const Scenario s = spec.scenario;
    detail::mc_eta_samples([s](Rng& rng) { return detail::draw_signal(s, rng); },
                           [s](double a, double b) { return eta(s, a, b); }, samples, seed, jobs, neg, pos);
    std::vector<SetLabel> pred;
    std::vector<Label> labels;
    pred.reserve(neg.size() + pos.size());
    labels.reserve(neg.size() + pos.size());
    for (double e : neg) {
        pred.push_back(bayes_predict_eta(spec, e));
        labels.push_back(-1);
    }
    for (double e : pos) {
        pred.push_back(bayes_predict_eta(spec, e));
        labels.push_back(1);
    }
    return evaluate(pred, labels, targets);
}

/// empirical + 3 sqrt(2 s r log(1/zeta) / n_j) + sqrt(s r / n_j)
inline double noncoverage_bound(const TheoryParams& t, Eigen::Index n_j, double empirical) {
    if (n_j < 1) throw std::invalid_argument("noncoverage_bound: n_j must be >= 1");
    const double sr = t.rkhs_bound * t.kernel_sup;
    const double n = static_cast<double>(n_j);
    return empirical + 3.0 * std::sqrt(2.0 * sr * std::log(1.0 / t.confidence) / n) + std::sqrt(sr) / std::sqrt(n);
}

struct TheoryConstants {
    double c_prime = 0.0;  // excess-risk constant
    double kappa = 0.0;
};

inline TheoryConstants theory_constants(const TheoryParams& t) {
    const double c = t.margin_gap;
    return {1.0 / (4.0 * c * c) + 1.0 / (2.0 * c),
            (6.0 * std::log(1.0 / t.confidence) + 1.0) * std::sqrt(t.rkhs_bound * t.kernel_sup)};
}

} // namespace csvm
