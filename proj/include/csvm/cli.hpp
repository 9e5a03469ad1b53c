#pragma once

#include "csvm/baselines.hpp"
#include "csvm/datagen.hpp"
#include "csvm/inference.hpp"
#include "csvm/io.hpp"
#include "csvm/oracle.hpp"
#include "csvm/parallel.hpp"
#include "csvm/trainer.hpp"
#include "csvm/tuning.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace csvm::cli {

using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kSchema = 3,
    kMissingColumns = 4,
    kDimension = 5,
    kTraining = 6,
    kIo = 7,
};

/// Header record embedded in every output file.
inline json run_metadata(std::string_view command, std::uint64_t seed, json config) {
    return {{"tool", "csvm"},
            {"version", kToolVersion},
            {"command", command},
            {"prng", kPrngId},
            {"seed", seed},
            {"config", std::move(config)}};
}

/// Maps exceptions to exit codes and prints the message.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const MissingColumnError& e) {
        err << "error: " << e.what() << '\n';
        return kMissingColumns;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kSchema;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kDimension;
    } catch (const TrainingError& e) {
        err << "error: " << e.what() << '\n';
        return kTraining;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

inline Scenario require_scenario(const std::string& name) {
    const auto s = parse_scenario(name);
    if (!s) throw std::invalid_argument("unknown scenario '" + name + "' (expected example1, example2 or example3)");
    return *s;
}

/// "linear", "gaussian-grid", "polynomial-grid" or a comma list of specs.
inline std::vector<KernelSpec> parse_kernel_grid(const std::string& text) {
    if (text == "gaussian-grid") return gaussian_rho_grid();
    if (text == "polynomial-grid") return polynomial_degree_grid();
    std::vector<KernelSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_kernel(item));
    if (out.empty()) throw std::invalid_argument("empty kernel grid");
    return out;
}

inline std::vector<KernelSpec> default_kernel_grid(Scenario s) {
    switch (s) {
    case Scenario::Example1: return {KernelSpec::linear()};
    case Scenario::Example2: return polynomial_degree_grid();
    case Scenario::Example3: return gaussian_rho_grid();
    }
    return {KernelSpec::linear()};
}

inline json kernels_json(const std::vector<KernelSpec>& ks) {
    json a = json::array();
    for (const auto& k : ks) a.push_back(to_string(k));
    return a;
}

inline void check_dims(Eigen::Index expected, Eigen::Index got, std::string_view what) {
    if (expected != got) {
        throw DimensionError(std::string(what) + " has " + std::to_string(got) + " features, expected " +
                             std::to_string(expected));
    }
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string scenario = "example1";
    Eigen::Index n_train = 400;
    Eigen::Index n_tune = 400;
    Eigen::Index n_test = 20000;
    Eigen::Index dims = 0;  // 0: the scenario's default
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

enum DataRole : std::uint64_t { kTrainRole = 0, kTuneRole = 1, kTestRole = 2 };

inline json simulate_config(const SimulateOptions& o, Eigen::Index dims) {
    return {{"scenario", o.scenario}, {"n_train", o.n_train}, {"n_tune", o.n_tune},
            {"n_test", o.n_test},     {"dims", dims},         {"out_dir", o.out_dir}};
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario s = require_scenario(o.scenario);
        const Eigen::Index p = o.dims > 0 ? o.dims : default_dims(s);
        if (o.n_train < 1 || o.n_tune < 0 || o.n_test < 0) throw std::invalid_argument("sample sizes must be >= 0");
        std::error_code ec;
        std::filesystem::create_directories(o.out_dir, ec);
        json meta = run_metadata("simulate", o.seed, simulate_config(o, p));
        json files = json::object();
        auto emit = [&](const char* name, Eigen::Index n, DataRole role) {
            if (n == 0) return;
            const std::string path = (std::filesystem::path(o.out_dir) / name).string();
            json m = meta;
            m["role"] = name;
            write_dataset_csv(path, generate(s, n, p, o.seed, stream_id(0, role)), m);
            files[name] = path;
        };
        emit("train.csv", o.n_train, kTrainRole);
        emit("tune.csv", o.n_tune, kTuneRole);
        emit("test.csv", o.n_test, kTestRole);
        meta["files"] = files;
        out << meta.dump() << '\n';
        return kOk;
    });
}

// ------------------------------------------------------------------- train

struct TrainOptions {
    std::string train_path;
    std::string tune_path;  // optional: enables robust thresholds
    std::string kernel = "linear";
    std::optional<double> lambda;
    std::optional<double> lambda_prime;
    double alpha_neg = 0.05;
    double alpha_pos = 0.05;
    bool adaptive = true;
    int max_outer_iters = 5;
    double weight_tol = 1e-3;
    double qp_tol = 1e-8;
    std::uint64_t seed = 0;
    std::string out_path = "model.txt";
};

inline json trace_json(const TrainingTrace& t) {
    json its = json::array();
    for (const auto& it : t.iterations) {
        its.push_back({{"primal_objective", it.primal_objective},
                       {"dual_objective", it.dual_objective},
                       {"margin", it.margin},
                       {"intercept", it.intercept},
                       {"constraint_neg", it.constraint_neg},
                       {"constraint_pos", it.constraint_pos},
                       {"weight_change", it.weight_change},
                       {"qp_iterations", it.qp_iterations},
                       {"qp_status", to_string(it.qp_status)}});
    }
    return {{"iterations", its}, {"warning", t.warning}, {"warning_message", t.warning_message}};
}

inline int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Dataset train = read_dataset_csv(o.train_path).data;
        std::optional<Dataset> tune;
        if (!o.tune_path.empty()) {
            tune = read_dataset_csv(o.tune_path).data;
            check_dims(train.dims(), tune->dims(), o.tune_path);
        }
        if (o.lambda && o.lambda_prime) throw std::invalid_argument("give --lambda or --lambda-prime, not both");
        TrainConfig cfg;
        cfg.kernel = parse_kernel(o.kernel);
        cfg.lambda_prime = o.lambda_prime ? *o.lambda_prime
                                          : lambda_prime_from_lambda(o.lambda.value_or(1e-2), train.size());
        cfg.targets = NoncoverageTargets(o.alpha_neg, o.alpha_pos);
        cfg.adaptive = o.adaptive;
        cfg.max_outer_iters = o.max_outer_iters;
        cfg.weight_tol = o.weight_tol;
        cfg.qp_tol = o.qp_tol;
        cfg.seed = o.seed;
        const FitResult fit = fit_csvm(train, cfg);

        StoredModel stored;
        stored.model = fit.model;
        if (tune) stored.thresholds = robust_thresholds(score_batch(fit.model, tune->features()), tune->labels(), cfg.targets);
        json config = {{"train", o.train_path},
                       {"tune", o.tune_path},
                       {"kernel", to_string(cfg.kernel)},
                       {"lambda_prime", cfg.lambda_prime},
                       {"targets", to_json(cfg.targets)},
                       {"adaptive", cfg.adaptive},
                       {"max_outer_iters", cfg.max_outer_iters},
                       {"weight_tol", cfg.weight_tol},
                       {"qp_tol", cfg.qp_tol}};
        if (o.lambda) config["lambda"] = *o.lambda;
        stored.metadata = run_metadata("train", o.seed, config);
        write_model(o.out_path, stored);

        json summary = stored.metadata;
        summary["model"] = o.out_path;
        summary["intercept"] = fit.model.intercept;
        summary["margin"] = fit.model.margin;
        summary["trace"] = trace_json(fit.trace);
        if (stored.thresholds) summary["thresholds"] = {stored.thresholds->neg, stored.thresholds->pos};
        out << summary.dump() << '\n';
        return kOk;
    });
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
    std::string model_path;
    std::string oracle;  // scenario name; replaces the model
    std::string test_path;
    std::string mode = "robust";  // robust | margin
    double alpha_neg = 0.05;
    double alpha_pos = 0.05;
    std::int64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string report_path;  // empty: stdout only
};

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (o.model_path.empty() == o.oracle.empty()) throw std::invalid_argument("give exactly one of --model or --oracle");
        const Dataset test = read_dataset_csv(o.test_path).data;
        const NoncoverageTargets targets(o.alpha_neg, o.alpha_pos);
        std::vector<SetLabel> pred;
        json config = {{"test", o.test_path}, {"targets", to_json(targets)}};
        if (!o.oracle.empty()) {
            BayesSpec spec;
            spec.scenario = require_scenario(o.oracle);
            spec.noise_dims = static_cast<int>(test.dims()) - 2;
            if (spec.noise_dims < 0) throw DimensionError(o.test_path + ": oracle needs at least two features");
            spec.mc_samples = o.mc_samples;
            spec.seed = o.seed;
            bayes_thresholds(spec, targets, o.jobs);
            pred = bayes_predict(spec, test.features());
            config["oracle"] = o.oracle;
            config["mc_samples"] = o.mc_samples;
            config["eta_thresholds"] = {spec.t_neg, spec.t_pos};
        } else {
            const StoredModel stored = read_model(o.model_path);
            check_dims(stored.model.dims(), test.dims(), o.test_path);
            const Vector s = score_batch(stored.model, test.features());
            if (o.mode == "robust") {
                if (!stored.thresholds) throw std::invalid_argument("model has no robust thresholds; train with --tune or use --mode margin");
                pred = predict_with_thresholds(s, *stored.thresholds);
            } else if (o.mode == "margin") {
                pred = predict_by_margin(s, stored.model.margin);
            } else {
                throw std::invalid_argument("unknown mode '" + o.mode + "'");
            }
            config["model"] = o.model_path;
            config["mode"] = o.mode;
        }
        json rec = run_metadata("evaluate", o.seed, config);
        rec["report"] = to_json(evaluate(pred, test.labels(), targets));
        if (!o.report_path.empty()) {
            write_file(o.report_path, [&](std::ostream& f) { f << rec.dump() << '\n'; });
        }
        out << rec.dump() << '\n';
        return kOk;
    });
}

// -------------------------------------------------------------------- tune

struct TuneOptions {
    std::string train_path;
    std::string tune_path;
    std::string method = "csvm";
    std::string kernel_grid = "linear";
    std::vector<double> coarse;  // empty: the default 25-point grid
    bool fine = true;
    double alpha_neg = 0.05;
    double alpha_pos = 0.05;
    bool adaptive = true;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string trace_path;  // JSONL, one line per candidate
    std::string out_model;   // csvm only
};

inline json entry_json(Method m, const TraceEntry& e) {
    json j = {{"stage", e.candidate.stage == 0 ? "coarse" : "fine"},
              {"fitted", e.fitted},
              {"warning", e.warning},
              {"ambiguity", e.ambiguity},
              {"noncov_neg", e.noncoverage_neg},
              {"noncov_pos", e.noncoverage_pos},
              {"controlled", e.controlled},
              {"thresholds", {e.thresholds.neg, e.thresholds.pos}}};
    if (m == Method::Knn) {
        j["k"] = e.candidate.k;
    } else {
        j["lambda"] = e.candidate.lambda;
    }
    if (m == Method::Csvm) {
        j["kernel"] = to_string(e.candidate.kernel);
        j["lambda_prime"] = e.candidate.lambda_prime;
    }
    if (!e.error.empty()) j["error"] = e.error;
    return j;
}

inline int cmd_tune(const TuneOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto method = parse_method(o.method);
        if (!method) throw std::invalid_argument("unknown method '" + o.method + "'");
        const Dataset train = read_dataset_csv(o.train_path).data;
        const Dataset tune = read_dataset_csv(o.tune_path).data;
        check_dims(train.dims(), tune.dims(), o.tune_path);
        TuningGrid grid;
        grid.kernels = parse_kernel_grid(o.kernel_grid);
        if (!o.coarse.empty()) grid.coarse = o.coarse;
        if (!o.fine) grid.fine.clear();
        TrainConfig base;
        base.adaptive = o.adaptive;
        const NoncoverageTargets targets(o.alpha_neg, o.alpha_pos);
        const TuneResult r = grid_search(train, tune, targets, *method, grid, base, o.jobs);

        json config = {{"train", o.train_path}, {"tune", o.tune_path}, {"method", o.method},
                       {"kernel_grid", kernels_json(grid.kernels)}, {"coarse", grid.coarse},
                       {"fine", grid.fine}, {"targets", to_json(targets)}, {"adaptive", o.adaptive}};
        const json meta = run_metadata("tune", o.seed, config);
        if (!o.trace_path.empty()) {
            write_file(o.trace_path, [&](std::ostream& f) {
                f << meta.dump() << '\n';
                for (const auto& e : r.trace) f << entry_json(*method, e).dump() << '\n';
            });
        }
        if (!o.out_model.empty()) {
            if (*method != Method::Csvm) throw std::invalid_argument("--out-model is only available for csvm");
            StoredModel stored;
            stored.model = *r.csvm;
            stored.thresholds = r.best().thresholds;
            stored.metadata = meta;
            write_model(o.out_model, stored);
        }
        json summary = meta;
        summary["best"] = entry_json(*method, r.best());
        summary["candidates"] = r.trace.size();
        out << summary.dump() << '\n';
        return kOk;
    });
}

// --------------------------------------------------------------- benchmark

struct BenchmarkOptions {
    std::string scenario = "example1";
    Eigen::Index n_train = 400;
    Eigen::Index n_tune = 400;
    Eigen::Index n_test = 20000;
    Eigen::Index dims = 0;
    int repeats = 20;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::vector<std::string> methods{"csvm", "csvm-margin", "logistic", "knn", "bayes"};
    double alpha_neg = 0.05;
    double alpha_pos = 0.05;
    std::string kernel_grid;     // empty: scenario default
    std::vector<double> coarse;  // empty: default grid
    bool fine = true;
    bool adaptive = true;
    std::int64_t mc_samples = 1'000'000;
    std::string out_prefix = "benchmark";
};

struct RepeatRow {
    int repeat = 0;
    std::string method;
    EvalReport report;
    json selected;  // tuned hyper-parameters
};

struct AggregateRow {
    std::string method;
    int repeats = 0;
    double mean_noncov_neg = 0.0, mean_noncov_pos = 0.0, mean_ambiguity = 0.0;
    double se_noncov_neg = 0.0, se_noncov_pos = 0.0, se_ambiguity = 0.0;
    double success_rate = 0.0;
};

struct BenchmarkResult {
    json metadata;
    std::vector<RepeatRow> rows;  // repeat-major, methods in option order
    std::vector<AggregateRow> aggregate;
    std::optional<BayesSpec> bayes;
};

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m{"csvm", "csvm-margin", "logistic", "knn", "bayes"};
    return m;
}

inline json benchmark_config(const BenchmarkOptions& o, Eigen::Index p, const std::vector<KernelSpec>& kernels,
                             const TuningGrid& grid) {
    // The worker count is left out on purpose: results do not depend on it.
    return {{"scenario", o.scenario},
            {"n_train", o.n_train},
            {"n_tune", o.n_tune},
            {"n_test", o.n_test},
            {"dims", p},
            {"repeats", o.repeats},
            {"methods", o.methods},
            {"targets", {{"alpha_neg", o.alpha_neg}, {"alpha_pos", o.alpha_pos}}},
            {"kernel_grid", kernels_json(kernels)},
            {"coarse", grid.coarse},
            {"fine", grid.fine},
            {"k_values", grid.k_values},
            {"adaptive", o.adaptive},
            {"mc_samples", o.mc_samples}};
}

inline std::vector<AggregateRow> aggregate_rows(const std::vector<RepeatRow>& rows,
                                                const std::vector<std::string>& methods) {
    std::vector<AggregateRow> out;
    for (const auto& m : methods) {
        std::vector<const EvalReport*> rs;
        for (const auto& r : rows) {
            if (r.method == m) rs.push_back(&r.report);
        }
        AggregateRow a;
        a.method = m;
        a.repeats = static_cast<int>(rs.size());
        if (rs.empty()) {
            out.push_back(a);
            continue;
        }
        auto stats = [&](auto get, double& mean, double& se) {
            double s = 0.0;
            for (const auto* r : rs) s += get(*r);
            mean = s / static_cast<double>(rs.size());
            double ss = 0.0;
            for (const auto* r : rs) ss += (get(*r) - mean) * (get(*r) - mean);
            se = rs.size() > 1 ? std::sqrt(ss / static_cast<double>(rs.size() - 1) / static_cast<double>(rs.size())) : 0.0;
        };
        stats([](const EvalReport& r) { return r.noncoverage_neg.value_or(std::nan("")); }, a.mean_noncov_neg, a.se_noncov_neg);
        stats([](const EvalReport& r) { return r.noncoverage_pos.value_or(std::nan("")); }, a.mean_noncov_pos, a.se_noncov_pos);
        stats([](const EvalReport& r) { return r.ambiguity; }, a.mean_ambiguity, a.se_ambiguity);
        int ok = 0;
        for (const auto* r : rs) ok += r->success;
        a.success_rate = static_cast<double>(ok) / static_cast<double>(rs.size());
        out.push_back(a);
    }
    return out;
}

/// Repeats the simulation protocol: per repeat, fresh train/tune/test draws,
/// tuning of each method on train/tune, robust calibration on tune and
/// evaluation on test. Repeats are independent and may run concurrently;
/// results are ordered by repeat index.
inline BenchmarkResult run_benchmark(const BenchmarkOptions& o) {
    const Scenario s = require_scenario(o.scenario);
    const Eigen::Index p = o.dims > 0 ? o.dims : default_dims(s);
    if (o.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (o.n_train < 2 || o.n_tune < 2 || o.n_test < 1) throw std::invalid_argument("benchmark sample sizes too small");
    for (const auto& m : o.methods) {
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
            throw std::invalid_argument("unknown benchmark method '" + m + "'");
        }
    }
    const NoncoverageTargets targets(o.alpha_neg, o.alpha_pos);
    const std::vector<KernelSpec> kernels = o.kernel_grid.empty() ? default_kernel_grid(s) : parse_kernel_grid(o.kernel_grid);
    TuningGrid grid;
    grid.kernels = kernels;
    if (!o.coarse.empty()) grid.coarse = o.coarse;
    if (!o.fine) grid.fine.clear();
    TrainConfig base;
    base.adaptive = o.adaptive;

    BenchmarkResult res;
    res.metadata = run_metadata("benchmark", o.seed, benchmark_config(o, p, kernels, grid));
    if (std::find(o.methods.begin(), o.methods.end(), "bayes") != o.methods.end()) {
        BayesSpec spec;
        spec.scenario = s;
        spec.noise_dims = static_cast<int>(p) - 2;
        spec.mc_samples = o.mc_samples;
        spec.seed = o.seed;
        bayes_thresholds(spec, targets, o.jobs);
        res.bayes = spec;
    }

    std::vector<std::vector<RepeatRow>> per_repeat(static_cast<std::size_t>(o.repeats));
    parallel_for(per_repeat.size(), o.jobs, [&](std::size_t r) {
        const auto rep = static_cast<std::uint64_t>(r);
        const Dataset train = generate(s, o.n_train, p, o.seed, stream_id(rep, kTrainRole));
        const Dataset tune = generate(s, o.n_tune, p, o.seed, stream_id(rep, kTuneRole));
        const Dataset test = generate(s, o.n_test, p, o.seed, stream_id(rep, kTestRole));

        std::optional<TuneResult> csvm_tuned;
        auto tuned_csvm = [&]() -> const TuneResult& {
            if (!csvm_tuned) csvm_tuned = grid_search(train, tune, targets, Method::Csvm, grid, base, 1);
            return *csvm_tuned;
        };
        for (const auto& m : o.methods) {
            RepeatRow row;
            row.repeat = static_cast<int>(r);
            row.method = m;
            std::vector<SetLabel> pred;
            if (m == "csvm" || m == "csvm-margin") {
                const TuneResult& t = tuned_csvm();
                const Vector sc = score_batch(*t.csvm, test.features());
                pred = m == "csvm" ? predict_with_thresholds(sc, t.best().thresholds)
                                   : predict_by_margin(sc, t.csvm->margin);
                row.selected = {{"kernel", to_string(t.best().candidate.kernel)},
                                {"lambda", t.best().candidate.lambda},
                                {"margin", t.csvm->margin}};
            } else if (m == "logistic") {
                const TuneResult t = grid_search(train, tune, targets, Method::Logistic, grid, base, 1);
                pred = predict_with_thresholds(t.logistic->score_batch(test.features()), t.best().thresholds);
                row.selected = {{"lambda", t.best().candidate.lambda}};
            } else if (m == "knn") {
                const TuneResult t = grid_search(train, tune, targets, Method::Knn, grid, base, 1);
                pred = predict_with_thresholds(t.knn->score_batch(test.features()), t.best().thresholds);
                row.selected = {{"k", t.best().candidate.k}};
            } else {
                pred = bayes_predict(*res.bayes, test.features());
                row.selected = {{"eta_thresholds", {res.bayes->t_neg, res.bayes->t_pos}}};
            }
            row.report = evaluate(pred, test.labels(), targets);
            per_repeat[r].push_back(std::move(row));
        }
    });
    for (auto& v : per_repeat) {
        for (auto& row : v) res.rows.push_back(std::move(row));
    }
    res.aggregate = aggregate_rows(res.rows, o.methods);
    return res;
}

inline json row_json(const RepeatRow& r) {
    json j = {{"kind", "repeat"}, {"repeat", r.repeat}, {"method", r.method}};
    j["report"] = to_json(r.report);
    j["selected"] = r.selected;
    return j;
}

inline json aggregate_json(const AggregateRow& a, Eigen::Index n_train) {
    return {{"kind", "aggregate"},
            {"method", a.method},
            {"n", n_train},
            {"repeats", a.repeats},
            {"mean_noncov_neg", a.mean_noncov_neg},
            {"mean_noncov_pos", a.mean_noncov_pos},
            {"mean_ambiguity", a.mean_ambiguity},
            {"stderr_noncov_neg", a.se_noncov_neg},
            {"stderr_noncov_pos", a.se_noncov_pos},
            {"stderr_ambiguity", a.se_ambiguity},
            {"success_rate", a.success_rate}};
}

/// Writes <prefix>.jsonl (metadata, per-repeat rows, aggregate rows),
/// <prefix>_aggregate.jsonl (metadata and aggregate rows) and
/// <prefix>_plot.csv.
inline int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const BenchmarkResult r = run_benchmark(o);
        const std::filesystem::path prefix(o.out_prefix);
        if (prefix.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(prefix.parent_path(), ec);
        }
        write_file(o.out_prefix + ".jsonl", [&](std::ostream& f) {
            f << r.metadata.dump() << '\n';
            for (const auto& row : r.rows) f << row_json(row).dump() << '\n';
            for (const auto& a : r.aggregate) f << aggregate_json(a, o.n_train).dump() << '\n';
        });
        write_file(o.out_prefix + "_aggregate.jsonl", [&](std::ostream& f) {
            f << r.metadata.dump() << '\n';
            for (const auto& a : r.aggregate) f << aggregate_json(a, o.n_train).dump() << '\n';
        });
        write_file(o.out_prefix + "_plot.csv", [&](std::ostream& f) {
            f << "# " << r.metadata.dump() << '\n';
            f << "n,method,noncov_neg,noncov_pos,ambiguity,stderr_noncov_neg,stderr_noncov_pos,stderr_ambiguity\n";
            for (const auto& a : r.aggregate) {
                f << o.n_train << ',' << a.method << ',' << format_double(a.mean_noncov_neg) << ','
                  << format_double(a.mean_noncov_pos) << ',' << format_double(a.mean_ambiguity) << ','
                  << format_double(a.se_noncov_neg) << ',' << format_double(a.se_noncov_pos) << ','
                  << format_double(a.se_ambiguity) << '\n';
            }
        });
        for (const auto& a : r.aggregate) out << aggregate_json(a, o.n_train).dump() << '\n';
        return kOk;
    });
}

// ------------------------------------------------------------ oracle/theory

struct OracleOptions {
    std::string scenario = "example1";
    double alpha_neg = 0.05;
    double alpha_pos = 0.05;
    std::int64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::int64_t eval_samples = 0;  // >0: also report Bayes rule rates on fresh draws
};

inline int cmd_oracle(const OracleOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        BayesSpec spec;
        spec.scenario = require_scenario(o.scenario);
        spec.mc_samples = o.mc_samples;
        spec.seed = o.seed;
        const NoncoverageTargets targets(o.alpha_neg, o.alpha_pos);
        bayes_thresholds(spec, targets, o.jobs);
        json rec = run_metadata("oracle", o.seed,
                                {{"scenario", o.scenario}, {"targets", to_json(targets)}, {"mc_samples", o.mc_samples},
                                 {"eval_samples", o.eval_samples}});
        rec["t_neg"] = spec.t_neg;
        rec["t_pos"] = spec.t_pos;
        if (o.eval_samples > 0) {
            rec["report"] = to_json(bayes_mc_evaluate(spec, targets, o.eval_samples, o.seed + 1, o.jobs));
        }
        out << rec.dump() << '\n';
        return kOk;
    });
}

struct TheoryOptions {
    double s = 1.0;
    double r = 1.0;
    double c = 0.1;
    double zeta = 0.05;
    Eigen::Index n_j = 100;
    double empirical = 0.0;
};

inline int cmd_theory(const TheoryOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const TheoryParams t(o.s, o.r, o.c, o.zeta);
        const TheoryConstants k = theory_constants(t);
        json rec = {{"tool", "csvm"},
                    {"version", kToolVersion},
                    {"command", "theory"},
                    {"config", {{"s", o.s}, {"r", o.r}, {"c", o.c}, {"zeta", o.zeta}, {"n_j", o.n_j}, {"empirical", o.empirical}}},
                    {"noncoverage_bound", noncoverage_bound(t, o.n_j, o.empirical)},
                    {"c_prime", k.c_prime},
                    {"kappa", k.kappa}};
        out << rec.dump() << '\n';
        return kOk;
    });
}

} // namespace csvm::cli
