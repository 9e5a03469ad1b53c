#include "csvm/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_targets(CLI::App* app, double& neg, double& pos) {
    app->add_option("--alpha-neg", neg, "Non-coverage target for class -1")->capture_default_str();
    app->add_option("--alpha-pos", pos, "Non-coverage target for class +1")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    using namespace csvm::cli;
    CLI::App app{"Confidence-set SVM: simulation, training, calibration and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(csvm::kToolVersion));

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate train/tune/test CSVs for a simulation scenario");
    c_sim->add_option("--scenario", sim.scenario, "example1 | example2 | example3")->capture_default_str();
    c_sim->add_option("--n-train", sim.n_train)->capture_default_str();
    c_sim->add_option("--n-tune", sim.n_tune)->capture_default_str();
    c_sim->add_option("--n-test", sim.n_test)->capture_default_str();
    c_sim->add_option("--dims", sim.dims, "Total dimension (0: scenario default)")->capture_default_str();
    c_sim->add_option("--seed", sim.seed)->capture_default_str();
    c_sim->add_option("--out-dir", sim.out_dir)->capture_default_str();

    TrainOptions tr;
    double tr_lambda = 0.0, tr_lambda_prime = 0.0;
    bool tr_no_adaptive = false;
    auto* c_tr = app.add_subcommand("train", "Fit a CSVM model");
    c_tr->add_option("--train", tr.train_path, "Training CSV")->required();
    c_tr->add_option("--tune", tr.tune_path, "Tuning CSV for robust thresholds");
    c_tr->add_option("--kernel", tr.kernel, "linear | gaussian:<rho> | polynomial:<degree>")->capture_default_str();
    auto* o_lambda = c_tr->add_option("--lambda", tr_lambda, "Penalty of the averaged-loss form (default 0.01)");
    auto* o_lambda_prime = c_tr->add_option("--lambda-prime", tr_lambda_prime, "Slack cost of the scaled form");
    o_lambda->excludes(o_lambda_prime);
    add_targets(c_tr, tr.alpha_neg, tr.alpha_pos);
    c_tr->add_flag("--no-adaptive", tr_no_adaptive, "Single pass with unit weights");
    c_tr->add_option("--max-outer-iters", tr.max_outer_iters)->capture_default_str();
    c_tr->add_option("--weight-tol", tr.weight_tol)->capture_default_str();
    c_tr->add_option("--qp-tol", tr.qp_tol)->capture_default_str();
    c_tr->add_option("--seed", tr.seed)->capture_default_str();
    c_tr->add_option("--out", tr.out_path, "Model file")->capture_default_str();

    EvaluateOptions ev;
    ev.jobs = csvm::default_jobs();
    auto* c_ev = app.add_subcommand("evaluate", "Evaluate a model or the Bayes oracle on a test CSV");
    auto* o_model = c_ev->add_option("--model", ev.model_path, "Model file");
    auto* o_oracle = c_ev->add_option("--oracle", ev.oracle, "Use the Bayes rule of a scenario instead of a model");
    o_model->excludes(o_oracle);
    c_ev->add_option("--test", ev.test_path, "Test CSV")->required();
    c_ev->add_option("--mode", ev.mode, "robust | margin")->capture_default_str();
    add_targets(c_ev, ev.alpha_neg, ev.alpha_pos);
    c_ev->add_option("--mc-samples", ev.mc_samples)->capture_default_str();
    c_ev->add_option("--seed", ev.seed)->capture_default_str();
    c_ev->add_option("--jobs", ev.jobs, "Worker threads (default: CSVM_JOBS or 1)");
    c_ev->add_option("--report", ev.report_path, "Also write the JSON record here");

    TuneOptions tu;
    tu.jobs = csvm::default_jobs();
    bool tu_no_fine = false, tu_no_adaptive = false;
    auto* c_tu = app.add_subcommand("tune", "Two-step grid search on a train/tune split");
    c_tu->add_option("--train", tu.train_path)->required();
    c_tu->add_option("--tune", tu.tune_path)->required();
    c_tu->add_option("--method", tu.method, "csvm | logistic | knn")->capture_default_str();
    c_tu->add_option("--kernel-grid", tu.kernel_grid, "linear | gaussian-grid | polynomial-grid | comma list")
        ->capture_default_str();
    c_tu->add_option("--coarse", tu.coarse, "Coarse lambda values (default 1e-8 .. 1e4)")->delimiter(',');
    c_tu->add_flag("--no-fine", tu_no_fine, "Skip the fine lambda sweep");
    c_tu->add_flag("--no-adaptive", tu_no_adaptive);
    add_targets(c_tu, tu.alpha_neg, tu.alpha_pos);
    c_tu->add_option("--jobs", tu.jobs, "Worker threads (default: CSVM_JOBS or 1)");
    c_tu->add_option("--seed", tu.seed)->capture_default_str();
    c_tu->add_option("--trace", tu.trace_path, "JSONL trace of every candidate");
    c_tu->add_option("--out-model", tu.out_model, "Write the winning CSVM model");

    BenchmarkOptions bm;
    bm.jobs = csvm::default_jobs();
    bool bm_no_fine = false, bm_no_adaptive = false;
    auto* c_bm = app.add_subcommand("benchmark", "Repeat the simulation protocol and aggregate");
    c_bm->add_option("--scenario", bm.scenario)->capture_default_str();
    c_bm->add_option("--n-train", bm.n_train)->capture_default_str();
    c_bm->add_option("--n-tune", bm.n_tune)->capture_default_str();
    c_bm->add_option("--n-test", bm.n_test)->capture_default_str();
    c_bm->add_option("--dims", bm.dims, "Total dimension (0: scenario default)")->capture_default_str();
    c_bm->add_option("--repeats", bm.repeats)->capture_default_str();
    c_bm->add_option("--seed", bm.seed)->capture_default_str();
    c_bm->add_option("--jobs", bm.jobs, "Concurrent repeats (default: CSVM_JOBS or 1)");
    c_bm->add_option("--methods", bm.methods, "Subset of csvm,csvm-margin,logistic,knn,bayes")->delimiter(',');
    add_targets(c_bm, bm.alpha_neg, bm.alpha_pos);
    c_bm->add_option("--kernel-grid", bm.kernel_grid, "Override the scenario's kernel grid");
    c_bm->add_option("--coarse", bm.coarse, "Coarse lambda values")->delimiter(',');
    c_bm->add_flag("--no-fine", bm_no_fine);
    c_bm->add_flag("--no-adaptive", bm_no_adaptive);
    c_bm->add_option("--mc-samples", bm.mc_samples)->capture_default_str();
    c_bm->add_option("--out-prefix", bm.out_prefix)->capture_default_str();

    OracleOptions orc;
    orc.jobs = csvm::default_jobs();
    auto* c_or = app.add_subcommand("oracle", "Monte Carlo Bayes thresholds for a scenario");
    c_or->add_option("--scenario", orc.scenario)->capture_default_str();
    add_targets(c_or, orc.alpha_neg, orc.alpha_pos);
    c_or->add_option("--mc-samples", orc.mc_samples)->capture_default_str();
    c_or->add_option("--eval-samples", orc.eval_samples, "Fresh draws for Bayes rule rates")->capture_default_str();
    c_or->add_option("--seed", orc.seed)->capture_default_str();
    c_or->add_option("--jobs", orc.jobs);

    TheoryOptions th;
    auto* c_th = app.add_subcommand("theory", "Non-coverage bound and theory constants");
    c_th->add_option("--s", th.s, "RKHS norm bound")->capture_default_str();
    c_th->add_option("--r", th.r, "sup K(x, x)")->capture_default_str();
    c_th->add_option("--c", th.c, "Margin gap")->capture_default_str();
    c_th->add_option("--zeta", th.zeta, "Confidence parameter")->capture_default_str();
    c_th->add_option("--n-j", th.n_j, "Class sample size")->capture_default_str();
    c_th->add_option("--empirical", th.empirical, "Empirical constraint value")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*c_sim) return cmd_simulate(sim, std::cout, std::cerr);
    if (*c_tr) {
        if (*o_lambda) tr.lambda = tr_lambda;
        if (*o_lambda_prime) tr.lambda_prime = tr_lambda_prime;
        tr.adaptive = !tr_no_adaptive;
        return cmd_train(tr, std::cout, std::cerr);
    }
    if (*c_ev) return cmd_evaluate(ev, std::cout, std::cerr);
    if (*c_tu) {
        tu.fine = !tu_no_fine;
        tu.adaptive = !tu_no_adaptive;
        return cmd_tune(tu, std::cout, std::cerr);
    }
    if (*c_bm) {
        bm.fine = !bm_no_fine;
        bm.adaptive = !bm_no_adaptive;
        return cmd_benchmark(bm, std::cout, std::cerr);
    }
    if (*c_or) return cmd_oracle(orc, std::cout, std::cerr);
    if (*c_th) return cmd_theory(th, std::cout, std::cerr);
    return kUsage;
}
