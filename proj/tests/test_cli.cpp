#include "csvm/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace csvm;
using namespace csvm::cli;

namespace {

namespace fs = std::filesystem;

/// Fresh directory per test, removed afterwards.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("csvm_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    int simulate(Eigen::Index n_train, Eigen::Index n_tune, Eigen::Index n_test, std::uint64_t seed = 1) {
        SimulateOptions o;
        o.n_train = n_train;
        o.n_tune = n_tune;
        o.n_test = n_test;
        o.dims = 4;
        o.seed = seed;
        o.out_dir = dir_.string();
        std::ostringstream sink;
        return cmd_simulate(o, sink, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

BenchmarkOptions tiny_benchmark(const std::string& prefix) {
    BenchmarkOptions o;
    o.n_train = 40;
    o.n_tune = 40;
    o.n_test = 300;
    o.dims = 4;
    o.repeats = 3;
    o.seed = 5;
    o.coarse = {1e-3, 1e-1};
    o.fine = false;
    o.mc_samples = 20000;
    o.out_prefix = prefix;
    return o;
}

} // namespace

TEST_F(CliTest, SimulateWritesThreeFilesDeterministically) {
    ASSERT_EQ(simulate(30, 20, 10), kOk);
    const std::string first = slurp(path("train.csv"));
    const CsvDataset train = read_dataset_csv(path("train.csv"));
    EXPECT_EQ(train.data.size(), 30);
    EXPECT_EQ(train.data.dims(), 4);
    EXPECT_EQ(train.metadata["seed"], 1);
    EXPECT_EQ(train.metadata["prng"], std::string(kPrngId));
    EXPECT_EQ(read_dataset_csv(path("tune.csv")).data.size(), 20);
    ASSERT_EQ(simulate(30, 20, 10), kOk);
    EXPECT_EQ(slurp(path("train.csv")), first);
    ASSERT_EQ(simulate(30, 20, 10, 2), kOk);
    EXPECT_NE(slurp(path("train.csv")), first);
}

TEST_F(CliTest, SimulateWithoutTestSet) {
    ASSERT_EQ(simulate(10, 10, 0), kOk);
    EXPECT_TRUE(fs::exists(path("train.csv")));
    EXPECT_FALSE(fs::exists(path("test.csv")));
}

TEST_F(CliTest, UnknownScenarioIsUsageError) {
    SimulateOptions o;
    o.scenario = "example9";
    o.out_dir = dir_.string();
    EXPECT_EQ(cmd_simulate(o, out_, err_), kUsage);
}

TEST_F(CliTest, TrainThenEvaluate) {
    ASSERT_EQ(simulate(60, 60, 200), kOk);
    TrainOptions t;
    t.train_path = path("train.csv");
    t.tune_path = path("tune.csv");
    t.out_path = path("model.txt");
    ASSERT_EQ(cmd_train(t, out_, err_), kOk) << err_.str();
    const auto summary = nlohmann::json::parse(out_.str());
    EXPECT_EQ(summary["command"], "train");
    EXPECT_FALSE(summary["trace"].empty());

    for (const char* mode : {"robust", "margin"}) {
        std::ostringstream out;
        EvaluateOptions e;
        e.model_path = path("model.txt");
        e.test_path = path("test.csv");
        e.mode = mode;
        ASSERT_EQ(cmd_evaluate(e, out, err_), kOk) << err_.str();
        const auto rec = nlohmann::json::parse(out.str());
        EXPECT_EQ(rec["report"]["n_test"], 200);
    }
}

TEST_F(CliTest, TrainRejectsBothPenaltyForms) {
    ASSERT_EQ(simulate(20, 0, 0), kOk);
    TrainOptions t;
    t.train_path = path("train.csv");
    t.out_path = path("model.txt");
    t.lambda = 0.1;
    t.lambda_prime = 0.1;
    EXPECT_EQ(cmd_train(t, out_, err_), kUsage);
}

TEST_F(CliTest, InputErrorExitCodes) {
    write("nolabel.csv", "x1,x2\n1,2\n");
    write("bad.csv", "label,x1,x2\n1,2\n");
    TrainOptions t;
    t.out_path = path("model.txt");
    t.train_path = path("nolabel.csv");
    EXPECT_EQ(cmd_train(t, out_, err_), kMissingColumns);
    t.train_path = path("bad.csv");
    EXPECT_EQ(cmd_train(t, out_, err_), kSchema);
    t.train_path = path("missing.csv");
    EXPECT_EQ(cmd_train(t, out_, err_), kIo);

    ASSERT_EQ(simulate(30, 0, 0), kOk);
    write("wide.csv", "label,x1,x2,x3,x4,x5\n1,0,0,0,0,0\n-1,1,1,1,1,1\n");
    t.train_path = path("train.csv");
    t.tune_path = path("wide.csv");
    EXPECT_EQ(cmd_train(t, out_, err_), kDimension);
}

TEST_F(CliTest, EvaluateDimensionMismatch) {
    ASSERT_EQ(simulate(30, 30, 0), kOk);
    TrainOptions t;
    t.train_path = path("train.csv");
    t.tune_path = path("tune.csv");
    t.out_path = path("model.txt");
    ASSERT_EQ(cmd_train(t, out_, err_), kOk);
    write("wide.csv", "label,x1,x2,x3,x4,x5\n1,0,0,0,0,0\n");
    EvaluateOptions e;
    e.model_path = path("model.txt");
    e.test_path = path("wide.csv");
    EXPECT_EQ(cmd_evaluate(e, out_, err_), kDimension);
}

TEST_F(CliTest, EvaluateWithOracleMatchesLibrary) {
    ASSERT_EQ(simulate(10, 0, 500), kOk);
    EvaluateOptions e;
    e.oracle = "example1";
    e.test_path = path("test.csv");
    e.mc_samples = 50000;
    e.seed = 3;
    ASSERT_EQ(cmd_evaluate(e, out_, err_), kOk) << err_.str();
    const auto rec = nlohmann::json::parse(out_.str());

    BayesSpec spec;
    spec.noise_dims = 2;
    spec.mc_samples = 50000;
    spec.seed = 3;
    bayes_thresholds(spec, {});
    const Dataset test = read_dataset_csv(path("test.csv")).data;
    const EvalReport r = evaluate(bayes_predict(spec, test.features()), test.labels(), {});
    EXPECT_EQ(rec["report"]["ambiguity"].get<double>(), r.ambiguity);

    EvaluateOptions both = e;
    both.model_path = path("model.txt");
    EXPECT_EQ(cmd_evaluate(both, out_, err_), kUsage);
}

TEST_F(CliTest, TuneWritesTraceAndModel) {
    ASSERT_EQ(simulate(40, 40, 0), kOk);
    TuneOptions t;
    t.train_path = path("train.csv");
    t.tune_path = path("tune.csv");
    t.coarse = {1e-3, 1e-1, 10.0};
    t.trace_path = path("trace.jsonl");
    t.out_model = path("model.txt");
    ASSERT_EQ(cmd_tune(t, out_, err_), kOk) << err_.str();
    std::ifstream in(path("trace.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 1 + 3 + 11);
    EXPECT_TRUE(read_model(path("model.txt")).thresholds.has_value());
}

TEST_F(CliTest, BenchmarkSingleRepeatEqualsComposedSteps) {
    BenchmarkOptions o = tiny_benchmark(path("bench"));
    o.repeats = 1;
    o.methods = {"csvm", "logistic"};
    const BenchmarkResult res = run_benchmark(o);
    ASSERT_EQ(res.rows.size(), 2u);

    const Eigen::Index p = 4;
    const Dataset train = generate(Scenario::Example1, 40, p, 5, stream_id(0, kTrainRole));
    const Dataset tune = generate(Scenario::Example1, 40, p, 5, stream_id(0, kTuneRole));
    const Dataset test = generate(Scenario::Example1, 300, p, 5, stream_id(0, kTestRole));
    TuningGrid g;
    g.kernels = default_kernel_grid(Scenario::Example1);
    g.coarse = o.coarse;
    g.fine.clear();
    const TuneResult t = grid_search(train, tune, {}, Method::Csvm, g);
    const EvalReport direct =
        evaluate(predict_with_thresholds(score_batch(*t.csvm, test.features()), t.best().thresholds), test.labels(), {});
    EXPECT_EQ(res.rows[0].report.ambiguity, direct.ambiguity);
    EXPECT_EQ(res.rows[0].report.noncoverage_neg, direct.noncoverage_neg);
    EXPECT_EQ(res.rows[0].report.noncoverage_pos, direct.noncoverage_pos);
}

TEST_F(CliTest, BenchmarkAggregateIsRecomputableFromRows) {
    const BenchmarkOptions o = tiny_benchmark(path("bench"));
    ASSERT_EQ(cmd_benchmark(o, out_, err_), kOk) << err_.str();
    std::ifstream in(path("bench.jsonl"));
    std::string line;
    std::map<std::string, std::vector<double>> amb;
    std::map<std::string, double> reported;
    std::getline(in, line);
    EXPECT_EQ(nlohmann::json::parse(line)["command"], "benchmark");
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j["kind"] == "repeat") amb[j["method"]].push_back(j["report"]["ambiguity"].get<double>());
        else reported[j["method"]] = j["mean_ambiguity"].get<double>();
    }
    EXPECT_EQ(amb.size(), 5u);
    for (const auto& [m, v] : amb) {
        EXPECT_EQ(v.size(), 3u);
        double s = 0.0;
        for (double a : v) s += a;
        EXPECT_NEAR(reported[m], s / 3.0, 1e-15) << m;
    }
    const std::string plot = slurp(path("bench_plot.csv"));
    EXPECT_NE(plot.find("n,method,noncov_neg,noncov_pos,ambiguity,"), std::string::npos);
}

TEST_F(CliTest, BenchmarkAggregateIndependentOfJobs) {
    BenchmarkOptions a = tiny_benchmark(path("one"));
    a.jobs = 1;
    BenchmarkOptions b = tiny_benchmark(path("four"));
    b.jobs = 4;
    ASSERT_EQ(cmd_benchmark(a, out_, err_), kOk);
    ASSERT_EQ(cmd_benchmark(b, out_, err_), kOk);
    EXPECT_EQ(slurp(path("one_aggregate.jsonl")), slurp(path("four_aggregate.jsonl")));
    EXPECT_EQ(slurp(path("one.jsonl")), slurp(path("four.jsonl")));
}

TEST_F(CliTest, OracleAndTheoryCommands) {
    OracleOptions o;
    o.scenario = "example3";
    o.mc_samples = 20000;
    o.eval_samples = 20000;
    ASSERT_EQ(cmd_oracle(o, out_, err_), kOk);
    const auto rec = nlohmann::json::parse(out_.str());
    EXPECT_EQ(rec["t_neg"], 0.5);
    EXPECT_EQ(rec["report"]["noncoverage_neg"], 0.0);

    std::ostringstream out;
    TheoryOptions t;
    t.zeta = std::exp(-1.0);
    ASSERT_EQ(cmd_theory(t, out, err_), kOk);
    EXPECT_NEAR(nlohmann::json::parse(out.str())["noncoverage_bound"].get<double>(), 0.5243, 1e-4);
    t.zeta = 0.0;
    EXPECT_EQ(cmd_theory(t, out, err_), kUsage);
}
