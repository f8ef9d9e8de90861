#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "pilu/metrics_log.hpp"
#include "pilu_cli/cli.hpp"

namespace pilu::cli {
namespace fs = std::filesystem;
namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pilu");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pilu_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

TEST_F(CliTest, ModelSummaryPrintsTotals) {
    const auto r = run_cli({"model-summary", "--activation", "pilu", "--scheme", "channel"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("Total parameters: 36,282"), std::string::npos) << r.out;
    const auto c100 = run_cli({"model-summary", "--dataset", "cifar100", "--activation", "relu"});
    EXPECT_NE(c100.out.find("Total parameters: 41,652"), std::string::npos) << c100.out;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli({}).code, kExitUsage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(run_cli({"model-summary", "--activation", "swish"}).code, kExitUsage);
    EXPECT_EQ(run_cli({"train", "--scheme", "group", "--dataset", "synthetic"}).code, kExitUsage);
    EXPECT_EQ(run_cli({"train", "--epochs", "0", "--dataset", "synthetic"}).code, kExitUsage);
    EXPECT_EQ(run_cli({"gradcheck"}).code, kExitUsage);
    EXPECT_EQ(run_cli({"report"}).code, kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) {
    const auto r = run_cli({"--help"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE((r.out + r.err).find("train"), std::string::npos);
}

TEST_F(CliTest, ReportOnEmptyDirectoryFails) {
    const auto r = run_cli({"report", "--in", dir_.string()});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_NE((r.out + r.err).find("no runs found"), std::string::npos);
}

TEST_F(CliTest, MissingDatasetFails) {
    ::unsetenv(kDataDirEnv);
    const auto r = run_cli({"train", "--dataset", "cifar10", "--data-dir", (dir_ / "nowhere").string(), "--epochs",
                            "1", "--out", dir_.string()});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, TrainOnSyntheticWritesOutputsAndSkipsWhenComplete) {
    const std::vector<std::string> args{"train",          "--dataset", "synthetic", "--synthetic-size", "200",
                                        "--activation",   "pilu",      "--epochs",  "1",                "--seed",
                                        "3",              "--out",     dir_.string()};
    const auto r = run_cli(args);
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto log = dir_ / "pilu_channel_seed3.jsonl";
    EXPECT_TRUE(run_log_complete(log));
    EXPECT_TRUE(fs::exists(dir_ / "pilu_channel_seed3.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "pilu_channel_seed3.ckpt"));
    EXPECT_EQ(read_run_log(log).rows.size(), 3u);

    const auto again = run_cli(args);
    EXPECT_EQ(again.code, kExitOk);
    EXPECT_NE(again.out.find("already complete"), std::string::npos);

    const auto report = run_cli({"report", "--in", dir_.string(), "--out", (dir_ / "report").string()});
    EXPECT_EQ(report.code, kExitOk) << report.err;
    EXPECT_TRUE(fs::exists(dir_ / "report" / "summary.csv"));
}

TEST_F(CliTest, ExperimentOnSynthetic) {
    const auto r = run_cli({"experiment", "--dataset", "synthetic", "--synthetic-size", "200", "--activations",
                            "relu,pilu", "--seeds", "2", "--epochs", "1", "--out", dir_.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (const char* f : {"config.json", "metrics.csv", "summary.csv", "comparisons.csv", "raw_final_metrics.csv"})
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    EXPECT_NE(r.out.find("pilu/channel vs relu/channel"), std::string::npos) << r.out;
}

TEST_F(CliTest, ActivationGradcheckPasses) {
    const auto r = run_cli({"gradcheck", "--activation", "double_relu", "--scheme", "neuron", "--seed", "5"});
    EXPECT_EQ(r.code, kExitOk) << r.out;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(CliTest, ImpossibleToleranceFails) {
    const auto r = run_cli({"gradcheck", "--activation", "pilu", "--tol", "1e-300"});
    EXPECT_EQ(r.code, kExitFailure);
    EXPECT_NE(r.out.find("FAIL:"), std::string::npos);
}

TEST_F(CliTest, BenchWritesCsv) {
    const auto csv = dir_ / "bench.csv";
    const auto r = run_cli({"bench", "--sizes", "100,1000", "--iters", "50", "--batches", "1", "--out", csv.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(csv));
}

TEST(CliBinary, ExitCodesPropagate) {
    const std::string tool = PILU_TOOL_PATH;
    EXPECT_EQ(WEXITSTATUS(std::system((tool + " model-summary > /dev/null").c_str())), kExitOk);
    EXPECT_EQ(WEXITSTATUS(std::system((tool + " model-summary --activation nope > /dev/null 2>&1").c_str())),
              kExitUsage);
}

}  // namespace
}  // namespace pilu::cli
