#include "qkbench/config.hpp"
#include "qkbench/errors.hpp"
#include "qkbench/runner.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace qkbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("qkbench_runner_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Small enough to keep the quantum paths under a few seconds on one core.
RunConfig small_config(const fs::path &out, const std::string &kernels_yaml) {
    auto cfg = parse_config(R"(
seed: 3
dataset: {synthetic: {kind: two_moons, m: 40, noise: 0.1}}
ansatz: {layers: 5}
training: {steps: 6, eval_every: 3, batch_size: 4}
)" + kernels_yaml);
    cfg.output_dir = out;
    return cfg;
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(QKBENCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Run, ClassicalKernelsProduceOneRowEach) {
    const auto out = scratch("classical");
    const auto cfg = small_config(out, "kernels: [{kind: linear}, {kind: rbf}]\n");
    const auto report = run(cfg);
    ASSERT_EQ(report.kernels.size(), 2u);
    EXPECT_FALSE(report.any_failed());
    EXPECT_EQ(report.exit_code(), 0);
    EXPECT_EQ(report.n_train + report.n_test, 40u);
    for (const auto &k : report.kernels) {
        EXPECT_GE(k.test_accuracy, 0.5);
        EXPECT_TRUE(k.hyperparams.count("C"));
    }
    EXPECT_TRUE(report.kernels[1].tags.count("gamma"));
    for (const char *f : {"results.json", "results.csv", "results.svg", "run_info.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto j = nlohmann::json::parse(slurp(out / "results.json"));
    EXPECT_EQ(j.at("kernels").size(), 2u);
    // Header plus one row per kernel.
    std::ifstream csv(out / "results.csv");
    int lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    EXPECT_EQ(lines, 3);
    fs::remove_all(out);
}

TEST(Run, ResultsAreByteIdenticalAcrossRuns) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::string k = "kernels: [{kind: rbf}, {kind: qamp, fixed: {s: 0.5, C: 10}}]\n";
    run(small_config(a, k));
    run(small_config(b, k));
    EXPECT_EQ(slurp(a / "results.json"), slurp(b / "results.json"));
    EXPECT_EQ(slurp(a / "checkpoint_qamp.json"), slurp(b / "checkpoint_qamp.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Run, QuantumKernelReportsResources) {
    const auto out = scratch("resources");
    auto cfg = small_config(out, "kernels: [{kind: qamp, fixed: {s: 1, C: 1}}]\n");
    cfg.ansatz.qubits = 3;
    const auto report = run(cfg, RunOptions{false, false});
    ASSERT_EQ(report.kernels.size(), 1u);
    const auto &k = report.kernels[0];
    ASSERT_FALSE(k.failed) << k.error;
    ASSERT_TRUE(k.resources);
    EXPECT_EQ(k.resources->cnots, 15);
    EXPECT_EQ(k.resources->single_qubit_gates, 30);
    ASSERT_TRUE(k.training);
    EXPECT_GE(k.training->best_validation_kta, k.training->initial_validation_kta);
    EXPECT_FALSE(k.checkpoint_hash.empty());
    EXPECT_FALSE(fs::exists(out / "results.json"));
    fs::remove_all(out);
}

TEST(Run, SearchLogsEveryTrialAndResumes) {
    const auto out = scratch("search");
    const std::string k =
        "kernels: [{kind: qrbf, search: {iterations: 4, s: [0.1, 1], C: [1, 10], c: [0.707, 1], baseline: 1.1}}]\n";
    const auto first = run(small_config(out, k));
    ASSERT_FALSE(first.any_failed()) << first.kernels[0].error;
    EXPECT_EQ(first.kernels[0].trials.size(), 4u);
    std::ifstream log(out / "trials_qrbf.jsonl");
    int lines = 0;
    for (std::string line; std::getline(log, line);) ++lines;
    EXPECT_EQ(lines, 4);
    const auto resumed = run(small_config(out, k), RunOptions{true, true});
    EXPECT_EQ(resumed.kernels[0].hyperparams, first.kernels[0].hyperparams);
    EXPECT_EQ(resumed.kernels[0].test_accuracy, first.kernels[0].test_accuracy);
    fs::remove_all(out);
}

TEST(Run, KernelFailureIsIsolated) {
    const auto out = scratch("failure");
    // A batch larger than the sub-train fold only surfaces once the kernel starts training.
    auto cfg = small_config(out, "kernels: [{kind: linear}, {kind: qamp, fixed: {s: 1, C: 1}}]\n");
    cfg.training.batch_size = 1000;
    const auto report = run(cfg, RunOptions{false, false});
    ASSERT_EQ(report.kernels.size(), 2u);
    EXPECT_FALSE(report.kernels[0].failed);
    EXPECT_TRUE(report.kernels[1].failed);
    EXPECT_EQ(report.kernels[1].error_code, 2);
    EXPECT_EQ(report.exit_code(), 2);
    fs::remove_all(out);
}

TEST(Ablation, FourCellsPerKernel) {
    const auto out = scratch("ablation");
    const auto cfg = small_config(out, "kernels: [{kind: qamp, fixed: {s: 0.1, C: 10}}]\n");
    const auto r = ablate_scaling(cfg);
    ASSERT_EQ(r.size(), 1u);
    ASSERT_EQ(r[0].cells.size(), 4u);
    EXPECT_EQ(r[0].scaled_s, 0.1);
    EXPECT_EQ(r[0].cells[0].s, 1.0);
    EXPECT_FALSE(r[0].cells[0].trained);
    EXPECT_TRUE(r[0].cells[1].trained);
    EXPECT_EQ(r[0].cells[3].s, 0.1);
    EXPECT_TRUE(fs::exists(out / "ablation.json"));
    fs::remove_all(out);
}

TEST(Sweep, ZeroExtrasMatchesRun) {
    const auto out = scratch("sweep");
    const auto cfg = small_config(out, "kernels: [{kind: qamp, fixed: {s: 0.5, C: 10}}]\n");
    const auto report = run(cfg, RunOptions{false, false});
    const auto sw = qubit_sweep(cfg, {0, 1}, RunOptions{false, false});
    ASSERT_EQ(sw.size(), 1u);
    ASSERT_EQ(sw[0].points.size(), 2u);
    EXPECT_EQ(sw[0].points[0].test_accuracy, report.kernels[0].test_accuracy);
    EXPECT_EQ(sw[0].points[1].n_qubits, sw[0].points[0].n_qubits + 1);
    EXPECT_GT(sw[0].points[1].resources.cnots, sw[0].points[0].resources.cnots);
    fs::remove_all(out);
}

TEST(Analysis, LearningCurveAndPca) {
    const auto out = scratch("analysis");
    const auto cfg = small_config(out, "kernels: [{kind: linear}]\n");
    const auto lc = run_learning_curve(cfg, RunOptions{false, false});
    ASSERT_EQ(lc.points.size(), 5u);
    EXPECT_EQ(lc.points.back().size, 30u);
    const auto pca = pca_analyze(cfg, RunOptions{false, false});
    EXPECT_EQ(pca.eigenvalues.size(), 2);
    EXPECT_NEAR(pca.cumulative_ratio(1), 1.0, 1e-12);
    EXPECT_GE(pca.variance_components, 1);
    fs::remove_all(out);
}

TEST(EncoderFor, QubitRules) {
    AnsatzConfig a;
    EXPECT_EQ(encoder_for(KernelKind::QAmp, a, 5, 1.0).n_qubits, 3);
    EXPECT_EQ(encoder_for(KernelKind::QRBF, a, 5, 0.707).n_qubits, 2);
    a.qubits = 2;
    EXPECT_THROW(encoder_for(KernelKind::QAmp, a, 5, 1.0), ConfigError);
    a.qubits = 3;
    a.extra_qubits = 1;
    EXPECT_EQ(encoder_for(KernelKind::QAmp, a, 5, 1.0).n_qubits, 4);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const auto good = dir / "good.yaml";
    std::ofstream(good) << "dataset: {synthetic: {kind: blobs, m: 30}}\nkernels: [{kind: linear, C: [1]}]\n";
    const auto bad = dir / "bad.yaml";
    std::ofstream(bad) << "dataset: {synthetic: {kind: blobs}}\nkernels: [{kind: linear, CC: [1]}]\n";
    const auto nodata = dir / "nodata.yaml";
    std::ofstream(nodata) << "dataset: {csv: {path: missing.csv}}\nkernels: [{kind: linear}]\n";

    EXPECT_EQ(run_cli("validate-config -c " + good.string()), 0);
    EXPECT_EQ(run_cli("validate-config -c " + bad.string()), 2);
    EXPECT_EQ(run_cli("validate-config -c " + (dir / "absent.yaml").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("run -c " + nodata.string() + " -o " + (dir / "o1").string()), 3);
    EXPECT_EQ(run_cli("run -q -c " + good.string() + " -o " + (dir / "o2").string() + " --format csv"), 0);
    EXPECT_TRUE(fs::exists(dir / "o2" / "results.json"));
    EXPECT_EQ(run_cli("run -c " + good.string() + " --threads 0"), 2);
    fs::remove_all(dir);
}

TEST(Cli, ShippedConfigsValidate) {
    const fs::path configs = fs::path(QKBENCH_SOURCE_DIR) / "configs";
    ASSERT_TRUE(fs::exists(configs));
    int n = 0;
    for (const auto &e : fs::directory_iterator(configs)) {
        if (e.path().extension() != ".yaml") continue;
        ++n;
        EXPECT_NO_THROW(load_config(e.path())) << e.path();
    }
    EXPECT_GT(n, 0);
}
