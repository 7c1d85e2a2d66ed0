#include "qkbench/config.hpp"
#include "qkbench/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace qkbench;
namespace fs = std::filesystem;

namespace {

const char *kMinimal = R"(
dataset:
  synthetic: {kind: two_moons}
kernels:
  - kind: linear
)";

std::string config_error(const std::string &yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string &hay, const std::string &needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Config, MinimalUsesDefaults) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_FALSE(cfg.dataset.csv_path);
    EXPECT_EQ(cfg.dataset.synthetic, SyntheticKind::TwoMoons);
    EXPECT_EQ(cfg.dataset.m, 200u);
    EXPECT_EQ(cfg.ansatz.layers, 5);
    EXPECT_FALSE(cfg.ansatz.qubits);
    EXPECT_EQ(cfg.training.steps, 500);
    EXPECT_EQ(cfg.training.batch_size, 4);
    EXPECT_EQ(cfg.pipeline.scaler, Scaler::MinMax);
    ASSERT_EQ(cfg.kernels.size(), 1u);
    EXPECT_EQ(cfg.kernels[0].kind, KernelKind::Linear);
    EXPECT_EQ(cfg.kernels[0].C_grid, (std::vector<double>{0.1, 1, 10, 100, 1000}));
    EXPECT_EQ(cfg.sweep.extras, (std::vector<int>{0, 1, 2}));
}

TEST(Config, FullDocument) {
    const auto cfg = parse_config(R"(
seed: 7
output_dir: results/run1
dataset:
  synthetic: {kind: blobs, m: 90, noise: 0.3, n_classes: 3, seed: 11}
pipeline:
  impute: median
  scaler: standard
  pca: {mode: variance, variance: 0.9}
  train_fraction: 0.8
  train_cap: 60
  test_cap: 30
ansatz: {layers: 3, qubits: 2, extra_qubits: 1}
training: {learning_rate: 0.01, steps: 40, batch_size: 6, eval_every: 10, split_fraction: 0.7, centered: true}
kernels:
  - {kind: rbf, C: [1, 10], gamma: [scale, 0.5]}
  - kind: qamp
    search: {iterations: 6, s: [0.1, 1], C: [1, 10], baseline: 0.9, stage2_half_width: 0.3}
  - kind: qrbf
    fixed: {s: 0.5, C: 10, c: 0.707}
sweep: {extras: [0, 2]}
learning_curve: {sizes: [10, 20], C: [1], gamma: [auto]}
)");
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.output_dir, fs::path("results/run1"));
    EXPECT_EQ(cfg.dataset.synthetic, SyntheticKind::Blobs);
    EXPECT_EQ(cfg.dataset.n_classes, 3);
    EXPECT_EQ(cfg.dataset.seed, 11u);
    EXPECT_EQ(cfg.pipeline.seed, 7u);
    EXPECT_EQ(cfg.training.init_seed, 7u);
    EXPECT_EQ(cfg.pipeline.impute, Imputer::Median);
    EXPECT_EQ(cfg.pipeline.scaler, Scaler::Standard);
    EXPECT_EQ(cfg.pipeline.pca.mode, PcaSelection::Mode::Variance);
    EXPECT_EQ(cfg.pipeline.pca.variance, 0.9);
    EXPECT_EQ(*cfg.pipeline.train_cap, 60u);
    EXPECT_EQ(*cfg.ansatz.qubits, 2);
    EXPECT_EQ(cfg.ansatz.extra_qubits, 1);
    EXPECT_TRUE(cfg.training.centered);
    EXPECT_EQ(cfg.training.split_fraction, 0.7);

    ASSERT_EQ(cfg.kernels.size(), 3u);
    EXPECT_EQ(cfg.kernels[0].gamma_grid.size(), 2u);
    EXPECT_EQ(cfg.kernels[0].gamma_grid[0].to_string(), "scale");
    const auto &qa = cfg.kernels[1];
    EXPECT_EQ(qa.search.total_iterations, 6);
    EXPECT_EQ(qa.search.s_values, (std::vector<double>{0.1, 1}));
    EXPECT_FALSE(qa.baseline_auto);
    EXPECT_EQ(qa.search.baseline_accuracy, 0.9);
    EXPECT_EQ(qa.search.seed, 7u);
    EXPECT_EQ(qa.search.stage2_half_width, 0.3);
    const auto &qr = cfg.kernels[2];
    ASSERT_TRUE(qr.fixed);
    EXPECT_EQ(qr.fixed->at("c"), 0.707);
    EXPECT_EQ(cfg.sweep.extras, (std::vector<int>{0, 2}));
    EXPECT_EQ(cfg.learning_curve.sizes, (std::vector<std::size_t>{10, 20}));
}

TEST(Config, QuantumKernelsDefaultToSearch) {
    const auto cfg = parse_config(R"(
dataset: {synthetic: {kind: two_moons}}
kernels: [{kind: qamp}, {kind: qrbf}]
)");
    EXPECT_EQ(cfg.kernels[0].search.total_iterations, 14);
    EXPECT_EQ(cfg.kernels[1].search.total_iterations, 20);
    EXPECT_TRUE(cfg.kernels[0].baseline_auto);
    EXPECT_FALSE(cfg.kernels[0].fixed);
}

TEST(Config, CsvPathResolvesAgainstConfigDirectory) {
    const auto dir = fs::temp_directory_path() / "qkbench_cfg_test";
    fs::create_directories(dir);
    const auto path = dir / "c.yaml";
    std::ofstream(path) << "dataset:\n  csv: {path: data/x.csv, label_column: y, delimiter: ';'}\nkernels: [{kind: linear}]\n";
    const auto cfg = load_config(path);
    fs::remove_all(dir);
    ASSERT_TRUE(cfg.dataset.csv_path);
    EXPECT_EQ(*cfg.dataset.csv_path, dir / "data/x.csv");
    EXPECT_EQ(cfg.dataset.csv.label_column, "y");
    EXPECT_EQ(cfg.dataset.csv.delimiter, ';');
    EXPECT_THROW(load_config(dir / "missing.yaml"), ConfigError);
}

TEST(Config, UnknownKeysReportTheirPath) {
    EXPECT_TRUE(contains(config_error(std::string(kMinimal) + "trainin: {steps: 3}\n"), "trainin: unknown key"));
    EXPECT_TRUE(contains(config_error(std::string(kMinimal) + "training: {step: 3}\n"), "training.step: unknown key"));
    EXPECT_TRUE(contains(config_error(R"(
dataset: {synthetic: {kind: two_moons}}
kernels: [{kind: qamp, search: {iters: 3}}]
)"),
                         "kernels[0].search.iters: unknown key"));
}

TEST(Config, ValidationNamesTheField) {
    const std::string ds = "dataset: {synthetic: {kind: two_moons}}\n";
    EXPECT_TRUE(contains(config_error(ds + "kernels: []\n"), "kernels"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: linear}, {kind: linear}]\n"), "duplicate"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: poly}]\n"), "kernels[0].kind"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: linear, gamma: [1]}]\n"), "kernels[0].gamma"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: rbf, gamma: [fast]}]\n"), "kernels[0].gamma[0]"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: rbf, C: [1, x]}]\n"), "kernels[0].C[1]"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: qamp, fixed: {s: 1}}]\n"), "kernels[0].fixed.C"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: qrbf, fixed: {s: 1, C: 1}}]\n"), "kernels[0].fixed.c"));
    EXPECT_TRUE(contains(config_error(ds + "kernels: [{kind: qamp, fixed: {s: 1, C: 1}, search: {}}]\n"),
                         "exclusive"));
    EXPECT_TRUE(contains(config_error(ds + "ansatz: {layers: 0}\nkernels: [{kind: qamp}]\n"), "ansatz.layers"));
    EXPECT_TRUE(contains(config_error(ds + "training: {steps: many}\nkernels: [{kind: qamp}]\n"), "training.steps"));
    EXPECT_TRUE(contains(config_error(ds + "pipeline: {scaler: robust}\nkernels: [{kind: qamp}]\n"),
                         "pipeline.scaler"));
    EXPECT_TRUE(contains(config_error("kernels: [{kind: linear}]\n"), "dataset"));
    EXPECT_TRUE(contains(config_error("dataset: {synthetic: {kind: blobs}, csv: {path: a.csv}}\nkernels: [{kind: linear}]\n"),
                         "exactly one"));
    EXPECT_TRUE(contains(config_error("dataset: {synthetic: {kind: two_moons, n_classes: 3}}\nkernels: [{kind: linear}]\n"),
                         "n_classes"));
    EXPECT_TRUE(contains(config_error("a: [unclosed\n"), "not valid YAML"));
    EXPECT_TRUE(contains(config_error(""), "empty"));
}

TEST(Config, OverrideSeedReachesEveryNestedSeed) {
    auto cfg = parse_config(R"(
seed: 1
dataset: {synthetic: {kind: two_moons, seed: 5}}
training: {init_seed: 6}
kernels: [{kind: qamp, search: {seed: 8}}]
)");
    EXPECT_EQ(cfg.dataset.seed, 5u);
    EXPECT_EQ(cfg.training.init_seed, 6u);
    EXPECT_EQ(cfg.kernels[0].search.seed, 8u);
    override_seed(cfg, 99);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.dataset.seed, 99u);
    EXPECT_EQ(cfg.pipeline.seed, 99u);
    EXPECT_EQ(cfg.training.init_seed, 99u);
    EXPECT_EQ(cfg.kernels[0].search.seed, 99u);
}
