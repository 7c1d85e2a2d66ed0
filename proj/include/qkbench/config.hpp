#pragma once

#include "qkbench/datapipe.hpp"
#include "qkbench/kernels.hpp"
#include "qkbench/kta.hpp"
#include "qkbench/search.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qkbench {

struct DatasetConfig {
    /// Set for CSV input; otherwise the synthetic generator is used.
    std::optional<std::filesystem::path> csv_path;
    CsvOptions csv;
    SyntheticKind synthetic = SyntheticKind::TwoMoons;
    std::size_t m = 200;
    double noise = 0.1;
    int n_classes = 2;
    std::uint64_t seed = 42;
};

struct AnsatzConfig {
    int layers = 5;
    /// QAmp: defaults to ceil(log2 d) after preprocessing. QRBF: defaults to 2.
    std::optional<int> qubits;
    /// Extra qubits through extended_variant (re-upload spread or dense entangler).
    int extra_qubits = 0;
};

struct KernelConfig {
    KernelKind kind = KernelKind::Linear;
    /// linear / rbf grids.
    std::vector<double> C_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<Gamma> gamma_grid;
    /// Quantum kernels: either a search or fixed s, C (and c for qrbf).
    std::optional<Hyperparams> fixed;
    SearchSpace search;
    /// Early-stop threshold taken from the best classical validation accuracy.
    bool baseline_auto = true;
};

struct SweepConfig {
    std::vector<int> extras{0, 1, 2};
};

struct LearningCurveConfig {
    std::vector<std::size_t> sizes;
    std::vector<double> C_grid{0.1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<Gamma> gamma_grid;
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "out";
    DatasetConfig dataset;
    PipelineSpec pipeline;
    AnsatzConfig ansatz;
    TrainConfig training;
    std::vector<KernelConfig> kernels;
    SweepConfig sweep;
    LearningCurveConfig learning_curve;

    /// Throws ConfigError naming the offending field path.
    void validate() const;
};

/// YAML text. Nested seeds default to the top-level `seed`; relative dataset paths
/// resolve against `base_dir`.
RunConfig parse_config(const std::string &yaml_text, const std::filesystem::path &base_dir = {});
RunConfig load_config(const std::filesystem::path &path);

/// Replaces the global seed and every nested seed.
void override_seed(RunConfig &cfg, std::uint64_t seed);

}  // namespace qkbench
