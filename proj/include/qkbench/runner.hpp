#pragma once

#include "qkbench/config.hpp"
#include "qkbench/featuremap.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qkbench {

struct RunOptions {
    /// Replay trials already present in the output directory's trial logs.
    bool resume = false;
    /// Skip writing artifacts (tests and nested use).
    bool write_artifacts = true;
};

struct KernelOutcome {
    KernelKind kind = KernelKind::Linear;
    bool failed = false;
    /// 2 config, 3 data, 4 numerical; 0 when the kernel succeeded.
    int error_code = 0;
    std::string error;

    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    Hyperparams hyperparams;
    std::map<std::string, std::string> tags;
    std::vector<TrialRecord> trials;
    bool early_stopped = false;
    bool searched = false;

    // quantum kernels only
    std::optional<EncoderSpec> encoder;
    int layers = 0;
    std::optional<ResourceCount> resources;
    std::optional<TrainReport> training;
    std::string checkpoint_hash;
    double wall_seconds = 0.0;
};

struct RunReport {
    std::string dataset;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_features = 0;
    std::vector<int> classes;
    std::uint64_t seed = 0;
    std::vector<KernelOutcome> kernels;
    double wall_seconds = 0.0;

    bool any_failed() const;
    /// Exit code of the first failed kernel, 0 when none failed.
    int exit_code() const;
};

/// Loads the configured dataset (CSV or synthetic).
Dataset load_dataset(const DatasetConfig &cfg);

/// Builds the encoder for a quantum kernel once the feature count is known. QAmp
/// needs 2^N >= d.
EncoderSpec encoder_for(KernelKind kind, const AnsatzConfig &ansatz, std::size_t n_features,
                        double length_scale);

/**
 * dataset -> pipeline -> per kernel (grid search or two-stage search with KTA
 * training) -> SVC refit on the full train split -> test accuracy. Classical kernels
 * run first so their best validation accuracy can serve as the quantum early-stop
 * baseline. Kernel failures are recorded, not thrown.
 *
 * Artifacts: results.json (deterministic payload), results.csv, results.svg,
 * run_info.json (wall clock and environment), per quantum kernel a trial log,
 * checkpoint and KTA history CSV.
 */
RunReport run(const RunConfig &cfg, const RunOptions &opts = {});

std::string report_json(const RunReport &report);
std::string report_csv(const RunReport &report);
std::string run_info_json(const RunReport &report);

// ---------------------------------------------------------------- scaling ablation

struct AblationCell {
    double s = 1.0;
    bool trained = false;
    double C = 1.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    double validation_kta = 0.0;
};

struct AblationResult {
    KernelKind kind = KernelKind::QAmp;
    double scaled_s = 1.0;
    /// unscaled-initial, unscaled-trained, scaled-initial, scaled-trained
    std::vector<AblationCell> cells;
};

/**
 * Per quantum kernel, s = 1 against the tuned s, each with init_params and with the
 * best-checkpoint params. C is re-tuned per cell on the KTA validation fold.
 */
std::vector<AblationResult> ablate_scaling(const RunConfig &cfg, const RunOptions &opts = {});
std::string ablation_json(const std::vector<AblationResult> &results);
std::string ablation_csv(const std::vector<AblationResult> &results);

// ---------------------------------------------------------------- qubit sweep

struct SweepPoint {
    int extra_qubits = 0;
    int n_qubits = 0;
    double test_accuracy = 0.0;
    ResourceCount resources;
};

struct SweepResult {
    KernelKind kind = KernelKind::QAmp;
    Hyperparams hyperparams;
    std::vector<SweepPoint> points;
};

/// Hyperparameters are chosen once at 0 extras, then each extended encoder is
/// retrained and scored.
std::vector<SweepResult> qubit_sweep(const RunConfig &cfg, const std::vector<int> &extras,
                                     const RunOptions &opts = {});
std::string sweep_json(const std::vector<SweepResult> &results);
std::string sweep_csv(const std::vector<SweepResult> &results);

// ---------------------------------------------------------------- analysis

struct LearningCurveReport {
    std::vector<LearningCurvePoint> points;
};

/// Sizes default to five even steps up to the full train split.
LearningCurveReport run_learning_curve(const RunConfig &cfg, const RunOptions &opts = {});
std::string learning_curve_json(const LearningCurveReport &r);
std::string learning_curve_csv(const LearningCurveReport &r);

struct PcaAnalysis {
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd cumulative_ratio;
    int variance_components = 0;
    double variance_threshold = 0.95;
    int elbow = 0;
};

/// Explained-variance curve of the imputed train split (no scaling, no reduction).
PcaAnalysis pca_analyze(const RunConfig &cfg, const RunOptions &opts = {});
std::string pca_json(const PcaAnalysis &a);
std::string pca_csv(const PcaAnalysis &a);

}  // namespace qkbench
