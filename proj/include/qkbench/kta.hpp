#pragma once

#include "qkbench/datapipe.hpp"
#include "qkbench/featuremap.hpp"
#include "qkbench/kernels.hpp"
#include "qkbench/random.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qkbench {

/// Ideal target: T_ij = 1 when labels agree, otherwise -1/(C-1) for C classes
/// (the familiar +-1 outer product in the binary case).
Eigen::MatrixXd kta_target(const Labels &y);

/**
 * Kernel-target alignment <K, T>_F / (||K||_F ||T||_F). With `centered`, both K and
 * T are first double-centered (H K H, H = I - 11^T/m).
 */
double kta_score(const Eigen::MatrixXd &K, const Labels &y, bool centered = false);
inline double kta_score(const KernelMatrix &K, const Labels &y, bool centered = false) {
    return kta_score(K.values, y, centered);
}

/// d KTA / d K for the same normalisation as kta_score.
Eigen::MatrixXd kta_dK(const Eigen::MatrixXd &K, const Labels &y, bool centered = false);

/// All 2LN angles i.i.d. uniform on [0, 2 pi).
AnsatzParams init_params(int n_layers, int n_qubits, std::uint64_t seed);

/// Encoded (pre-ansatz) states and re-uploaded scalars of one sample. These do not
/// depend on the trainable parameters, so training computes them once.
struct EncodedSample {
    std::vector<StateVector> states;
    std::vector<double> reupload;
};

std::vector<EncodedSample> encode_samples(const Samples &X, const EncoderSpec &spec);

/// Gram matrix over pre-encoded samples.
Eigen::MatrixXd gram_from_encoded(const std::vector<EncodedSample> &samples, const EncoderSpec &spec,
                                  const AnsatzParams &params, ScalingConfig scaling);

struct KtaEvaluation {
    double kta;
    std::vector<double> gradient;
};

/**
 * KTA of the batch Gram and its gradient in the flat parameter layout. Each kernel
 * entry is differentiated with the parameter-shift rule: for every occurrence of a
 * parameter (once in each of the two feature states), the gate angle is shifted by
 * +-pi/2 and the half difference is scaled by d(angle)/d(param).
 */
KtaEvaluation kta_value_and_gradient(const std::vector<EncodedSample> &batch, const Labels &y,
                                     const EncoderSpec &spec, const AnsatzParams &params,
                                     ScalingConfig scaling, bool centered = false);

std::vector<double> kta_gradient(const AnsatzParams &params, const Samples &X_batch,
                                 const Labels &y_batch, const EncoderSpec &spec, ScalingConfig scaling,
                                 bool centered = false);

struct TrainConfig {
    double learning_rate = 0.05;
    int steps = 500;
    int batch_size = 4;
    int eval_every = 50;
    std::uint64_t init_seed = 42;
    /// Share of the training data used for gradient steps; the rest is validation.
    double split_fraction = 0.75;
    bool centered = false;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct Checkpoint {
    int step;
    /// KTA of the mini-batch used by this step, before its update. Empty at step 0.
    std::optional<double> train_batch_kta;
    double validation_kta;
};

struct TrainReport {
    AnsatzParams initial_params;
    AnsatzParams best_params;
    double initial_validation_kta = 0.0;
    double best_validation_kta = 0.0;
    int best_step = 0;
    std::vector<Checkpoint> history;
    /// Positions (into the training arrays) of the two folds.
    std::vector<std::size_t> subtrain_idx;
    std::vector<std::size_t> validation_idx;
};

/// Indices of one mini-batch. Class-stratified (one member per class first) when the
/// batch can hold every class, uniform otherwise; no repeats within a batch.
std::vector<std::size_t> sample_batch(const Labels &y, std::size_t batch_size, Rng &rng);

/**
 * Adam ascent on KTA over mini-batches of the stratified sub-train fold, with the
 * validation fold scored at step 0, every `eval_every` steps and at the last step.
 * Returns the checkpoint with the highest validation KTA (earliest on ties).
 */
TrainReport train(const Samples &X_train, const Labels &y_train, const EncoderSpec &spec,
                  ScalingConfig scaling, int n_layers, const TrainConfig &cfg);

// ---------------------------------------------------------------- checkpoints

struct CheckpointFile {
    EncoderSpec spec;
    AnsatzParams params;
    double s = 1.0;
    std::uint64_t seed = 42;
    std::vector<Checkpoint> history;
};

std::string checkpoint_json(const CheckpointFile &ckpt);
CheckpointFile parse_checkpoint(const std::string &text);
void save_checkpoint(const CheckpointFile &ckpt, const std::filesystem::path &path);
CheckpointFile load_checkpoint(const std::filesystem::path &path);

/// Hash over the kernel-defining fields (encoder, L, N, angles, s); history excluded.
std::string checkpoint_hash(const CheckpointFile &ckpt);

}  // namespace qkbench
