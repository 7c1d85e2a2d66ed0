#pragma once

#include "qkbench/featuremap.hpp"
#include "qkbench/statevec.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qkbench {

enum class KernelKind { Linear, RBF, QAmp, QRBF };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string &name);
inline bool is_quantum(KernelKind k) { return k == KernelKind::QAmp || k == KernelKind::QRBF; }

struct KernelMeta {
    KernelKind kind = KernelKind::Linear;
    std::map<std::string, double> hyperparameters;
    std::string checkpoint_hash;
};

/// Gram matrix (m x n) with the sample ids of its rows and columns.
struct KernelMatrix {
    Eigen::MatrixXd values;
    std::vector<std::size_t> row_ids;
    std::vector<std::size_t> col_ids;
    KernelMeta meta;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    bool square() const { return values.rows() == values.cols(); }
};

/// Sample matrix: one sample per row.
using Samples = Eigen::MatrixXd;

std::vector<std::size_t> iota_ids(std::size_t n, std::size_t offset = 0);

/// |<a|b>|^2
double fidelity(const StateVector &a, const StateVector &b);

/// Everything needed to evaluate a quantum kernel.
struct QuantumKernel {
    EncoderSpec spec;
    AnsatzParams params;
    ScalingConfig scaling;
};

/// Per-sample feature states, computed once and shared read-only.
std::vector<std::vector<StateVector>> feature_states(const Samples &X, const QuantumKernel &qk);

/// Kernel value from cached feature states: fidelity for QAmp, feature-wise mean of
/// fidelities for QRBF.
double quantum_kernel_value(const std::vector<StateVector> &a, const std::vector<StateVector> &b);

/// Train Gram: only the upper triangle is evaluated, then mirrored.
KernelMatrix gram_quantum(const Samples &X, const QuantumKernel &qk);
/// Test-vs-train Gram.
KernelMatrix gram_quantum(const Samples &X1, const Samples &X2, const QuantumKernel &qk);

KernelMatrix gram_qamp(const Samples &X, const EncoderSpec &spec, const AnsatzParams &params,
                       ScalingConfig scaling);
KernelMatrix gram_qamp(const Samples &X1, const Samples &X2, const EncoderSpec &spec,
                       const AnsatzParams &params, ScalingConfig scaling);
KernelMatrix gram_qrbf(const Samples &X, const EncoderSpec &spec, const AnsatzParams &params,
                       ScalingConfig scaling);
KernelMatrix gram_qrbf(const Samples &X1, const Samples &X2, const EncoderSpec &spec,
                       const AnsatzParams &params, ScalingConfig scaling);

/**
 * Kernel entry from the explicit overlap circuit: prepare U(x1), apply V(x1),
 * then V(x2)^dagger, and read the amplitude on the encoded x2 state (the
 * probability of all-zero after U(x2)^dagger). Used to cross-check the direct
 * statevector overlap.
 */
double kernel_entry_via_adjoint(std::span<const double> x1, std::span<const double> x2,
                                const QuantumKernel &qk);

/// RBF gamma: a number, or the named conventions `scale` = 1/(d var(X)) and `auto` = 1/d.
struct Gamma {
    enum class Mode { Value, Scale, Auto };
    Mode mode = Mode::Value;
    double value = 1.0;

    static Gamma parse(const std::string &text);
    std::string to_string() const;
    /// Numeric gamma for training data X.
    double resolve(const Samples &X_train) const;
};

KernelMatrix gram_linear(const Samples &X1, const Samples &X2);
KernelMatrix gram_rbf(const Samples &X1, const Samples &X2, double gamma);

/// Writes `values` as CSV plus a `<path>.json` metadata sidecar.
void save_kernel(const KernelMatrix &K, const std::filesystem::path &csv_path);
KernelMatrix load_kernel(const std::filesystem::path &csv_path);

}  // namespace qkbench
