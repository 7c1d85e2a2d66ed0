#pragma once

#include "qkbench/statevec.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qkbench {

enum class EncoderKind { QAmp, QRBF };

/// Qubit-extension variants. ReuploadSpread widens a QAmp register, DenseEntangle
/// widens a QRBF register and switches to the two-neighbour CNOT ring.
enum class Extension { None, ReuploadSpread, DenseEntangle };

std::string to_string(EncoderKind kind);
std::string to_string(Extension ext);
EncoderKind parse_encoder_kind(const std::string &name);
Extension parse_extension(const std::string &name);

struct EncoderSpec {
    EncoderKind kind = EncoderKind::QAmp;
    int n_qubits = 2;
    /// QRBF length scale c; alpha = x / (sqrt(2) c). Ignored by QAmp.
    double length_scale = 1.0;
    Extension extension = Extension::None;
    int extra_qubits = 0;

    /// Truncated Hilbert dimension D = 2^n_qubits.
    std::size_t hilbert_dim() const { return std::size_t{1} << n_qubits; }
    bool dense_entangler() const { return extension == Extension::DenseEntangle; }

    void validate() const;
    bool operator==(const EncoderSpec &) const = default;
};

/// Default QRBF register: two qubits, D = 4.
inline EncoderSpec qrbf_spec(double length_scale, int n_qubits = 2) {
    return EncoderSpec{EncoderKind::QRBF, n_qubits, length_scale, Extension::None, 0};
}

inline EncoderSpec qamp_spec(int n_qubits) {
    return EncoderSpec{EncoderKind::QAmp, n_qubits, 1.0, Extension::None, 0};
}

/// Qubit count needed to amplitude-encode `n_features` values (at least one).
int qubits_for_features(std::size_t n_features);

/**
 * Trainable ansatz angles, stored flat in L x 2 x N order: for layer l the N
 * Ry angles (theta) come first, then the N data-coupled Rz weights (phi).
 */
class AnsatzParams {
  public:
    AnsatzParams() = default;
    AnsatzParams(int n_layers, int n_qubits);
    AnsatzParams(int n_layers, int n_qubits, std::vector<double> flat);

    int n_layers() const noexcept { return n_layers_; }
    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t size() const noexcept { return values_.size(); }

    double theta(int layer, int qubit) const { return values_[theta_index(layer, qubit)]; }
    double phi(int layer, int qubit) const { return values_[phi_index(layer, qubit)]; }
    double &theta(int layer, int qubit) { return values_[theta_index(layer, qubit)]; }
    double &phi(int layer, int qubit) { return values_[phi_index(layer, qubit)]; }

    std::size_t theta_index(int layer, int qubit) const {
        return static_cast<std::size_t>((2 * layer) * n_qubits_ + qubit);
    }
    std::size_t phi_index(int layer, int qubit) const {
        return static_cast<std::size_t>((2 * layer + 1) * n_qubits_ + qubit);
    }
    bool is_phi(std::size_t flat_index) const {
        return (flat_index / static_cast<std::size_t>(n_qubits_)) % 2 == 1;
    }

    std::span<const double> flat() const noexcept { return values_; }
    std::span<double> flat() noexcept { return values_; }

    bool operator==(const AnsatzParams &) const = default;

  private:
    int n_layers_ = 0;
    int n_qubits_ = 0;
    std::vector<double> values_;
};

/// Global multiplier on every data-dependent Rz argument. Zero is allowed and
/// makes the ansatz independent of the re-uploaded value.
struct ScalingConfig {
    double s = 1.0;
    void validate() const;
};

/// Offset added to the gate angle of one ansatz parameter (parameter-shift rule).
struct AngleShift {
    std::size_t param_index;
    double delta;
};

/// out_i = x_{i mod len(x)}
std::vector<double> cyclic_pad(std::span<const double> x, std::size_t target_len);

/// Cyclic padding to 2^n_qubits followed by L2 normalization. Throws DataError on a
/// zero vector.
StateVector encode_amplitude(std::span<const double> x, int n_qubits);

/// Truncated coherent state: amplitudes alpha^n / sqrt(n!), n < dim, renormalized.
StateVector encode_coherent(double x, double length_scale, std::size_t dim);

/// True when |alpha|^2 > dim, i.e. the truncation discards a large share of the norm.
bool coherent_truncation_exceeded(double x, double length_scale, std::size_t dim);

/// In-place L-layer ansatz: per layer Ry(theta) on every wire, then
/// Rz(s * phi * x_reupload) on every wire, then the CNOT ring (i -> i+1, and also
/// i -> i+2 when `dense_entangler`). `adjoint` applies the exact inverse.
void apply_ansatz_inplace(StateVector &state, const AnsatzParams &params, ScalingConfig scaling,
                          double x_reupload, bool adjoint = false, bool dense_entangler = false,
                          std::optional<AngleShift> shift = std::nullopt);

StateVector apply_ansatz(const StateVector &state, const AnsatzParams &params,
                         ScalingConfig scaling, double x_reupload, bool adjoint = false,
                         bool dense_entangler = false);

/// Angle of the gate driven by `param_index` divided by that parameter, i.e. the
/// chain-rule factor d(angle)/d(param): 1 for theta, s * x_reupload for phi.
double angle_derivative(const AnsatzParams &params, std::size_t param_index,
                        ScalingConfig scaling, double x_reupload);

/// Value re-uploaded by the QAmp ansatz: mean of the unpadded feature vector.
double qamp_reupload_value(std::span<const double> x);

/// Encoded states before the ansatz. QAmp yields one state, QRBF one per feature.
std::vector<StateVector> encoded_states(std::span<const double> x, const EncoderSpec &spec);

/// Re-uploaded scalars matching encoded_states(x, spec) one to one.
std::vector<double> reupload_values(std::span<const double> x, const EncoderSpec &spec);

/// Full feature map: encoding followed by the ansatz. QAmp gives a single state,
/// QRBF gives one state per feature. A QAmp input that is exactly zero is shifted by
/// 1e-12 per component with a warning instead of failing.
std::vector<StateVector> feature_state(std::span<const double> x, const EncoderSpec &spec,
                                       const AnsatzParams &params, ScalingConfig scaling);

struct ResourceCount {
    int cnots = 0;
    int single_qubit_gates = 0;
    int ansatz_depth = 0;
    /// Ansatz plus its adjoint, as used by the overlap circuit.
    int circuit_depth = 0;
    bool operator==(const ResourceCount &) const = default;
};

ResourceCount resource_count(const EncoderSpec &spec, int n_layers, int n_qubits);

/// Widened encoder: QAmp adds qubits (input re-padded to the larger register), QRBF
/// adds qubits and switches to the dense entangler. extra_qubits == 0 is identity.
EncoderSpec extended_variant(const EncoderSpec &spec, int extra_qubits);

}  // namespace qkbench
