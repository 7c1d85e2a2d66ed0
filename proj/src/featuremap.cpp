#include "qkbench/featuremap.hpp"

#include "qkbench/errors.hpp"
#include "qkbench/util.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

namespace qkbench {

std::string to_string(EncoderKind kind) { return kind == EncoderKind::QAmp ? "qamp" : "qrbf"; }

std::string to_string(Extension ext) {
    switch (ext) {
        case Extension::None: return "none";
        case Extension::ReuploadSpread: return "reupload_spread";
        case Extension::DenseEntangle: return "dense_entangle";
    }
    return "none";
}

EncoderKind parse_encoder_kind(const std::string &name) {
    if (name == "qamp") return EncoderKind::QAmp;
    if (name == "qrbf") return EncoderKind::QRBF;
    throw ConfigError("unknown encoder kind '" + name + "'");
}

Extension parse_extension(const std::string &name) {
    if (name == "none") return Extension::None;
    if (name == "reupload_spread") return Extension::ReuploadSpread;
    if (name == "dense_entangle") return Extension::DenseEntangle;
    throw ConfigError("unknown extension '" + name + "'");
}

void EncoderSpec::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("encoder qubit count " + std::to_string(n_qubits) + " out of range");
    }
    if (kind == EncoderKind::QRBF && !(length_scale > 0.0 && std::isfinite(length_scale))) {
        throw ConfigError("QRBF length scale c must be positive and finite");
    }
    if (dense_entangler() && n_qubits < 3) {
        throw ConfigError("dense entangler needs at least 3 qubits");
    }
    if (extra_qubits < 0) throw ConfigError("extra_qubits must be >= 0");
}

int qubits_for_features(std::size_t n_features) {
    if (n_features <= 2) return 1;
    return std::bit_width(n_features - 1);
}

AnsatzParams::AnsatzParams(int n_layers, int n_qubits)
    : AnsatzParams(n_layers, n_qubits,
                   std::vector<double>(2 * static_cast<std::size_t>(std::max(n_layers, 0)) *
                                           static_cast<std::size_t>(std::max(n_qubits, 0)),
                                       0.0)) {}

AnsatzParams::AnsatzParams(int n_layers, int n_qubits, std::vector<double> flat)
    : n_layers_(n_layers), n_qubits_(n_qubits), values_(std::move(flat)) {
    if (n_layers < 1 || n_qubits < 1) {
        throw ConfigError("ansatz needs L >= 1 and N >= 1");
    }
    if (values_.size() != 2 * static_cast<std::size_t>(n_layers) * n_qubits) {
        throw ConfigError("ansatz parameter count " + std::to_string(values_.size()) +
                          " != 2*L*N = " + std::to_string(2 * n_layers * n_qubits));
    }
}

void ScalingConfig::validate() const {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("scaling s must be finite and >= 0");
}

std::vector<double> cyclic_pad(std::span<const double> x, std::size_t target_len) {
    if (x.empty()) throw DataError("cannot pad an empty feature vector");
    if (target_len < x.size()) {
        throw ConfigError("pad target " + std::to_string(target_len) + " shorter than input " +
                          std::to_string(x.size()));
    }
    std::vector<double> out(target_len);
    for (std::size_t i = 0; i < target_len; ++i) out[i] = x[i % x.size()];
    return out;
}

StateVector encode_amplitude(std::span<const double> x, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (x.size() > dim) {
        throw ConfigError(std::to_string(x.size()) + " features do not fit in " +
                          std::to_string(n_qubits) + " qubits");
    }
    auto padded = cyclic_pad(x, dim);
    const double norm2 = std::inner_product(padded.begin(), padded.end(), padded.begin(), 0.0);
    if (!(norm2 > 0.0)) throw DataError("amplitude encoding of an all-zero vector");
    return prepare_state(std::span<const double>(padded));
}

StateVector encode_coherent(double x, double length_scale, std::size_t dim) {
    if (!(length_scale > 0.0)) throw ConfigError("coherent length scale must be positive");
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw ConfigError("coherent truncation dimension must be a power of two >= 2");
    }
    if (!std::isfinite(x)) throw DataError("non-finite feature value");
    const double alpha = x / (std::sqrt(2.0) * length_scale);
    // a_{n+1} = a_n * alpha / sqrt(n+1)
    std::vector<double> amps(dim);
    amps[0] = 1.0;
    for (std::size_t n = 0; n + 1 < dim; ++n) {
        amps[n + 1] = amps[n] * alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return prepare_state(std::span<const double>(amps));
}

bool coherent_truncation_exceeded(double x, double length_scale, std::size_t dim) {
    const double alpha = x / (std::sqrt(2.0) * length_scale);
    return alpha * alpha > static_cast<double>(dim);
}

namespace {

void apply_entangler(StateVector &state, bool dense, bool reverse) {
    const int n = state.n_qubits();
    if (n < 2) return;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        pairs.emplace_back(i, (i + 1) % n);
        if (dense) pairs.emplace_back(i, (i + 2) % n);
    }
    if (reverse) {
        for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) state.apply_cnot(it->first, it->second);
    } else {
        for (const auto &[c, t] : pairs) state.apply_cnot(c, t);
    }
}

}  // namespace

void apply_ansatz_inplace(StateVector &state, const AnsatzParams &params, ScalingConfig scaling,
                          double x_reupload, bool adjoint, bool dense_entangler,
                          std::optional<AngleShift> shift) {
    const int n = params.n_qubits();
    if (n != state.n_qubits()) {
        throw ConfigError("ansatz built for " + std::to_string(n) + " qubits applied to a " +
                          std::to_string(state.n_qubits()) + "-qubit state");
    }
    const int layers = params.n_layers();
    auto shifted = [&](std::size_t idx, double angle) {
        return (shift && shift->param_index == idx) ? angle + shift->delta : angle;
    };
    auto ry_angle = [&](int l, int i) { return shifted(params.theta_index(l, i), params.theta(l, i)); };
    auto rz_angle = [&](int l, int i) {
        return shifted(params.phi_index(l, i), scaling.s * params.phi(l, i) * x_reupload);
    };

    if (!adjoint) {
        for (int l = 0; l < layers; ++l) {
            for (int i = 0; i < n; ++i) state.apply_ry(i, ry_angle(l, i));
            for (int i = 0; i < n; ++i) state.apply_rz(i, rz_angle(l, i));
            apply_entangler(state, dense_entangler, false);
        }
    } else {
        for (int l = layers - 1; l >= 0; --l) {
            apply_entangler(state, dense_entangler, true);
            for (int i = n - 1; i >= 0; --i) state.apply_rz(i, -rz_angle(l, i));
            for (int i = n - 1; i >= 0; --i) state.apply_ry(i, -ry_angle(l, i));
        }
    }
}

StateVector apply_ansatz(const StateVector &state, const AnsatzParams &params,
                         ScalingConfig scaling, double x_reupload, bool adjoint,
                         bool dense_entangler) {
    StateVector out = state;
    apply_ansatz_inplace(out, params, scaling, x_reupload, adjoint, dense_entangler);
    return out;
}

double angle_derivative(const AnsatzParams &params, std::size_t param_index,
                        ScalingConfig scaling, double x_reupload) {
    return params.is_phi(param_index) ? scaling.s * x_reupload : 1.0;
}

double qamp_reupload_value(std::span<const double> x) {
    if (x.empty()) throw DataError("empty feature vector");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<StateVector> encoded_states(std::span<const double> x, const EncoderSpec &spec) {
    if (x.empty()) throw DataError("empty feature vector");
    std::vector<StateVector> out;
    if (spec.kind == EncoderKind::QAmp) {
        const std::size_t dim = spec.hilbert_dim();
        if (x.size() > dim) {
            throw ConfigError(std::to_string(x.size()) + " features do not fit in " +
                              std::to_string(spec.n_qubits) + " qubits");
        }
        auto padded = cyclic_pad(x, dim);
        bool all_zero = true;
        for (double v : padded) all_zero = all_zero && v == 0.0;
        if (all_zero) {
            warn("QAmp input is exactly zero; encoding the 1e-12-shifted vector instead");
            for (double &v : padded) v = 1e-12;
        }
        out.push_back(prepare_state(std::span<const double>(padded)));
    } else {
        out.reserve(x.size());
        for (double v : x) {
            if (coherent_truncation_exceeded(v, spec.length_scale, spec.hilbert_dim())) {
                warn("coherent amplitude |alpha|^2 exceeds the truncation dimension");
            }
            out.push_back(encode_coherent(v, spec.length_scale, spec.hilbert_dim()));
        }
    }
    return out;
}

std::vector<double> reupload_values(std::span<const double> x, const EncoderSpec &spec) {
    if (spec.kind == EncoderKind::QAmp) return {qamp_reupload_value(x)};
    return {x.begin(), x.end()};
}

std::vector<StateVector> feature_state(std::span<const double> x, const EncoderSpec &spec,
                                       const AnsatzParams &params, ScalingConfig scaling) {
    auto states = encoded_states(x, spec);
    const auto reup = reupload_values(x, spec);
    for (std::size_t m = 0; m < states.size(); ++m) {
        apply_ansatz_inplace(states[m], params, scaling, reup[m], false, spec.dense_entangler());
    }
    return states;
}

ResourceCount resource_count(const EncoderSpec &spec, int n_layers, int n_qubits) {
    if (n_layers < 1 || n_qubits < 1) throw ConfigError("resource count needs L, N >= 1");
    const int per_layer_cnots = n_qubits < 2 ? 0 : (spec.dense_entangler() ? 2 : 1) * n_qubits;
    ResourceCount rc;
    rc.cnots = n_layers * per_layer_cnots;
    rc.single_qubit_gates = 2 * n_layers * n_qubits;
    // Two rotation slices plus a strictly sequential CNOT ring per layer.
    rc.ansatz_depth = n_layers * (per_layer_cnots + 2);
    rc.circuit_depth = 2 * rc.ansatz_depth;
    return rc;
}

EncoderSpec extended_variant(const EncoderSpec &spec, int extra_qubits) {
    if (extra_qubits < 0) throw ConfigError("extra_qubits must be >= 0");
    if (extra_qubits == 0) return spec;
    EncoderSpec out = spec;
    out.n_qubits += extra_qubits;
    out.extra_qubits += extra_qubits;
    out.extension =
        spec.kind == EncoderKind::QAmp ? Extension::ReuploadSpread : Extension::DenseEntangle;
    out.validate();
    return out;
}

}  // namespace qkbench
