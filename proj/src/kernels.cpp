#include "qkbench/kernels.hpp"

#include "qkbench/errors.hpp"

#include "json.hpp"
#include <omp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace qkbench {

namespace {

constexpr double kClampSlack = 1e-9;

double clamp_unit(double v) {
    if (v > 1.0) {
        if (v > 1.0 + kClampSlack) {
            throw NumericalError("kernel entry " + std::to_string(v) + " exceeds 1");
        }
        return 1.0;
    }
    if (v < 0.0) {
        if (v < -kClampSlack) {
            throw NumericalError("kernel entry " + std::to_string(v) + " is negative");
        }
        return 0.0;
    }
    return v;
}

std::vector<double> row_vector(const Samples &X, Eigen::Index i) {
    std::vector<double> out(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(j)] = X(i, j);
    return out;
}

KernelMeta quantum_meta(const QuantumKernel &qk) {
    KernelMeta meta;
    meta.kind = qk.spec.kind == EncoderKind::QAmp ? KernelKind::QAmp : KernelKind::QRBF;
    meta.hyperparameters["s"] = qk.scaling.s;
    meta.hyperparameters["n_qubits"] = qk.spec.n_qubits;
    meta.hyperparameters["n_layers"] = qk.params.n_layers();
    if (qk.spec.kind == EncoderKind::QRBF) meta.hyperparameters["c"] = qk.spec.length_scale;
    return meta;
}

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::RBF: return "rbf";
        case KernelKind::QAmp: return "qamp";
        case KernelKind::QRBF: return "qrbf";
    }
    return "linear";
}

KernelKind parse_kernel_kind(const std::string &name) {
    if (name == "linear") return KernelKind::Linear;
    if (name == "rbf") return KernelKind::RBF;
    if (name == "qamp") return KernelKind::QAmp;
    if (name == "qrbf") return KernelKind::QRBF;
    throw ConfigError("unknown kernel kind '" + name + "'");
}

std::vector<std::size_t> iota_ids(std::size_t n, std::size_t offset) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), offset);
    return ids;
}

double fidelity(const StateVector &a, const StateVector &b) { return std::norm(overlap(a, b)); }

std::vector<std::vector<StateVector>> feature_states(const Samples &X, const QuantumKernel &qk) {
    qk.spec.validate();
    qk.scaling.validate();
    if (qk.params.n_qubits() != qk.spec.n_qubits) {
        throw ConfigError("ansatz has " + std::to_string(qk.params.n_qubits()) +
                          " qubits but encoder uses " + std::to_string(qk.spec.n_qubits));
    }
    if (qk.spec.kind == EncoderKind::QAmp && static_cast<std::size_t>(X.cols()) > qk.spec.hilbert_dim()) {
        throw ConfigError(std::to_string(X.cols()) + " features do not fit in " + std::to_string(qk.spec.n_qubits) +
                          " amplitude-encoding qubits");
    }
    const auto m = static_cast<std::size_t>(X.rows());
    std::vector<std::vector<StateVector>> states(m);
    std::vector<std::string> errors(m);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        try {
            const auto x = row_vector(X, i);
            states[static_cast<std::size_t>(i)] = feature_state(x, qk.spec, qk.params, qk.scaling);
        } catch (const std::exception &e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!errors[i].empty()) throw DataError("sample " + std::to_string(i) + ": " + errors[i]);
    }
    return states;
}

double quantum_kernel_value(const std::vector<StateVector> &a, const std::vector<StateVector> &b) {
    if (a.size() != b.size() || a.empty()) {
        throw ConfigError("feature-state lists differ in length");
    }
    if (a.size() == 1) return fidelity(a[0], b[0]);
    double acc = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) acc += fidelity(a[m], b[m]);
    return acc / static_cast<double>(a.size());
}

KernelMatrix gram_quantum(const Samples &X, const QuantumKernel &qk) {
    const auto states = feature_states(X, qk);
    const Eigen::Index m = X.rows();
    KernelMatrix K;
    K.values = Eigen::MatrixXd::Zero(m, m);
    // Each entry is computed independently, so the result does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < m; ++i) {
        K.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double v = quantum_kernel_value(states[static_cast<std::size_t>(i)],
                                                  states[static_cast<std::size_t>(j)]);
            K.values(i, j) = v;
            K.values(j, i) = v;
        }
    }
    K.values = K.values.unaryExpr(&clamp_unit);
    K.row_ids = iota_ids(static_cast<std::size_t>(m));
    K.col_ids = K.row_ids;
    K.meta = quantum_meta(qk);
    return K;
}

KernelMatrix gram_quantum(const Samples &X1, const Samples &X2, const QuantumKernel &qk) {
    if (X1.cols() != X2.cols()) throw ConfigError("feature dimension mismatch between sample sets");
    const auto s1 = feature_states(X1, qk);
    const auto s2 = feature_states(X2, qk);
    KernelMatrix K;
    K.values.resize(X1.rows(), X2.rows());
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < X1.rows(); ++i) {
        for (Eigen::Index j = 0; j < X2.rows(); ++j) {
            K.values(i, j) = quantum_kernel_value(s1[static_cast<std::size_t>(i)],
                                                  s2[static_cast<std::size_t>(j)]);
        }
    }
    K.values = K.values.unaryExpr(&clamp_unit);
    K.row_ids = iota_ids(static_cast<std::size_t>(X1.rows()));
    K.col_ids = iota_ids(static_cast<std::size_t>(X2.rows()));
    K.meta = quantum_meta(qk);
    return K;
}

namespace {

void require_kind(const EncoderSpec &spec, EncoderKind kind) {
    if (spec.kind != kind) {
        throw ConfigError("encoder kind " + to_string(spec.kind) + " passed where " +
                          to_string(kind) + " was expected");
    }
}

}  // namespace

KernelMatrix gram_qamp(const Samples &X, const EncoderSpec &spec, const AnsatzParams &params,
                       ScalingConfig scaling) {
    require_kind(spec, EncoderKind::QAmp);
    return gram_quantum(X, QuantumKernel{spec, params, scaling});
}

KernelMatrix gram_qamp(const Samples &X1, const Samples &X2, const EncoderSpec &spec,
                       const AnsatzParams &params, ScalingConfig scaling) {
    require_kind(spec, EncoderKind::QAmp);
    return gram_quantum(X1, X2, QuantumKernel{spec, params, scaling});
}

KernelMatrix gram_qrbf(const Samples &X, const EncoderSpec &spec, const AnsatzParams &params,
                       ScalingConfig scaling) {
    require_kind(spec, EncoderKind::QRBF);
    return gram_quantum(X, QuantumKernel{spec, params, scaling});
}

KernelMatrix gram_qrbf(const Samples &X1, const Samples &X2, const EncoderSpec &spec,
                       const AnsatzParams &params, ScalingConfig scaling) {
    require_kind(spec, EncoderKind::QRBF);
    return gram_quantum(X1, X2, QuantumKernel{spec, params, scaling});
}

double kernel_entry_via_adjoint(std::span<const double> x1, std::span<const double> x2,
                                const QuantumKernel &qk) {
    auto enc1 = encoded_states(x1, qk.spec);
    const auto enc2 = encoded_states(x2, qk.spec);
    const auto up1 = reupload_values(x1, qk.spec);
    const auto up2 = reupload_values(x2, qk.spec);
    if (enc1.size() != enc2.size()) throw ConfigError("feature dimension mismatch");
    const bool dense = qk.spec.dense_entangler();
    double acc = 0.0;
    for (std::size_t m = 0; m < enc1.size(); ++m) {
        StateVector &psi = enc1[m];
        apply_ansatz_inplace(psi, qk.params, qk.scaling, up1[m], false, dense);
        apply_ansatz_inplace(psi, qk.params, qk.scaling, up2[m], true, dense);
        acc += std::norm(overlap(enc2[m], psi));
    }
    return acc / static_cast<double>(enc1.size());
}

Gamma Gamma::parse(const std::string &text) {
    if (text == "scale") return Gamma{Mode::Scale, 0.0};
    if (text == "auto") return Gamma{Mode::Auto, 0.0};
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception &) {
        throw ConfigError("gamma must be a positive number, 'scale' or 'auto' (got '" + text + "')");
    }
    if (pos != text.size() || !(v > 0.0)) {
        throw ConfigError("gamma must be a positive number, 'scale' or 'auto' (got '" + text + "')");
    }
    return Gamma{Mode::Value, v};
}

std::string Gamma::to_string() const {
    switch (mode) {
        case Mode::Scale: return "scale";
        case Mode::Auto: return "auto";
        case Mode::Value: break;
    }
    std::ostringstream os;
    os << std::setprecision(17) << value;
    return os.str();
}

double Gamma::resolve(const Samples &X_train) const {
    const auto d = static_cast<double>(X_train.cols());
    switch (mode) {
        case Mode::Value: return value;
        case Mode::Auto: return 1.0 / d;
        case Mode::Scale: {
            const double mean = X_train.mean();
            const double var = (X_train.array() - mean).square().mean();
            return var > 0.0 ? 1.0 / (d * var) : 1.0;
        }
    }
    return value;
}

KernelMatrix gram_linear(const Samples &X1, const Samples &X2) {
    if (X1.cols() != X2.cols()) throw ConfigError("feature dimension mismatch between sample sets");
    KernelMatrix K;
    K.values = X1 * X2.transpose();
    K.row_ids = iota_ids(static_cast<std::size_t>(X1.rows()));
    K.col_ids = iota_ids(static_cast<std::size_t>(X2.rows()));
    K.meta.kind = KernelKind::Linear;
    return K;
}

KernelMatrix gram_rbf(const Samples &X1, const Samples &X2, double gamma) {
    if (X1.cols() != X2.cols()) throw ConfigError("feature dimension mismatch between sample sets");
    if (!(gamma > 0.0)) throw ConfigError("rbf gamma must be positive");
    KernelMatrix K;
    K.values.resize(X1.rows(), X2.rows());
    for (Eigen::Index i = 0; i < X1.rows(); ++i) {
        for (Eigen::Index j = 0; j < X2.rows(); ++j) {
            K.values(i, j) = std::exp(-gamma * (X1.row(i) - X2.row(j)).squaredNorm());
        }
    }
    K.row_ids = iota_ids(static_cast<std::size_t>(X1.rows()));
    K.col_ids = iota_ids(static_cast<std::size_t>(X2.rows()));
    K.meta.kind = KernelKind::RBF;
    K.meta.hyperparameters["gamma"] = gamma;
    return K;
}

void save_kernel(const KernelMatrix &K, const std::filesystem::path &csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write " + csv_path.string());
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            if (j) out << ',';
            out << K.values(i, j);
        }
        out << '\n';
    }
    nlohmann::json meta;
    meta["kind"] = to_string(K.meta.kind);
    meta["hyperparameters"] = K.meta.hyperparameters;
    meta["checkpoint_hash"] = K.meta.checkpoint_hash;
    meta["rows"] = K.rows();
    meta["cols"] = K.cols();
    meta["row_ids"] = K.row_ids;
    meta["col_ids"] = K.col_ids;
    std::ofstream side(csv_path.string() + ".json");
    side << meta.dump(2) << '\n';
}

KernelMatrix load_kernel(const std::filesystem::path &csv_path) {
    std::ifstream side(csv_path.string() + ".json");
    if (!side) throw DataError("missing kernel metadata sidecar for " + csv_path.string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(side);
    } catch (const nlohmann::json::exception &e) {
        throw DataError("bad kernel metadata: " + std::string(e.what()));
    }
    KernelMatrix K;
    const auto rows = meta.at("rows").get<Eigen::Index>();
    const auto cols = meta.at("cols").get<Eigen::Index>();
    K.values.resize(rows, cols);
    K.meta.kind = parse_kernel_kind(meta.at("kind").get<std::string>());
    K.meta.hyperparameters = meta.at("hyperparameters").get<std::map<std::string, double>>();
    K.meta.checkpoint_hash = meta.at("checkpoint_hash").get<std::string>();
    K.row_ids = meta.at("row_ids").get<std::vector<std::size_t>>();
    K.col_ids = meta.at("col_ids").get<std::vector<std::size_t>>();

    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot read " + csv_path.string());
    std::string line;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw DataError("kernel file truncated at row " + std::to_string(i));
        std::stringstream ss(line);
        std::string cell;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!std::getline(ss, cell, ',')) throw DataError("kernel row " + std::to_string(i) + " too short");
            K.values(i, j) = std::stod(cell);
        }
    }
    return K;
}

}  // namespace qkbench
