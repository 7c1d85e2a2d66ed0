#include "qkbench/statevec.hpp"

#include "qkbench/errors.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace qkbench {

namespace {

void check_qubit_count(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(kMaxQubits) + "]");
    }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_qubit_count(n_qubits);
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amps)
    : n_qubits_(n_qubits), amps_(std::move(amps)) {}

double StateVector::norm() const {
    double acc = 0.0;
    for (const auto &a : amps_) acc += std::norm(a);
    return std::sqrt(acc);
}

std::size_t StateVector::bit_of(int qubit) const {
    if (qubit < 0 || qubit >= n_qubits_) {
        throw ConfigError("qubit index " + std::to_string(qubit) + " out of range for " +
                          std::to_string(n_qubits_) + " qubits");
    }
    return std::size_t{1} << (n_qubits_ - 1 - qubit);
}

void StateVector::apply_ry(int qubit, double theta) {
    const std::size_t bit = bit_of(qubit);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const Complex a0 = amps_[i];
        const Complex a1 = amps_[i | bit];
        amps_[i] = c * a0 - s * a1;
        amps_[i | bit] = s * a0 + c * a1;
    }
}

void StateVector::apply_rz(int qubit, double phi) {
    const std::size_t bit = bit_of(qubit);
    const Complex lo = std::polar(1.0, -0.5 * phi);
    const Complex hi = std::polar(1.0, 0.5 * phi);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        amps_[i] *= (i & bit) ? hi : lo;
    }
}

void StateVector::apply_cnot(int control, int target) {
    if (control == target) {
        throw ConfigError("CNOT control and target must differ (both " + std::to_string(control) +
                          ")");
    }
    const std::size_t cbit = bit_of(control);
    const std::size_t tbit = bit_of(target);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
    }
}

StateVector zero_state(int n_qubits) { return StateVector(n_qubits); }

StateVector prepare_state(std::span<const Complex> amps) {
    const std::size_t n = amps.size();
    if (n < 2 || !std::has_single_bit(n)) {
        throw ConfigError("state length " + std::to_string(n) + " is not a power of two >= 2");
    }
    const int n_qubits = std::countr_zero(n);
    check_qubit_count(n_qubits);
    double norm2 = 0.0;
    for (const auto &a : amps) norm2 += std::norm(a);
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
        throw DataError("cannot prepare a state from a zero or non-finite vector");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<Complex> out(amps.begin(), amps.end());
    for (auto &a : out) a *= inv;
    return StateVector(n_qubits, std::move(out));
}

StateVector prepare_state(std::span<const double> amps) {
    std::vector<Complex> c(amps.begin(), amps.end());
    return prepare_state(std::span<const Complex>(c));
}

StateVector apply_ry(const StateVector &state, int qubit, double theta) {
    StateVector out = state;
    out.apply_ry(qubit, theta);
    return out;
}

StateVector apply_rz(const StateVector &state, int qubit, double phi) {
    StateVector out = state;
    out.apply_rz(qubit, phi);
    return out;
}

StateVector apply_cnot(const StateVector &state, int control, int target) {
    StateVector out = state;
    out.apply_cnot(control, target);
    return out;
}

Complex overlap(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw ConfigError("overlap of states with different dimensions (" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
    Complex acc{0.0, 0.0};
    const auto pa = a.amps();
    const auto pb = b.amps();
    for (std::size_t i = 0; i < pa.size(); ++i) acc += std::conj(pa[i]) * pb[i];
    return acc;
}

}  // namespace qkbench
