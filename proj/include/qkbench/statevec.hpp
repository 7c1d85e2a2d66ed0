#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qkbench {

using Complex = std::complex<double>;

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
inline constexpr int kMaxQubits = 24;

/**
 * Dense statevector over n qubits.
 *
 * Basis labels follow the big-endian convention: qubit 0 is the most
 * significant bit of the basis index, so for n = 2 the amplitude order is
 * |q0 q1> = |00>, |01>, |10>, |11>.
 *
 * The in-place gate members mutate this object only; the free functions
 * below take their input by const reference and return a new state.
 */
class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(int n_qubits);

    int n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const Complex> amps() const noexcept { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }

    double norm() const;

    void apply_ry(int qubit, double theta);
    void apply_rz(int qubit, double phi);
    void apply_cnot(int control, int target);

  private:
    friend StateVector prepare_state(std::span<const Complex> amps);

    StateVector(int n_qubits, std::vector<Complex> amps);
    std::size_t bit_of(int qubit) const;

    int n_qubits_;
    std::vector<Complex> amps_;
};

StateVector zero_state(int n_qubits);

/// Renormalized copy of `amps`. Length must be a power of two >= 2.
StateVector prepare_state(std::span<const Complex> amps);
StateVector prepare_state(std::span<const double> amps);

StateVector apply_ry(const StateVector &state, int qubit, double theta);
StateVector apply_rz(const StateVector &state, int qubit, double phi);
StateVector apply_cnot(const StateVector &state, int control, int target);

/// <a|b> = sum_i conj(a_i) b_i
Complex overlap(const StateVector &a, const StateVector &b);

}  // namespace qkbench
