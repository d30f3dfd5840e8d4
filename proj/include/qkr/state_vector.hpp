#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qkr/errors.hpp"

namespace qkr {

using Complex = std::complex<double>;

enum class Basis { Momentum, Phase };

/// Dense register of n_q qubits holding 2^n_q complex amplitudes.
///
/// Qubit 1 is the most significant bit of the basis index, so basis index n
/// reads as the binary word a_1 a_2 ... a_nq. The basis label records whether
/// the register currently holds the momentum or the phase representation; it
/// is bookkeeping only and never affects gate kernels.
class StateVector {
  public:
    StateVector(int n_q, Basis basis = Basis::Momentum);

    /// |index> with all amplitude on one basis state.
    static StateVector basis_state(int n_q, std::size_t index, Basis basis = Basis::Momentum);

    int n_qubits() const { return n_q_; }
    std::size_t dim() const { return amp_.size(); }
    Basis basis() const { return basis_; }
    void set_basis(Basis b) { basis_ = b; }

    Complex& operator[](std::size_t n) { return amp_[n]; }
    const Complex& operator[](std::size_t n) const { return amp_[n]; }
    std::vector<Complex>& amplitudes() { return amp_; }
    const std::vector<Complex>& amplitudes() const { return amp_; }

    double norm_squared() const;
    double probability(std::size_t n) const { return std::norm(amp_[n]); }
    std::vector<double> probabilities() const;

    /// Bit of qubit q (1-based, qubit 1 = MSB) in basis index n.
    int bit(std::size_t n, int q) const { return static_cast<int>((n >> (n_q_ - q)) & 1u); }

    /// Bit mask selecting qubit q in a basis index.
    std::size_t qubit_mask(int q) const { return std::size_t{1} << (n_q_ - q); }

    void check_qubit(int q) const;

  private:
    int n_q_;
    Basis basis_;
    std::vector<Complex> amp_;
};

Complex overlap(const StateVector& a, const StateVector& b);
double fidelity(const StateVector& a, const StateVector& b);

/// P(qubit q = 1).
double marginal_one_probability(const StateVector& state, int q);

StateVector random_normalized_state(int n_q, std::uint64_t seed, Basis basis = Basis::Momentum);

} // namespace qkr
