#include "qkr/state_vector.hpp"

#include <cmath>

#include "qkr/rng.hpp"

namespace qkr {

StateVector::StateVector(int n_q, Basis basis) : n_q_(n_q), basis_(basis) {
    if (n_q < 2 || n_q > 26) {
        throw IndexOutOfRange("qubit count must be in [2, 26], got " + std::to_string(n_q));
    }
    amp_.assign(std::size_t{1} << n_q, Complex{0.0, 0.0});
}

StateVector StateVector::basis_state(int n_q, std::size_t index, Basis basis) {
    StateVector s(n_q, basis);
    if (index >= s.dim()) {
        throw IndexOutOfRange("basis index " + std::to_string(index) + " out of range");
    }
    s.amp_[index] = Complex{1.0, 0.0};
    return s;
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const Complex& a : amp_) acc += std::norm(a);
    return acc;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amp_.size());
    for (std::size_t n = 0; n < amp_.size(); ++n) p[n] = std::norm(amp_[n]);
    return p;
}

void StateVector::check_qubit(int q) const {
    if (q < 1 || q > n_q_) {
        throw IndexOutOfRange("qubit index " + std::to_string(q) + " outside [1, " +
                              std::to_string(n_q_) + "]");
    }
}

Complex overlap(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw SizeMismatch("overlap of states with different dimensions");
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < a.dim(); ++n) acc += std::conj(a[n]) * b[n];
    return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(overlap(a, b));
}

double marginal_one_probability(const StateVector& state, int q) {
    state.check_qubit(q);
    const std::size_t mask = state.qubit_mask(q);
    double p = 0.0;
    for (std::size_t n = 0; n < state.dim(); ++n) {
        if (n & mask) p += state.probability(n);
    }
    return p;
}

StateVector random_normalized_state(int n_q, std::uint64_t seed, Basis basis) {
    StateVector s(n_q, basis);
    RngStream rng(seed);
    double norm2 = 0.0;
    for (std::size_t n = 0; n < s.dim(); ++n) {
        const Complex a{rng.normal(), rng.normal()};
        s[n] = a;
        norm2 += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (std::size_t n = 0; n < s.dim(); ++n) s[n] *= scale;
    return s;
}

} // namespace qkr
