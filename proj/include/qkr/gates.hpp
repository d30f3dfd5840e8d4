#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qkr/state_vector.hpp"

namespace qkr {

/// Elementary gate descriptor. Angles are radians.
///
/// PhaseZ(q, a)    : exp(i a sigma^z_q), sigma^z|0> = +|0>
/// Hadamard(q)     : (sigma^z_q + sigma^x_q)/sqrt(2)
/// CNot(c, t)      : flips qubit t when qubit c is 1
/// CPhase(a, b, f) : phase e^{i f} when both qubits are 1
/// BitReversal     : free amplitude reindexing closing a QFT; zero-cost
///                   pseudo-gate, not counted as an elementary gate and not
///                   followed by an imperfection kick
struct GateDescriptor {
    enum class Kind : std::uint8_t { PhaseZ, Hadamard, CNot, CPhase, BitReversal };

    Kind kind = Kind::PhaseZ;
    int q1 = 0;
    int q2 = 0;
    double angle = 0.0;

    static GateDescriptor phase_z(int q, double angle) { return {Kind::PhaseZ, q, 0, angle}; }
    static GateDescriptor hadamard(int q) { return {Kind::Hadamard, q, 0, 0.0}; }
    static GateDescriptor cnot(int control, int target) { return {Kind::CNot, control, target, 0.0}; }
    static GateDescriptor cphase(int a, int b, double angle) { return {Kind::CPhase, a, b, angle}; }
    static GateDescriptor bit_reversal() { return {Kind::BitReversal, 0, 0, 0.0}; }

    bool is_elementary() const { return kind != Kind::BitReversal; }
};

using GateStream = std::vector<GateDescriptor>;

void apply_gate(StateVector& state, const GateDescriptor& gate);
void apply_stream(StateVector& state, const GateStream& stream);

/// exp(i angle sigma^x_j sigma^x_k); used by the static-imperfection channel.
void apply_xx_rotation(StateVector& state, int j, int k, double angle);

/// Reorders amplitudes by reversing the qubit order of each basis index.
void bit_reverse_permute(StateVector& state);

/// Gates of the quantum Fourier transform: Hadamard/controlled-phase cascade
/// followed by a BitReversal marker. n_q(n_q+1)/2 elementary gates.
GateStream qft_gate_stream(int n_q);

enum class FourierDirection { Forward, Inverse };

/// Forward maps momentum to phase representation,
///   psi(theta_j) = N^{-1/2} sum_n e^{+2 pi i n j / N} psi_n,  theta_j = 2 pi j / N;
/// Inverse is the exact adjoint. Updates the basis label.
void qft(StateVector& state, FourierDirection direction);

/// Exact adjoint stream: reversed order, conjugated angles.
GateStream adjoint_stream(const GateStream& stream);

std::size_t elementary_gate_count(const GateStream& stream);

/// Line-oriented text form, one gate per line, angles at full precision.
std::string stream_to_text(const GateStream& stream);
GateStream stream_from_text(const std::string& text);

} // namespace qkr
