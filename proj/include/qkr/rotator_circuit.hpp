#pragma once

#include <cstdint>
#include <vector>

#include "qkr/gates.hpp"
#include "qkr/rng.hpp"

namespace qkr {

/// Real root of x^3 - x - 1 = 0 (the plastic number), 1.3247...
double plastic_lambda();

/// Generalized kicked rotator: one map iteration applies a random rotation
/// phase in momentum and the kick exp(-i k(t) cos theta) in phase
/// representation, with k(t) = k (1 + 0.75 cos(w1 t) cos(w2 t)) and
/// incommensurate w1 = 2 pi / lambda, w2 = 2 pi / lambda^2.
struct ModelParams {
    int n_q = 6;
    double k = 1.0;
    double gamma_target = 0.2; // kick sub-step size; l_t = ceil(k_t / gamma_target)
    int m_pairs = -1;          // phase/CNOT pairs in the random phase generator; -1 -> 2 n_q
    std::uint64_t seed = 0;

    int pairs() const { return m_pairs >= 0 ? m_pairs : 2 * n_q; }
    double omega1() const;
    double omega2() const;
    double kick_strength_at(int t) const;
    void validate() const;
};

/// Frozen random draws defining the diagonal phase generator U_T:
/// n_q single-qubit phases, then m entries of (phase shift, CNOT wiring).
struct PhaseGeneratorSpec {
    struct Pair {
        int control = 0; // i_k
        int target = 0;  // j_k, carries the phase shift
        double phase = 0.0;
    };

    int n_q = 0;
    std::vector<double> phi; // n_q phases of the first layer
    std::vector<Pair> pairs;

    void validate() const;
};

/// Kick sub-stepping for one map iteration: the modulated strength k_t is
/// split into l_t symmetric-product steps of angle gamma_t <= gamma_target.
struct KickSchedule {
    int t = 0;
    double k_t = 0.0;
    int l_t = 0;
    double gamma_t = 0.0;
};

KickSchedule kick_schedule(const ModelParams& params, int t);

PhaseGeneratorSpec build_phase_generator(int n_q, int m_pairs, RngStream& rng);
PhaseGeneratorSpec build_phase_generator(const ModelParams& params);

/// Gate stream of U_T = U_T^(2) U_T^(1): the n_q first-layer z phases, then
/// the m (z phase, CNOT) pairs, then the m CNOTs again in reversed order.
/// n_q + 3m elementary gates; the composed operator is diagonal.
GateStream phase_generator_stream(const PhaseGeneratorSpec& spec);

/// chi(n) with U_T |n> = e^{i chi(n)} |n>, for all N basis states, computed
/// by tracking bit permutations and phase accumulation through the stream
/// (no state-vector work).
std::vector<double> extract_effective_phases(const PhaseGeneratorSpec& spec);

/// S^m = e^{i m a_1 theta_bar} as n_q - 1 controlled phases between qubit 1
/// and each lower qubit. Only |m| in {1, 2} occurs in the kick construction.
GateStream s_power_stream(int m, int n_q);

/// R_gamma(theta_bar) for sign=+1 (sign=-1 gives R_gamma(-theta_bar) by
/// negating the S powers): five Hadamard-conjugated blocks acting on qubit 1.
GateStream r_gamma_stream(double gamma, int sign, int n_q);

/// Merged gate stream of the symmetric pair R_{g/2}(tb) R_{g/2}(-tb),
/// equal to exp(-i sigma^z_1 g cos tb) + O(g^3). 4 n_q + 7 elementary gates.
GateStream symmetric_pair_stream(double gamma, int n_q);

/// l_t repetitions of the symmetric pair; approximates exp(-i k_t cos theta)
/// with error O(l_t gamma_t^3).
GateStream kick_stream(const KickSchedule& schedule, int n_q);

/// One full map iteration: U_T gates, forward QFT, kick, inverse QFT.
GateStream map_iteration_stream(const ModelParams& params, const PhaseGeneratorSpec& spec, int t);

/// Per-iteration elementary gate budget n_g used in the rescaled imperfection
/// strength; evaluated with the bare k and gamma_target.
long gate_count(const ModelParams& params);

/// epsilon n_g sqrt(n_q).
double epsilon_tilde(double epsilon, const ModelParams& params);

} // namespace qkr
