#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qkr/observables.hpp"
#include "qkr/rotator_circuit.hpp"
#include "qkr/state_vector.hpp"

namespace qkr {

/// Rotation phases H0(n) consumed by the exact split evolution. FromCircuit
/// stores H0(n) = -chi(n) mod 2 pi so that e^{-i H0(n)} reproduces the phase
/// generator's e^{i chi(n)} exactly; IndependentUniform draws fresh uniform
/// phases in [0, 2 pi).
struct OraclePhases {
    enum class Source { FromCircuit, IndependentUniform };

    Source source = Source::IndependentUniform;
    std::uint64_t seed = 0; // stream seed for IndependentUniform, else 0
    std::vector<double> h0;

    static OraclePhases from_circuit(const PhaseGeneratorSpec& spec);
    static OraclePhases independent_uniform(int n_q, std::uint64_t master_seed,
                                            std::uint64_t realization = 0);
};

/// Owns in-place FFTW plans for one register size. Forward matches the gate
/// QFT convention psi(theta_j) = N^{-1/2} sum_n e^{+2 pi i n j / N} psi_n;
/// Inverse is its exact adjoint. Plan creation is serialized internally
/// (FFTW planning is not thread-safe); one workspace per thread.
class FourierWorkspace {
  public:
    explicit FourierWorkspace(int n_q);
    ~FourierWorkspace();
    FourierWorkspace(const FourierWorkspace&) = delete;
    FourierWorkspace& operator=(const FourierWorkspace&) = delete;

    void to_phase(StateVector& state);    // momentum -> phase, normalized
    void to_momentum(StateVector& state); // phase -> momentum, normalized

    /// Unnormalized raw transforms (caller folds the 1/N elsewhere).
    void raw_to_phase(StateVector& state);
    void raw_to_momentum(StateVector& state);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int n_q_;
};

/// One exact map iteration at kick t: multiply by e^{-i H0(n)}, transform to
/// the phase grid, multiply by e^{-i k_t cos theta_j}, transform back.
void oracle_step(StateVector& state, const OraclePhases& phases, const ModelParams& params, int t,
                 FourierWorkspace& fft);

/// Convenience overload constructing a workspace for a single step.
void oracle_step(StateVector& state, const OraclePhases& phases, const ModelParams& params, int t);

/// Iterates oracle_step for t = 0 .. t_max-1 from the given state, recording
/// observables at t = 0 and then every record_every kicks (and always at
/// t_max). keep_profile attaches |psi_n|^2 to each recorded row.
ObservableSeries oracle_evolve(StateVector& state, const OraclePhases& phases,
                               const ModelParams& params, int t_max, int record_every,
                               std::size_t n0 = 0, bool keep_profile = false);

} // namespace qkr
