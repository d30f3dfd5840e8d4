#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qkr/gates.hpp"
#include "qkr/rng.hpp"
#include "qkr/state_vector.hpp"

namespace qkr {

/// Static-imperfection profile: after every elementary gate the state picks
/// up e^{i phi_hat} with phi_hat = sum_j (eta_j sigma^z_j
/// + mu_j sigma^x_j sigma^x_{j+1}), couplings on a circular chain (qubit n_q
/// couples back to qubit 1).
///
/// eta_j is uniform in [-eps/2, eps/2] and mu_j in [-mu/2, mu/2]. The unit
/// draws are stored separately from the strengths so profiles with the same
/// seed but different eps share disorder (paired comparisons across
/// imperfection strengths stay on common random numbers). Frozen for an
/// entire run; immutable and shareable across threads after construction.
struct ImperfectionProfile {
    int n_q = 0;
    double epsilon = 0.0;
    double mu = 0.0;
    std::uint64_t seed = 0; // stream seed the unit draws came from

    std::vector<double> unit_eta; // in [-1/2, 1/2); eta_j = epsilon * unit_eta[j-1]
    std::vector<double> unit_mu;  // in [-1/2, 1/2); mu_j = mu * unit_mu[j-1]

    double eta(int j) const { return epsilon * unit_eta[j - 1]; }
    double mu_coupling(int j) const { return mu * unit_mu[j - 1]; }
    std::vector<double> etas() const;
    std::vector<double> mu_couplings() const;

    bool is_zero() const { return epsilon == 0.0 && mu == 0.0; }

    /// Diagonal phase factors e^{i sum_j eta_j s_j(n)} for all N basis
    /// states (s_j = +1 for bit 0). Empty when epsilon = 0.
    const std::vector<Complex>& eta_factors() const { return eta_factors_; }

    /// Recomputes the diagonal factor table; called by the factories.
    void finalize();

  private:
    std::vector<Complex> eta_factors_;
};

/// Draws unit values from the given stream (2 n_q draws, eta first).
ImperfectionProfile draw_imperfection_profile(int n_q, double epsilon, double mu, RngStream& rng);

/// Standard seeding path: stream = (master, Profile, realization).
ImperfectionProfile make_imperfection_profile(int n_q, double epsilon, double mu,
                                              std::uint64_t master_seed, std::uint64_t realization = 0);

/// One application of e^{i phi_hat} in the split approximation: the exact
/// diagonal exp(i sum_j eta_j sigma^z_j) followed by the n_q mutually
/// commuting exp(i mu_j sigma^x_j sigma^x_{j+1}) factors. Deviation from the
/// exact exponential of the full sum is O(eps * mu) per application.
void apply_imperfection(StateVector& state, const ImperfectionProfile& profile);

/// Runs the stream with an imperfection kick after every elementary gate.
/// The QFT bit-reversal marker is a free reindexing and gets no kick.
void run_with_imperfections(StateVector& state, const GateStream& stream,
                            const ImperfectionProfile& profile);

} // namespace qkr
