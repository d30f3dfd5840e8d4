#include "qkr/imperfections.hpp"

#include <cmath>

#include "qkr/errors.hpp"

namespace qkr {

std::vector<double> ImperfectionProfile::etas() const {
    std::vector<double> out(unit_eta.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = epsilon * unit_eta[j];
    return out;
}

std::vector<double> ImperfectionProfile::mu_couplings() const {
    std::vector<double> out(unit_mu.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = mu * unit_mu[j];
    return out;
}

void ImperfectionProfile::finalize() {
    eta_factors_.clear();
    if (epsilon == 0.0) return;
    const std::size_t dim = std::size_t{1} << n_q;
    eta_factors_.resize(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        double phase = 0.0;
        for (int j = 1; j <= n_q; ++j) {
            const std::size_t bit = std::size_t{1} << (n_q - j);
            phase += (n & bit) ? -eta(j) : eta(j);
        }
        eta_factors_[n] = std::polar(1.0, phase);
    }
}

ImperfectionProfile draw_imperfection_profile(int n_q, double epsilon, double mu, RngStream& rng) {
    ImperfectionProfile p;
    p.n_q = n_q;
    p.epsilon = epsilon;
    p.mu = mu;
    p.unit_eta.resize(n_q);
    p.unit_mu.resize(n_q);
    for (double& u : p.unit_eta) u = rng.symmetric_unit();
    for (double& v : p.unit_mu) v = rng.symmetric_unit();
    p.finalize();
    return p;
}

ImperfectionProfile make_imperfection_profile(int n_q, double epsilon, double mu,
                                              std::uint64_t master_seed, std::uint64_t realization) {
    const std::uint64_t seed =
        derive_seed(master_seed, {static_cast<std::uint64_t>(StreamPurpose::Profile), realization});
    RngStream rng(seed);
    ImperfectionProfile p = draw_imperfection_profile(n_q, epsilon, mu, rng);
    p.seed = seed;
    return p;
}

void apply_imperfection(StateVector& state, const ImperfectionProfile& profile) {
    if (profile.n_q != state.n_qubits()) {
        throw SizeMismatch("imperfection profile is for a different register size");
    }
    if (profile.is_zero()) return;
    if (profile.epsilon != 0.0) {
        const auto& factors = profile.eta_factors();
        auto& amp = state.amplitudes();
        for (std::size_t n = 0; n < amp.size(); ++n) amp[n] *= factors[n];
    }
    if (profile.mu != 0.0) {
        const int n_q = profile.n_q;
        for (int j = 1; j <= n_q; ++j) {
            apply_xx_rotation(state, j, j % n_q + 1, profile.mu_coupling(j));
        }
    }
}

void run_with_imperfections(StateVector& state, const GateStream& stream,
                            const ImperfectionProfile& profile) {
    if (profile.is_zero()) {
        apply_stream(state, stream);
        return;
    }
    for (const GateDescriptor& gate : stream) {
        apply_gate(state, gate);
        if (gate.is_elementary()) apply_imperfection(state, profile);
    }
}

} // namespace qkr

