#pragma once

#include <cstddef>
#include <vector>

#include "qkr/rng.hpp"
#include "qkr/state_vector.hpp"

namespace qkr {

/// Snapshot of the localization diagnostics at kick t. profile (the N
/// probabilities |psi_n|^2) is kept only when requested.
struct ObservableRecord {
    int t = 0;
    double xi = 0.0;            // inverse participation ratio, levels
    double second_moment = 0.0; // circular <(n-n0)^2>, levels^2
    double w = 0.0;             // probability in the middle-half window
    std::vector<double> profile;

    bool has_profile() const { return !profile.empty(); }
};

struct ObservableSeries {
    int n_q = 0;
    std::size_t n0 = 0;
    std::vector<ObservableRecord> records;
};

/// 1 / sum_n |psi_n|^4: effective number of occupied momentum levels.
double ipr(const StateVector& state);

/// sum_n d(n, n0)^2 |psi_n|^2 with the circular signed distance
/// d = ((n - n0 + N/2) mod N) - N/2 (momentum lives on a circle).
double second_moment(const StateVector& state, std::size_t n0);

/// Probability that the two most significant qubits read 01 or 10,
/// i.e. the summed probability over N/4 <= n < 3N/4.
double w_probability(const StateVector& state);

struct WEstimate {
    double estimate = 0.0;
    double stderr = 0.0;
    int shots = 0;
};

/// Simulates `shots` projective measurements of the top two qubits from the
/// exact 4-outcome marginal; returns the fraction in {01, 10} with the
/// binomial standard error.
WEstimate sample_w(const StateVector& state, int shots, RngStream& rng);

/// Mean probability per level over the far tail |d(n, n0)| > core_halfwidth.
double tail_plateau_level(const std::vector<double>& profile, std::size_t core_halfwidth,
                          std::size_t n0 = 0);

/// Bundles the diagnostics for one snapshot.
ObservableRecord observe(const StateVector& state, int t, std::size_t n0, bool keep_profile = false);

} // namespace qkr
