#include "qkr/observables.hpp"

#include <cmath>

#include "qkr/errors.hpp"

namespace qkr {

double ipr(const StateVector& state) {
    double sum4 = 0.0;
    for (const Complex& a : state.amplitudes()) {
        const double p = std::norm(a);
        sum4 += p * p;
    }
    return 1.0 / sum4;
}

namespace {

inline double circular_distance(std::size_t n, std::size_t n0, std::size_t dim) {
    const std::size_t shifted = (n + dim + dim / 2 - n0) % dim;
    return static_cast<double>(shifted) - static_cast<double>(dim / 2);
}

} // namespace

double second_moment(const StateVector& state, std::size_t n0) {
    const std::size_t dim = state.dim();
    double sum = 0.0;
    for (std::size_t n = 0; n < dim; ++n) {
        const double d = circular_distance(n, n0, dim);
        sum += d * d * state.probability(n);
    }
    return sum;
}

double w_probability(const StateVector& state) {
    const std::size_t dim = state.dim();
    double w = 0.0;
    for (std::size_t n = dim / 4; n < 3 * (dim / 4); ++n) w += state.probability(n);
    return w;
}

WEstimate sample_w(const StateVector& state, int shots, RngStream& rng) {
    const std::size_t dim = state.dim();
    const std::size_t quarter = dim / 4;
    double sector[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t n = 0; n < dim; ++n) sector[n / quarter] += state.probability(n);

    int hits = 0;
    for (int s = 0; s < shots; ++s) {
        const double u = rng.uniform01();
        double acc = 0.0;
        int outcome = 3;
        for (int o = 0; o < 3; ++o) {
            acc += sector[o];
            if (u < acc) {
                outcome = o;
                break;
            }
        }
        if (outcome == 1 || outcome == 2) ++hits; // top qubits read 01 or 10
    }
    WEstimate est;
    est.shots = shots;
    est.estimate = static_cast<double>(hits) / shots;
    est.stderr = std::sqrt(est.estimate * (1.0 - est.estimate) / shots);
    return est;
}

double tail_plateau_level(const std::vector<double>& profile, std::size_t core_halfwidth,
                          std::size_t n0) {
    const std::size_t dim = profile.size();
    if (core_halfwidth >= dim / 2) {
        throw InvalidWidth("core halfwidth must be below half the register size");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < dim; ++n) {
        if (std::abs(circular_distance(n, n0, dim)) > static_cast<double>(core_halfwidth)) {
            sum += profile[n];
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

ObservableRecord observe(const StateVector& state, int t, std::size_t n0, bool keep_profile) {
    ObservableRecord rec;
    rec.t = t;
    rec.xi = ipr(state);
    rec.second_moment = second_moment(state, n0);
    rec.w = w_probability(state);
    if (keep_profile) rec.profile = state.probabilities();
    return rec;
}

} // namespace qkr
