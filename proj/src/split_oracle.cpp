#include "qkr/split_oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "qkr/errors.hpp"

namespace qkr {

OraclePhases OraclePhases::from_circuit(const PhaseGeneratorSpec& spec) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    OraclePhases phases;
    phases.source = Source::FromCircuit;
    phases.h0 = extract_effective_phases(spec);
    for (double& h : phases.h0) {
        h = std::fmod(-h, two_pi);
        if (h < 0.0) h += two_pi;
    }
    return phases;
}

OraclePhases OraclePhases::independent_uniform(int n_q, std::uint64_t master_seed,
                                               std::uint64_t realization) {
    OraclePhases phases;
    phases.source = Source::IndependentUniform;
    phases.seed = derive_seed(master_seed,
                              {static_cast<std::uint64_t>(StreamPurpose::Disorder), realization});
    RngStream rng(phases.seed);
    phases.h0.resize(std::size_t{1} << n_q);
    for (double& h : phases.h0) h = rng.angle();
    return phases;
}

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

struct FourierWorkspace::Impl {
    fftw_plan to_phase_plan = nullptr;    // our Forward = FFTW_BACKWARD (e^{+i...})
    fftw_plan to_momentum_plan = nullptr; // our Inverse = FFTW_FORWARD (e^{-i...})
    std::size_t dim = 0;
};

FourierWorkspace::FourierWorkspace(int n_q) : impl_(new Impl), n_q_(n_q) {
    impl_->dim = std::size_t{1} << n_q;
    std::vector<Complex> scratch(impl_->dim);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard<std::mutex> lock(plan_mutex());
    const int n = static_cast<int>(impl_->dim);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    impl_->to_phase_plan = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
    impl_->to_momentum_plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
}

FourierWorkspace::~FourierWorkspace() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (impl_->to_phase_plan) fftw_destroy_plan(impl_->to_phase_plan);
    if (impl_->to_momentum_plan) fftw_destroy_plan(impl_->to_momentum_plan);
}

namespace {

void check_size(const StateVector& state, std::size_t dim) {
    if (state.dim() != dim) throw SizeMismatch("state size differs from workspace size");
}

void execute(fftw_plan plan, StateVector& state) {
    auto* buf = reinterpret_cast<fftw_complex*>(state.amplitudes().data());
    fftw_execute_dft(plan, buf, buf);
}

void scale(StateVector& state, double factor) {
    for (Complex& a : state.amplitudes()) a *= factor;
}

} // namespace

void FourierWorkspace::raw_to_phase(StateVector& state) {
    check_size(state, impl_->dim);
    execute(impl_->to_phase_plan, state);
    state.set_basis(Basis::Phase);
}

void FourierWorkspace::raw_to_momentum(StateVector& state) {
    check_size(state, impl_->dim);
    execute(impl_->to_momentum_plan, state);
    state.set_basis(Basis::Momentum);
}

void FourierWorkspace::to_phase(StateVector& state) {
    raw_to_phase(state);
    scale(state, 1.0 / std::sqrt(static_cast<double>(impl_->dim)));
}

void FourierWorkspace::to_momentum(StateVector& state) {
    raw_to_momentum(state);
    scale(state, 1.0 / std::sqrt(static_cast<double>(impl_->dim)));
}

void oracle_step(StateVector& state, const OraclePhases& phases, const ModelParams& params, int t,
                 FourierWorkspace& fft) {
    const std::size_t dim = state.dim();
    if (phases.h0.size() != dim) throw SizeMismatch("phase table size differs from state size");

    auto& amp = state.amplitudes();
    for (std::size_t n = 0; n < dim; ++n) amp[n] *= std::polar(1.0, -phases.h0[n]);

    fft.raw_to_phase(state);
    const double k_t = params.kick_strength_at(t);
    const double inv_dim = 1.0 / static_cast<double>(dim);
    const double dtheta = 2.0 * std::numbers::pi * inv_dim;
    // The 1/N of the two unnormalized transforms is folded into this pass.
    for (std::size_t j = 0; j < dim; ++j) {
        amp[j] *= std::polar(inv_dim, -k_t * std::cos(dtheta * static_cast<double>(j)));
    }
    fft.raw_to_momentum(state);
}

void oracle_step(StateVector& state, const OraclePhases& phases, const ModelParams& params, int t) {
    FourierWorkspace fft(state.n_qubits());
    oracle_step(state, phases, params, t, fft);
}

ObservableSeries oracle_evolve(StateVector& state, const OraclePhases& phases,
                               const ModelParams& params, int t_max, int record_every,
                               std::size_t n0, bool keep_profile) {
    if (t_max < 0) throw ConfigError("t_max must be >= 0");
    if (record_every < 1) throw ConfigError("record_every must be >= 1");
    ObservableSeries series;
    series.n_q = state.n_qubits();
    series.n0 = n0;
    series.records.push_back(observe(state, 0, n0, keep_profile));
    if (t_max == 0) return series;

    FourierWorkspace fft(state.n_qubits());
    for (int t = 0; t < t_max; ++t) {
        oracle_step(state, phases, params, t, fft);
        const int done = t + 1;
        if (done % record_every == 0 || done == t_max) {
            series.records.push_back(observe(state, done, n0, keep_profile));
        }
    }
    return series;
}

} // namespace qkr
