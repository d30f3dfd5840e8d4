#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qkr/imperfections.hpp"
#include "qkr/observables.hpp"
#include "qkr/rotator_circuit.hpp"
#include "qkr/split_oracle.hpp"

namespace qkr {

enum class Engine { Circuit, Oracle };

std::string engine_name(Engine engine);
Engine engine_from_name(const std::string& name);

/// Worker-pool width: the QKR_WORKERS environment variable when set (must be
/// a positive integer), otherwise the hardware concurrency.
int worker_pool_width();

/// Runs fn(0..n_items-1) on a pool of worker_pool_width() threads. Items must
/// be independent; the first thrown exception is rethrown after the pool
/// drains. Results must be written to per-item slots so the schedule cannot
/// affect the outcome.
void parallel_for_items(std::size_t n_items, const std::function<void(std::size_t)>& fn);

/// Evolves the state through t_max map iterations of the gate-level circuit,
/// with the imperfection kick after every elementary gate, recording
/// observables like oracle_evolve does.
ObservableSeries circuit_evolve(StateVector& state, const ModelParams& params,
                                const PhaseGeneratorSpec& spec, const ImperfectionProfile& profile,
                                int t_max, int record_every, std::size_t n0 = 0,
                                bool keep_profile = false);

struct ScanConfig {
    int n_q = 8;
    std::vector<double> k_grid;
    int t_max = 1000;
    int n_realizations = 4;
    Engine engine = Engine::Oracle;
    double epsilon = 0.0;
    double mu = 0.0;
    double gamma_target = 0.2;
    int m_pairs = -1; // -1 -> 2 n_q
    std::uint64_t seed = 1;
    double tail_fraction = 0.1; // trailing window for the time average

    void validate() const;
};

/// Default grid bracketing the transition: 17 points over [1.0, 2.6].
std::vector<double> default_k_grid();

struct ScanPoint {
    double k = 0.0;
    double xi_mean = 0.0;
    double xi_stderr = 0.0;
    double w_mean = 0.0;
    double w_stderr = 0.0;
};

struct ScanResult {
    ScanConfig config;
    std::vector<ScanPoint> points;
};

/// For every k and disorder realization, evolves |00...0> to t_max with the
/// configured engine and imperfection strengths, time-averages xi and W over
/// the trailing tail_fraction of kicks, and averages over realizations.
/// Disorder seeds depend only on (seed, realization), never on k, so the
/// same disorder is scanned across the whole grid.
ScanResult scan_k(const ScanConfig& config);

enum class CriticalMethod { IprMidpoint, WThreshold };

struct CriticalPoint {
    double k_c = 0.0;
    double stderr = 0.0;
    CriticalMethod method = CriticalMethod::IprMidpoint;
};

/// Locates the localization-delocalization crossing on a scan.
/// IprMidpoint: first ascending crossing of xi through the midpoint of the
/// scan's own extreme values, linearly interpolated. WThreshold: crossing of
/// W through 0.25. Standard error from propagating the two bracketing
/// point errors through the interpolation.
CriticalPoint find_critical_point(const ScanResult& scan, CriticalMethod method);

struct ScalingPoint {
    double eps_tilde = 0.0;
    double delta_k_c = 0.0;
};

struct ScalingFit {
    std::vector<ScalingPoint> used;
    int n_excluded = 0;
    double a = 0.0;
    double alpha = 0.0;
    double a_stderr = 0.0;
    double alpha_stderr = 0.0;

    double predict(double eps_tilde) const;
};

/// Least-squares power law delta_k_c = A * eps_tilde^alpha, fitted as a line
/// in log-log coordinates. Points with nonpositive coordinates are dropped
/// (NonPositiveShift if fewer than 3 survive); stderrs come from the
/// regression covariance.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

} // namespace qkr
