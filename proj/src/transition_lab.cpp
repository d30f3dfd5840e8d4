#include "qkr/transition_lab.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "qkr/errors.hpp"

namespace qkr {

std::string engine_name(Engine engine) {
    return engine == Engine::Circuit ? "circuit" : "oracle";
}

Engine engine_from_name(const std::string& name) {
    if (name == "circuit") return Engine::Circuit;
    if (name == "oracle") return Engine::Oracle;
    throw ConfigError("unknown engine '" + name + "' (expected circuit or oracle)");
}

int worker_pool_width() {
    if (const char* env = std::getenv("QKR_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw InvalidWidth("QKR_WORKERS must be a positive integer, got '" + std::string(env) +
                               "'");
        }
        return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for_items(std::size_t n_items, const std::function<void(std::size_t)>& fn) {
    const std::size_t width =
        std::min<std::size_t>(static_cast<std::size_t>(worker_pool_width()), n_items);
    if (width <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_items) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

ObservableSeries circuit_evolve(StateVector& state, const ModelParams& params,
                                const PhaseGeneratorSpec& spec, const ImperfectionProfile& profile,
                                int t_max, int record_every, std::size_t n0, bool keep_profile) {
    if (t_max < 0) throw ConfigError("t_max must be >= 0");
    if (record_every < 1) throw ConfigError("record_every must be >= 1");
    ObservableSeries series;
    series.n_q = state.n_qubits();
    series.n0 = n0;
    series.records.push_back(observe(state, 0, n0, keep_profile));
    for (int t = 0; t < t_max; ++t) {
        const GateStream stream = map_iteration_stream(params, spec, t);
        run_with_imperfections(state, stream, profile);
        const int done = t + 1;
        if (done % record_every == 0 || done == t_max) {
            series.records.push_back(observe(state, done, n0, keep_profile));
        }
    }
    return series;
}

void ScanConfig::validate() const {
    if (k_grid.empty()) throw ConfigError("k_grid must not be empty");
    for (std::size_t i = 1; i < k_grid.size(); ++i) {
        if (!(k_grid[i] > k_grid[i - 1])) throw ConfigError("k_grid must be strictly ascending");
    }
    if (t_max < 0) throw ConfigError("t_max must be >= 0");
    if (n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw ConfigError("tail_fraction must be in (0, 1]");
    }
    if (engine == Engine::Oracle && (epsilon != 0.0 || mu != 0.0)) {
        throw ConfigError(
            "imperfect runs need the circuit engine (imperfections act per elementary gate)");
    }
    ModelParams probe{n_q, k_grid.front(), gamma_target, m_pairs, seed};
    probe.validate();
}

std::vector<double> default_k_grid() {
    std::vector<double> grid(17);
    for (int i = 0; i < 17; ++i) grid[i] = 1.0 + 0.1 * i;
    return grid;
}

namespace {

struct TailAverages {
    double xi = 0.0;
    double w = 0.0;
};

/// Evolves one (k, realization) cell and time-averages xi and W over the
/// trailing window.
TailAverages run_scan_cell(const ScanConfig& config, double k, std::uint64_t realization) {
    ModelParams params{config.n_q, k, config.gamma_target, config.m_pairs, config.seed};
    RngStream disorder = make_stream(config.seed, StreamPurpose::Disorder, realization);
    const PhaseGeneratorSpec spec = build_phase_generator(config.n_q, params.pairs(), disorder);

    StateVector state = StateVector::basis_state(config.n_q, 0);

    if (config.t_max == 0) {
        return {ipr(state), w_probability(state)};
    }

    const int tail_len = std::max(
        1, static_cast<int>(std::floor(config.tail_fraction * config.t_max + 1e-9)));
    const int tail_start = config.t_max - tail_len + 1;

    TailAverages sums;
    auto accumulate = [&](int done) {
        if (done >= tail_start) {
            sums.xi += ipr(state);
            sums.w += w_probability(state);
        }
    };

    if (config.engine == Engine::Oracle) {
        const OraclePhases phases = OraclePhases::from_circuit(spec);
        FourierWorkspace fft(config.n_q);
        for (int t = 0; t < config.t_max; ++t) {
            oracle_step(state, phases, params, t, fft);
            accumulate(t + 1);
        }
    } else {
        const ImperfectionProfile profile = make_imperfection_profile(
            config.n_q, config.epsilon, config.mu, config.seed, realization);
        for (int t = 0; t < config.t_max; ++t) {
            const GateStream stream = map_iteration_stream(params, spec, t);
            run_with_imperfections(state, stream, profile);
            accumulate(t + 1);
        }
    }
    sums.xi /= tail_len;
    sums.w /= tail_len;
    return sums;
}

} // namespace

ScanResult scan_k(const ScanConfig& config) {
    config.validate();
    const std::size_t n_k = config.k_grid.size();
    const std::size_t n_r = static_cast<std::size_t>(config.n_realizations);
    std::vector<TailAverages> cells(n_k * n_r);

    parallel_for_items(n_k * n_r, [&](std::size_t item) {
        const std::size_t ki = item / n_r;
        const std::size_t r = item % n_r;
        cells[item] = run_scan_cell(config, config.k_grid[ki], r);
    });

    ScanResult result;
    result.config = config;
    result.points.resize(n_k);
    for (std::size_t ki = 0; ki < n_k; ++ki) {
        ScanPoint& pt = result.points[ki];
        pt.k = config.k_grid[ki];
        double xi_sum = 0.0;
        double w_sum = 0.0;
        for (std::size_t r = 0; r < n_r; ++r) {
            xi_sum += cells[ki * n_r + r].xi;
            w_sum += cells[ki * n_r + r].w;
        }
        pt.xi_mean = xi_sum / n_r;
        pt.w_mean = w_sum / n_r;
        if (n_r > 1) {
            double xi_var = 0.0;
            double w_var = 0.0;
            for (std::size_t r = 0; r < n_r; ++r) {
                const double dx = cells[ki * n_r + r].xi - pt.xi_mean;
                const double dw = cells[ki * n_r + r].w - pt.w_mean;
                xi_var += dx * dx;
                w_var += dw * dw;
            }
            pt.xi_stderr = std::sqrt(xi_var / (n_r * (n_r - 1)));
            pt.w_stderr = std::sqrt(w_var / (n_r * (n_r - 1)));
        }
    }
    return result;
}

namespace {

struct Crossing {
    double k_c = 0.0;
    double stderr = 0.0;
};

/// First ascending crossing of y through target, linearly interpolated in k,
/// with per-point errors propagated through the interpolation.
Crossing first_ascending_crossing(const std::vector<ScanPoint>& pts, double target,
                                  bool use_xi) {
    auto value = [&](std::size_t i) { return use_xi ? pts[i].xi_mean : pts[i].w_mean; };
    auto error = [&](std::size_t i) { return use_xi ? pts[i].xi_stderr : pts[i].w_stderr; };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = value(i);
        const double hi = value(i + 1);
        if (lo <= target && target < hi) {
            const double h = pts[i + 1].k - pts[i].k;
            const double span = hi - lo;
            Crossing c;
            c.k_c = pts[i].k + (target - lo) * h / span;
            const double d_lo = h * (target - hi) / (span * span);
            const double d_hi = -h * (target - lo) / (span * span);
            c.stderr = std::sqrt(d_lo * d_lo * error(i) * error(i) +
                                 d_hi * d_hi * error(i + 1) * error(i + 1));
            return c;
        }
    }
    throw NoTransitionInRange("no ascending crossing of the threshold inside the scanned grid");
}

} // namespace

CriticalPoint find_critical_point(const ScanResult& scan, CriticalMethod method) {
    const auto& pts = scan.points;
    if (pts.size() < 2) throw NoTransitionInRange("scan has fewer than 2 grid points");

    double xi_min = pts.front().xi_mean;
    double xi_max = xi_min;
    for (const ScanPoint& p : pts) {
        xi_min = std::min(xi_min, p.xi_mean);
        xi_max = std::max(xi_max, p.xi_mean);
    }
    if (!(xi_max >= 4.0 * xi_min)) {
        throw NoTransitionInRange("scan does not span both localized and delocalized regimes "
                                  "(xi_max/xi_min < 4)");
    }

    CriticalPoint result;
    result.method = method;
    if (method == CriticalMethod::IprMidpoint) {
        const double target = 0.5 * (xi_min + xi_max);
        const Crossing c = first_ascending_crossing(pts, target, true);
        result.k_c = c.k_c;
        result.stderr = c.stderr;
    } else {
        const Crossing c = first_ascending_crossing(pts, 0.25, false);
        result.k_c = c.k_c;
        result.stderr = c.stderr;
    }
    return result;
}

double ScalingFit::predict(double eps_tilde) const {
    return a * std::pow(eps_tilde, alpha);
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
    if (points.size() < 3) {
        throw InsufficientPoints("scaling fit needs at least 3 points, got " +
                                 std::to_string(points.size()));
    }
    ScalingFit fit;
    for (const ScalingPoint& p : points) {
        if (p.eps_tilde > 0.0 && p.delta_k_c > 0.0) {
            fit.used.push_back(p);
        } else {
            ++fit.n_excluded;
        }
    }
    const std::size_t n = fit.used.size();
    if (n < 3) {
        throw NonPositiveShift("fewer than 3 points with positive eps_tilde and delta_k_c (" +
                               std::to_string(fit.n_excluded) + " excluded)");
    }

    double sx = 0.0;
    double sy = 0.0;
    for (const ScalingPoint& p : fit.used) {
        sx += std::log(p.eps_tilde);
        sy += std::log(p.delta_k_c);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const ScalingPoint& p : fit.used) {
        const double dx = std::log(p.eps_tilde) - mx;
        const double dy = std::log(p.delta_k_c) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw InsufficientPoints("all eps_tilde values coincide; slope undefined");

    fit.alpha = sxy / sxx;
    const double intercept = my - fit.alpha * mx;
    fit.a = std::exp(intercept);

    double ssr = 0.0;
    for (const ScalingPoint& p : fit.used) {
        const double r = std::log(p.delta_k_c) - (intercept + fit.alpha * std::log(p.eps_tilde));
        ssr += r * r;
    }
    if (n > 2) {
        const double s2 = ssr / (n - 2);
        fit.alpha_stderr = std::sqrt(s2 / sxx);
        const double intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
        fit.a_stderr = fit.a * intercept_stderr;
    }
    return fit;
}

} // namespace qkr
