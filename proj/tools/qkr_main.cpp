// Command-line front end: evolve / scan / critical / scaling drive
// run_experiment from a JSON config with flag overrides; verify runs a quick
// self-check battery.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "qkr/gates.hpp"
#include "qkr/imperfections.hpp"
#include "qkr/io.hpp"
#include "qkr/observables.hpp"
#include "qkr/rotator_circuit.hpp"
#include "qkr/split_oracle.hpp"
#include "qkr/state_vector.hpp"
#include "qkr/transition_lab.hpp"
#include "qkr/version.hpp"

namespace {

using namespace qkr;

// ---------------------------------------------------------------------------
// Config plumbing: bind every override flag, remember which ones the user
// passed, and apply those on top of the loaded config file.

struct ConfigOverrides {
    std::string config_path;
    ExperimentConfig values;
    std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> appliers;

    void apply(ExperimentConfig& target) const {
        for (const auto& [opt, fn] : appliers) {
            if (opt->count() > 0) fn(target);
        }
    }
};

template <typename T>
void bind(ConfigOverrides& o, CLI::Option* opt, T ExperimentConfig::* field) {
    o.appliers.emplace_back(opt, [&o, field](ExperimentConfig& c) { c.*field = o.values.*field; });
}

std::shared_ptr<ConfigOverrides> add_experiment_options(CLI::App* sub) {
    auto o = std::make_shared<ConfigOverrides>();
    ExperimentConfig& v = o->values;
    sub->add_option("-c,--config", o->config_path, "JSON config file; flags override its fields");
    bind(*o, sub->add_option("-o,--out", v.out_dir, "output directory"), &ExperimentConfig::out_dir);
    bind(*o, sub->add_option("--n-q", v.n_q, "qubit count"), &ExperimentConfig::n_q);
    bind(*o, sub->add_option("--k", v.k, "kick strength"), &ExperimentConfig::k);
    bind(*o, sub->add_option("--gamma-target", v.gamma_target, "kick sub-step size"),
         &ExperimentConfig::gamma_target);
    bind(*o, sub->add_option("--m-pairs", v.m_pairs, "phase generator pairs (-1: 2 n_q)"),
         &ExperimentConfig::m_pairs);
    bind(*o, sub->add_option("--seed", v.seed, "master seed"), &ExperimentConfig::seed);
    bind(*o, sub->add_option("--engine", v.engine, "circuit | oracle"), &ExperimentConfig::engine);
    bind(*o, sub->add_option("--phases-source", v.phases_source, "circuit | uniform"),
         &ExperimentConfig::phases_source);
    bind(*o, sub->add_option("--epsilon", v.epsilon, "one-qubit imperfection strength"),
         &ExperimentConfig::epsilon);
    bind(*o, sub->add_option("--mu", v.mu, "inter-qubit coupling strength"), &ExperimentConfig::mu);
    bind(*o, sub->add_option("--t-max", v.t_max, "number of kicks"), &ExperimentConfig::t_max);
    bind(*o, sub->add_option("--record-every", v.record_every, "kicks between records"),
         &ExperimentConfig::record_every);
    bind(*o, sub->add_option("--n0", v.n0, "initial momentum level"), &ExperimentConfig::n0);
    bind(*o, sub->add_flag("--keep-profile", v.keep_profile, "dump |psi_n|^2 per record"),
         &ExperimentConfig::keep_profile);
    bind(*o, sub->add_option("--k-grid", v.k_grid, "explicit k grid"), &ExperimentConfig::k_grid);
    bind(*o, sub->add_option("--k-min", v.k_min, "grid start"), &ExperimentConfig::k_min);
    bind(*o, sub->add_option("--k-max", v.k_max, "grid end"), &ExperimentConfig::k_max);
    bind(*o, sub->add_option("--k-points", v.k_points, "grid size"), &ExperimentConfig::k_points);
    bind(*o, sub->add_option("--realizations", v.realizations, "disorder realizations per point"),
         &ExperimentConfig::realizations);
    bind(*o, sub->add_option("--tail-fraction", v.tail_fraction, "trailing time-average window"),
         &ExperimentConfig::tail_fraction);
    bind(*o, sub->add_option("--epsilon-list", v.epsilon_list, "imperfection strengths (critical)"),
         &ExperimentConfig::epsilon_list);
    bind(*o, sub->add_option("--critical-method", v.critical_method, "ipr | w"),
         &ExperimentConfig::critical_method);
    bind(*o, sub->add_option("--k-gate-count", v.k_gate_count, "k in n_g for eps_tilde"),
         &ExperimentConfig::k_gate_count);
    bind(*o, sub->add_option("--points-csv", v.points_csv, "CSV with eps_tilde/delta_kc columns"),
         &ExperimentConfig::points_csv);
    return o;
}

int run_mode(const std::string& mode, const ConfigOverrides& overrides) {
    ExperimentConfig config;
    if (!overrides.config_path.empty()) config = load_config(overrides.config_path);
    overrides.apply(config);
    config.mode = mode;
    const ExperimentArtifacts artifacts = run_experiment(config);
    std::printf("wrote %zu files to %s\n", artifacts.files.size(), artifacts.out_dir.c_str());
    for (const std::string& f : artifacts.files) std::printf("  %s\n", f.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify: a fast identity/convergence battery.

struct Battery {
    int failures = 0;

    void check(const std::string& name, bool ok, const std::string& detail) {
        std::printf("%-34s %s  %s\n", name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
        if (!ok) ++failures;
    }
};

double max_amplitude_diff(const StateVector& a, const StateVector& b) {
    double worst = 0.0;
    for (std::size_t n = 0; n < a.dim(); ++n) worst = std::max(worst, std::abs(a[n] - b[n]));
    return worst;
}

StateVector brute_force_dft(const StateVector& in) {
    const std::size_t dim = in.dim();
    StateVector out(in.n_qubits(), Basis::Phase);
    const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        Complex sum = 0.0;
        for (std::size_t n = 0; n < dim; ++n) {
            const double arg =
                2.0 * std::numbers::pi * static_cast<double>(n * j % dim) / static_cast<double>(dim);
            sum += in[n] * std::polar(1.0, arg);
        }
        out[j] = sum * norm;
    }
    return out;
}

void verify_qft(Battery& b) {
    StateVector psi = random_normalized_state(6, 11);
    StateVector orig = psi;
    qft(psi, FourierDirection::Forward);
    qft(psi, FourierDirection::Inverse);
    const double round = max_amplitude_diff(psi, orig);
    b.check("qft_roundtrip", round <= 1e-10, "max diff " + format_double(round));

    StateVector x = random_normalized_state(4, 12);
    StateVector direct = brute_force_dft(x);
    qft(x, FourierDirection::Forward);
    const double diff = max_amplitude_diff(x, direct);
    b.check("qft_vs_direct_dft", diff <= 1e-12, "max diff " + format_double(diff));
}

/// 2x2 action of a qubit-1 block stream on the subspace spanned by
/// {|0,rest>, |1,rest>}.
std::array<Complex, 4> block_action(const GateStream& stream, int n_q, std::size_t rest) {
    std::array<Complex, 4> u;
    const std::size_t dim_half = std::size_t{1} << (n_q - 1);
    for (int col = 0; col < 2; ++col) {
        StateVector psi =
            StateVector::basis_state(n_q, static_cast<std::size_t>(col) * dim_half + rest, Basis::Phase);
        apply_stream(psi, stream);
        u[0 * 2 + col] = psi[rest];
        u[1 * 2 + col] = psi[dim_half + rest];
    }
    return u;
}

std::array<Complex, 4> r_gamma_closed_form(double gamma, double theta_bar) {
    const Complex i(0.0, 1.0);
    const double s2 = std::sin(gamma / 2) * std::sin(gamma / 2);
    const Complex scalar = std::cos(gamma / 2) * std::cos(gamma / 2) -
                           s2 * std::cos(2 * theta_bar);
    const Complex z = -i * std::sin(gamma) * std::cos(theta_bar);
    const Complex x = i * s2 * std::sin(2 * theta_bar);
    return {scalar + z, x, x, scalar - z};
}

void verify_r_gamma(Battery& b) {
    const int n_q = 4;
    const double gamma = 0.2;
    double worst = 0.0;
    for (std::size_t rest = 0; rest < 8; ++rest) {
        const double theta_bar = 2.0 * std::numbers::pi * static_cast<double>(rest) / 16.0;
        const auto closed = r_gamma_closed_form(gamma, theta_bar);
        const auto acted = block_action(r_gamma_stream(gamma, +1, n_q), n_q, rest);
        for (int e = 0; e < 4; ++e) worst = std::max(worst, std::abs(closed[e] - acted[e]));
    }
    b.check("r_gamma_closed_form", worst <= 1e-12, "max diff " + format_double(worst));
}

double kick_stream_error(double gamma, int n_q) {
    // Deviation of one symmetric pair from exp(-i sigma^z_1 gamma cos tb).
    double worst = 0.0;
    const std::size_t dim_half = std::size_t{1} << (n_q - 1);
    const GateStream pair = symmetric_pair_stream(gamma, n_q);
    for (std::size_t rest = 0; rest < dim_half; ++rest) {
        const double theta_bar =
            2.0 * std::numbers::pi * static_cast<double>(rest) / static_cast<double>(2 * dim_half);
        const auto acted = block_action(pair, n_q, rest);
        const Complex d0 = std::polar(1.0, -gamma * std::cos(theta_bar));
        const Complex d1 = std::polar(1.0, +gamma * std::cos(theta_bar));
        worst = std::max({worst, std::abs(acted[0] - d0), std::abs(acted[3] - d1),
                          std::abs(acted[1]), std::abs(acted[2])});
    }
    return worst;
}

void verify_symmetric_pair(Battery& b) {
    const double e4 = kick_stream_error(0.4, 4);
    const double e2 = kick_stream_error(0.2, 4);
    const double ratio = e4 / e2;
    b.check("symmetric_pair_third_order", ratio >= 6.0 && ratio <= 10.0,
            "error ratio on gamma halving " + format_double(ratio));
}

void verify_phase_generator(Battery& b) {
    const int n_q = 4;
    RngStream rng(7);
    const PhaseGeneratorSpec spec = build_phase_generator(n_q, 2 * n_q, rng);
    const GateStream stream = phase_generator_stream(spec);
    const std::vector<double> chi = extract_effective_phases(spec);
    double worst_off = 0.0;
    double worst_phase = 0.0;
    for (std::size_t n = 0; n < (std::size_t{1} << n_q); ++n) {
        StateVector psi = StateVector::basis_state(n_q, n);
        apply_stream(psi, stream);
        for (std::size_t m = 0; m < psi.dim(); ++m) {
            if (m != n) worst_off = std::max(worst_off, std::abs(psi[m]));
        }
        worst_phase = std::max(worst_phase, std::abs(psi[n] - std::polar(1.0, chi[n])));
    }
    b.check("phase_generator_diagonal", worst_off <= 1e-12,
            "max off-diagonal " + format_double(worst_off));
    b.check("effective_phases_match", worst_phase <= 1e-12,
            "max phase mismatch " + format_double(worst_phase));
}

void verify_circuit_vs_oracle(Battery& b) {
    const int n_q = 6;
    ModelParams params{n_q, 1.8, 0.2, -1, 21};
    const PhaseGeneratorSpec spec = build_phase_generator(params);
    const OraclePhases phases = OraclePhases::from_circuit(spec);

    StateVector circuit = StateVector::basis_state(n_q, 0);
    apply_stream(circuit, map_iteration_stream(params, spec, 0));
    StateVector oracle = StateVector::basis_state(n_q, 0);
    oracle_step(oracle, phases, params, 0);

    const KickSchedule sched = kick_schedule(params, 0);
    const double bound = 10.0 * sched.l_t * std::pow(sched.gamma_t, 3);
    const double f = fidelity(circuit, oracle);
    b.check("circuit_vs_oracle_step", f >= 1.0 - bound,
            "fidelity " + format_double(f) + " bound " + format_double(1.0 - bound));
}

void verify_oracle_unitarity(Battery& b) {
    const int n_q = 6;
    ModelParams params{n_q, 1.3, 0.2, -1, 5};
    const OraclePhases phases = OraclePhases::independent_uniform(n_q, 5);
    StateVector psi = StateVector::basis_state(n_q, 0);
    FourierWorkspace fft(n_q);
    for (int t = 0; t < 50; ++t) oracle_step(psi, phases, params, t, fft);
    const double dev = std::abs(psi.norm_squared() - 1.0);
    b.check("oracle_norm_50_steps", dev <= 50 * 1e-12, "norm deviation " + format_double(dev));
}

void verify_imperfections(Battery& b) {
    const int n_q = 5;
    ModelParams params{n_q, 1.2, 0.2, -1, 9};
    const PhaseGeneratorSpec spec = build_phase_generator(params);
    const GateStream stream = map_iteration_stream(params, spec, 0);

    StateVector clean = random_normalized_state(n_q, 33);
    StateVector zero_prof = clean;
    apply_stream(clean, stream);
    run_with_imperfections(zero_prof, stream, make_imperfection_profile(n_q, 0.0, 0.0, 1, 0));
    b.check("zero_profile_identical", max_amplitude_diff(clean, zero_prof) == 0.0,
            "bit-for-bit against perfect run");

    StateVector noisy = random_normalized_state(n_q, 33);
    run_with_imperfections(noisy, stream, make_imperfection_profile(n_q, 1e-3, 1e-3, 1, 0));
    const double dev = std::abs(noisy.norm_squared() - 1.0);
    b.check("imperfect_run_unitary", dev <= stream.size() * 1e-12,
            "norm deviation " + format_double(dev));
}

void verify_scan_determinism(Battery& b) {
    ScanConfig sc;
    sc.n_q = 4;
    sc.k_grid = {1.0, 2.0};
    sc.t_max = 5;
    sc.n_realizations = 2;
    sc.engine = Engine::Circuit;
    sc.epsilon = 1e-4;
    sc.seed = 42;
    const std::string a = scan_csv(scan_k(sc));
    const std::string bb = scan_csv(scan_k(sc));
    b.check("scan_deterministic", a == bb, "identical CSV on repeat");
}

void verify_fit(Battery& b) {
    std::vector<ScalingPoint> pts;
    for (int i = 1; i <= 6; ++i) {
        const double e = 0.01 * i;
        pts.push_back({e, 3.0 * std::pow(e, 0.64)});
    }
    const ScalingFit fit = fit_scaling(pts);
    const bool ok = std::abs(fit.a - 3.0) <= 1e-10 && std::abs(fit.alpha - 0.64) <= 1e-10;
    b.check("scaling_fit_exact_recovery",
            ok, "A " + format_double(fit.a) + " alpha " + format_double(fit.alpha));
}

int run_verify() {
    Battery b;
    verify_qft(b);
    verify_r_gamma(b);
    verify_symmetric_pair(b);
    verify_phase_generator(b);
    verify_circuit_vs_oracle(b);
    verify_oracle_unitarity(b);
    verify_imperfections(b);
    verify_scan_determinism(b);
    verify_fit(b);
    std::printf("%s: %d failure(s)\n", b.failures == 0 ? "OK" : "FAILED", b.failures);
    return b.failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kicked-rotator quantum-circuit simulator and transition lab"};
    app.set_version_flag("--version", qkr::kVersion);
    app.require_subcommand(1);

    struct ModeSpec {
        const char* name;
        const char* help;
    };
    const ModeSpec modes[] = {
        {"evolve", "evolve one state and record observables over time"},
        {"scan", "sweep the kick strength over disorder realizations"},
        {"critical", "locate k_c for each imperfection strength"},
        {"scaling", "fit delta k_c = A * eps_tilde^alpha"},
    };
    std::vector<std::pair<std::string, std::shared_ptr<ConfigOverrides>>> subs;
    for (const ModeSpec& m : modes) {
        CLI::App* sub = app.add_subcommand(m.name, m.help);
        subs.emplace_back(m.name, add_experiment_options(sub));
    }
    CLI::App* verify = app.add_subcommand("verify", "run the self-check battery");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return run_verify();
        for (const auto& [mode, overrides] : subs) {
            if (app.get_subcommand(mode)->parsed()) return run_mode(mode, *overrides);
        }
    } catch (const qkr::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
