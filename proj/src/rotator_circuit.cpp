#include "qkr/rotator_circuit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qkr/errors.hpp"

namespace qkr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Integer part with a guard against 1.8/0.2 = 8.999... style rounding.
int guarded_floor(double x) {
    return static_cast<int>(std::floor(x + 1e-9));
}

int guarded_ceil(double x) {
    return static_cast<int>(std::ceil(x - 1e-9));
}

} // namespace

double plastic_lambda() {
    static const double lambda = [] {
        double x = 1.3;
        for (int i = 0; i < 64; ++i) {
            const double f = x * x * x - x - 1.0;
            const double df = 3.0 * x * x - 1.0;
            const double next = x - f / df;
            if (next == x) break;
            x = next;
        }
        return x;
    }();
    return lambda;
}

double ModelParams::omega1() const {
    return kTwoPi / plastic_lambda();
}

double ModelParams::omega2() const {
    const double l = plastic_lambda();
    return kTwoPi / (l * l);
}

double ModelParams::kick_strength_at(int t) const {
    return k * (1.0 + 0.75 * std::cos(omega1() * t) * std::cos(omega2() * t));
}

void ModelParams::validate() const {
    if (n_q < 2 || n_q > 26) {
        throw ConfigError("n_q must be in [2, 26], got " + std::to_string(n_q));
    }
    if (!(k >= 0.0) || !std::isfinite(k)) {
        throw ConfigError("kick strength k must be finite and >= 0");
    }
    if (!(gamma_target > 0.0 && gamma_target <= 0.5)) {
        throw ConfigError("gamma_target must be in (0, 0.5]");
    }
    if (m_pairs < -1) {
        throw ConfigError("m_pairs must be >= 0 (or -1 for the 2 n_q default)");
    }
}

void PhaseGeneratorSpec::validate() const {
    if (static_cast<int>(phi.size()) != n_q) {
        throw SizeMismatch("phase generator has " + std::to_string(phi.size()) +
                           " first-layer phases for n_q = " + std::to_string(n_q));
    }
    auto check_phase = [](double p) {
        if (!(p >= 0.0 && p < kTwoPi)) throw ConfigError("phase outside [0, 2 pi)");
    };
    for (double p : phi) check_phase(p);
    for (const Pair& pr : pairs) {
        check_phase(pr.phase);
        if (pr.control < 1 || pr.control > n_q || pr.target < 1 || pr.target > n_q) {
            throw IndexOutOfRange("phase generator pair index outside register");
        }
        if (pr.control == pr.target) {
            throw DegenerateGate("phase generator pair with control == target");
        }
    }
}

KickSchedule kick_schedule(const ModelParams& params, int t) {
    KickSchedule s;
    s.t = t;
    s.k_t = params.kick_strength_at(t);
    if (s.k_t > 0.0) {
        s.l_t = std::max(1, guarded_ceil(s.k_t / params.gamma_target));
        s.gamma_t = s.k_t / s.l_t;
    }
    return s;
}

PhaseGeneratorSpec build_phase_generator(int n_q, int m_pairs, RngStream& rng) {
    PhaseGeneratorSpec spec;
    spec.n_q = n_q;
    spec.phi.resize(n_q);
    for (double& p : spec.phi) p = rng.angle();
    spec.pairs.resize(m_pairs);
    for (auto& pr : spec.pairs) {
        pr.control = rng.uniform_int(1, n_q);
        // Draw the target from the n_q - 1 remaining indices; no rejection
        // loop so the draw count per pair is fixed.
        const int r = rng.uniform_int(1, n_q - 1);
        pr.target = r >= pr.control ? r + 1 : r;
        pr.phase = rng.angle();
    }
    return spec;
}

PhaseGeneratorSpec build_phase_generator(const ModelParams& params) {
    RngStream rng = make_stream(params.seed, StreamPurpose::Disorder, 0);
    return build_phase_generator(params.n_q, params.pairs(), rng);
}

GateStream phase_generator_stream(const PhaseGeneratorSpec& spec) {
    GateStream stream;
    stream.reserve(spec.phi.size() + 3 * spec.pairs.size());
    for (int j = 0; j < spec.n_q; ++j) {
        stream.push_back(GateDescriptor::phase_z(j + 1, spec.phi[j]));
    }
    for (const auto& pr : spec.pairs) {
        stream.push_back(GateDescriptor::phase_z(pr.target, pr.phase));
        stream.push_back(GateDescriptor::cnot(pr.control, pr.target));
    }
    for (auto it = spec.pairs.rbegin(); it != spec.pairs.rend(); ++it) {
        stream.push_back(GateDescriptor::cnot(it->control, it->target));
    }
    return stream;
}

std::vector<double> extract_effective_phases(const PhaseGeneratorSpec& spec) {
    const GateStream stream = phase_generator_stream(spec);
    const int n_q = spec.n_q;
    const std::size_t dim = std::size_t{1} << n_q;
    std::vector<double> chi(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        std::size_t m = n;
        double phase = 0.0;
        for (const GateDescriptor& g : stream) {
            if (g.kind == GateDescriptor::Kind::PhaseZ) {
                const std::size_t bit = std::size_t{1} << (n_q - g.q1);
                phase += (m & bit) ? -g.angle : g.angle;
            } else { // CNot by construction
                const std::size_t cbit = std::size_t{1} << (n_q - g.q1);
                if (m & cbit) m ^= std::size_t{1} << (n_q - g.q2);
            }
        }
        // The reversed CNOT tail restores the basis permutation.
        if (m != n) throw Error("phase generator stream is not diagonal");
        chi[n] = phase;
    }
    return chi;
}

GateStream s_power_stream(int m, int n_q) {
    if (m == 0 || std::abs(m) > 2) {
        throw InvalidPower("S power must be in {-2, -1, 1, 2}, got " + std::to_string(m));
    }
    if (n_q < 2) throw IndexOutOfRange("S operator needs n_q >= 2");
    GateStream stream;
    stream.reserve(n_q - 1);
    for (int j = 2; j <= n_q; ++j) {
        const double angle = std::numbers::pi * m * std::ldexp(1.0, -j + 1);
        stream.push_back(GateDescriptor::cphase(1, j, angle));
    }
    return stream;
}

namespace {

void append(GateStream& out, const GateStream& part) {
    out.insert(out.end(), part.begin(), part.end());
}

void append_h1(GateStream& out) {
    out.push_back(GateDescriptor::hadamard(1));
}

void append_z1(GateStream& out, double sigma_z_coeff) {
    // exp(-i c sigma^z_1) == PhaseZ(1, -c)
    out.push_back(GateDescriptor::phase_z(1, -sigma_z_coeff));
}

} // namespace

GateStream r_gamma_stream(double gamma, int sign, int n_q) {
    if (sign != 1 && sign != -1) throw InvalidPower("R_gamma sign must be +-1");
    GateStream stream;
    stream.reserve(6 + 3 * (n_q - 1) + 2);
    append_h1(stream);
    append(stream, s_power_stream(sign, n_q));
    append_h1(stream);
    append_z1(stream, gamma / 2.0);
    append_h1(stream);
    append(stream, s_power_stream(-2 * sign, n_q));
    append_h1(stream);
    append_z1(stream, gamma / 2.0);
    append_h1(stream);
    append(stream, s_power_stream(sign, n_q));
    append_h1(stream);
    return stream;
}

GateStream symmetric_pair_stream(double gamma, int n_q) {
    // R_{g/2}(tb) R_{g/2}(-tb) written as an operator product reads
    // H S^1 H Z(g/4) H S^-2 H Z(g/2) H S^2 H Z(g/4) H S^-1 H; the rightmost
    // factor acts first, so the stream runs the blocks in reverse.
    GateStream stream;
    stream.reserve(8 + 4 * (n_q - 1) + 3);
    append_h1(stream);
    append(stream, s_power_stream(-1, n_q));
    append_h1(stream);
    append_z1(stream, gamma / 4.0);
    append_h1(stream);
    append(stream, s_power_stream(2, n_q));
    append_h1(stream);
    append_z1(stream, gamma / 2.0);
    append_h1(stream);
    append(stream, s_power_stream(-2, n_q));
    append_h1(stream);
    append_z1(stream, gamma / 4.0);
    append_h1(stream);
    append(stream, s_power_stream(1, n_q));
    append_h1(stream);
    return stream;
}

GateStream kick_stream(const KickSchedule& schedule, int n_q) {
    GateStream stream;
    if (schedule.l_t == 0) return stream;
    const GateStream pair = symmetric_pair_stream(schedule.gamma_t, n_q);
    stream.reserve(pair.size() * schedule.l_t);
    for (int i = 0; i < schedule.l_t; ++i) append(stream, pair);
    return stream;
}

GateStream map_iteration_stream(const ModelParams& params, const PhaseGeneratorSpec& spec, int t) {
    params.validate();
    if (spec.n_q != params.n_q) {
        throw SizeMismatch("phase generator register size differs from model");
    }
    GateStream stream = phase_generator_stream(spec);
    append(stream, qft_gate_stream(params.n_q));
    append(stream, kick_stream(kick_schedule(params, t), params.n_q));
    append(stream, adjoint_stream(qft_gate_stream(params.n_q)));
    return stream;
}

long gate_count(const ModelParams& params) {
    params.validate();
    const long n_q = params.n_q;
    const long l = guarded_floor(params.k / params.gamma_target);
    return 2 * l * (n_q + 2) + n_q * n_q + 6 * n_q + 3 * params.pairs() + 9;
}

double epsilon_tilde(double epsilon, const ModelParams& params) {
    return epsilon * static_cast<double>(gate_count(params)) * std::sqrt(params.n_q);
}

} // namespace qkr
