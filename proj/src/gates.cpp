#include "qkr/gates.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qkr {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;

void check_two_qubit(const StateVector& state, int a, int b) {
    state.check_qubit(a);
    state.check_qubit(b);
    if (a == b) {
        throw DegenerateGate("two-qubit gate with identical indices " + std::to_string(a));
    }
}

void apply_phase_z(StateVector& state, int q, double angle) {
    state.check_qubit(q);
    const std::size_t b = state.qubit_mask(q);
    const std::size_t dim = state.dim();
    const Complex f0 = std::polar(1.0, angle);
    const Complex f1 = std::conj(f0);
    auto* amp = state.amplitudes().data();
    for (std::size_t g = 0; g < dim; g += 2 * b) {
        for (std::size_t i = g; i < g + b; ++i) {
            amp[i] *= f0;
            amp[i + b] *= f1;
        }
    }
}

void apply_hadamard(StateVector& state, int q) {
    state.check_qubit(q);
    const std::size_t b = state.qubit_mask(q);
    const std::size_t dim = state.dim();
    auto* amp = state.amplitudes().data();
    for (std::size_t g = 0; g < dim; g += 2 * b) {
        for (std::size_t i = g; i < g + b; ++i) {
            const Complex a0 = amp[i];
            const Complex a1 = amp[i + b];
            amp[i] = (a0 + a1) * kInvSqrt2;
            amp[i + b] = (a0 - a1) * kInvSqrt2;
        }
    }
}

void apply_cnot(StateVector& state, int control, int target) {
    check_two_qubit(state, control, target);
    const std::size_t cb = state.qubit_mask(control);
    const std::size_t tb = state.qubit_mask(target);
    const std::size_t dim = state.dim();
    auto* amp = state.amplitudes().data();
    for (std::size_t g = 0; g < dim; g += 2 * tb) {
        for (std::size_t i = g; i < g + tb; ++i) {
            if (i & cb) std::swap(amp[i], amp[i + tb]);
        }
    }
}

void apply_cphase(StateVector& state, int a, int b, double angle) {
    check_two_qubit(state, a, b);
    const std::size_t mask = state.qubit_mask(a) | state.qubit_mask(b);
    const std::size_t dim = state.dim();
    const Complex f = std::polar(1.0, angle);
    auto* amp = state.amplitudes().data();
    for (std::size_t n = 0; n < dim; ++n) {
        if ((n & mask) == mask) amp[n] *= f;
    }
}

std::size_t reverse_bits(std::size_t n, int n_q) {
    std::size_t r = 0;
    for (int i = 0; i < n_q; ++i) {
        r = (r << 1) | (n & 1u);
        n >>= 1;
    }
    return r;
}

} // namespace

void apply_gate(StateVector& state, const GateDescriptor& gate) {
    switch (gate.kind) {
        case GateDescriptor::Kind::PhaseZ:
            apply_phase_z(state, gate.q1, gate.angle);
            break;
        case GateDescriptor::Kind::Hadamard:
            apply_hadamard(state, gate.q1);
            break;
        case GateDescriptor::Kind::CNot:
            apply_cnot(state, gate.q1, gate.q2);
            break;
        case GateDescriptor::Kind::CPhase:
            apply_cphase(state, gate.q1, gate.q2, gate.angle);
            break;
        case GateDescriptor::Kind::BitReversal:
            bit_reverse_permute(state);
            break;
    }
}

void apply_stream(StateVector& state, const GateStream& stream) {
    for (const GateDescriptor& g : stream) apply_gate(state, g);
}

void apply_xx_rotation(StateVector& state, int j, int k, double angle) {
    check_two_qubit(state, j, k);
    const std::size_t mask = state.qubit_mask(j) | state.qubit_mask(k);
    const std::size_t jb = state.qubit_mask(j);
    const std::size_t dim = state.dim();
    const double c = std::cos(angle);
    const Complex is{0.0, std::sin(angle)};
    auto* amp = state.amplitudes().data();
    // Each unordered pair {n, n^mask} visited once: pick the member with
    // qubit j clear.
    for (std::size_t n = 0; n < dim; ++n) {
        if (n & jb) continue;
        const std::size_t m = n ^ mask;
        const Complex a = amp[n];
        const Complex b = amp[m];
        amp[n] = c * a + is * b;
        amp[m] = c * b + is * a;
    }
}

void bit_reverse_permute(StateVector& state) {
    const int n_q = state.n_qubits();
    const std::size_t dim = state.dim();
    auto* amp = state.amplitudes().data();
    for (std::size_t n = 0; n < dim; ++n) {
        const std::size_t r = reverse_bits(n, n_q);
        if (n < r) std::swap(amp[n], amp[r]);
    }
}

GateStream qft_gate_stream(int n_q) {
    GateStream stream;
    stream.reserve(static_cast<std::size_t>(n_q) * (n_q + 1) / 2 + 1);
    for (int i = 1; i <= n_q; ++i) {
        stream.push_back(GateDescriptor::hadamard(i));
        for (int j = i + 1; j <= n_q; ++j) {
            const double angle = std::numbers::pi / static_cast<double>(std::size_t{1} << (j - i));
            stream.push_back(GateDescriptor::cphase(i, j, angle));
        }
    }
    stream.push_back(GateDescriptor::bit_reversal());
    return stream;
}

void qft(StateVector& state, FourierDirection direction) {
    static thread_local int cached_n_q = 0;
    static thread_local GateStream cached_forward;
    static thread_local GateStream cached_inverse;
    if (cached_n_q != state.n_qubits()) {
        cached_n_q = state.n_qubits();
        cached_forward = qft_gate_stream(cached_n_q);
        cached_inverse = adjoint_stream(cached_forward);
    }
    if (direction == FourierDirection::Forward) {
        apply_stream(state, cached_forward);
        state.set_basis(Basis::Phase);
    } else {
        apply_stream(state, cached_inverse);
        state.set_basis(Basis::Momentum);
    }
}

GateStream adjoint_stream(const GateStream& stream) {
    GateStream adj;
    adj.reserve(stream.size());
    for (auto it = stream.rbegin(); it != stream.rend(); ++it) {
        GateDescriptor g = *it;
        g.angle = -g.angle;
        adj.push_back(g);
    }
    return adj;
}

std::size_t elementary_gate_count(const GateStream& stream) {
    std::size_t count = 0;
    for (const GateDescriptor& g : stream) {
        if (g.is_elementary()) ++count;
    }
    return count;
}

std::string stream_to_text(const GateStream& stream) {
    std::ostringstream out;
    char buf[40];
    for (const GateDescriptor& g : stream) {
        switch (g.kind) {
            case GateDescriptor::Kind::PhaseZ:
                std::snprintf(buf, sizeof(buf), "%.17g", g.angle);
                out << "PHASEZ " << g.q1 << ' ' << buf << '\n';
                break;
            case GateDescriptor::Kind::Hadamard:
                out << "H " << g.q1 << '\n';
                break;
            case GateDescriptor::Kind::CNot:
                out << "CNOT " << g.q1 << ' ' << g.q2 << '\n';
                break;
            case GateDescriptor::Kind::CPhase:
                std::snprintf(buf, sizeof(buf), "%.17g", g.angle);
                out << "CPHASE " << g.q1 << ' ' << g.q2 << ' ' << buf << '\n';
                break;
            case GateDescriptor::Kind::BitReversal:
                out << "BITREV\n";
                break;
        }
    }
    return out.str();
}

GateStream stream_from_text(const std::string& text) {
    GateStream stream;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        auto fail = [&](const char* what) {
            throw ConfigError("gate stream line " + std::to_string(lineno) + ": " + what);
        };
        if (kind == "PHASEZ") {
            int q;
            double a;
            if (!(ls >> q >> a)) fail("expected 'PHASEZ q angle'");
            stream.push_back(GateDescriptor::phase_z(q, a));
        } else if (kind == "H") {
            int q;
            if (!(ls >> q)) fail("expected 'H q'");
            stream.push_back(GateDescriptor::hadamard(q));
        } else if (kind == "CNOT") {
            int c, t;
            if (!(ls >> c >> t)) fail("expected 'CNOT control target'");
            stream.push_back(GateDescriptor::cnot(c, t));
        } else if (kind == "CPHASE") {
            int a, b;
            double f;
            if (!(ls >> a >> b >> f)) fail("expected 'CPHASE a b angle'");
            stream.push_back(GateDescriptor::cphase(a, b, f));
        } else if (kind == "BITREV") {
            stream.push_back(GateDescriptor::bit_reversal());
        } else {
            fail("unknown gate kind");
        }
    }
    return stream;
}

} // namespace qkr
