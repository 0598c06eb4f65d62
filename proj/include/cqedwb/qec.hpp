#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "cqedspec.hpp"
#include "numkit.hpp"
#include "pulsectl.hpp"
#include "tomo.hpp"

namespace cqedwb {

enum class GateKind { rotation, cnot, cphase, ccphase, reset, channel };

// Qubit 0 is Q1 and the most significant bit of the basis index.
struct Gate {
    GateKind kind = GateKind::rotation;
    std::vector<int> targets;
    Rotation rot;
    PhaseGateSpec phase;
    KrausChannel channel;
};

struct Circuit {
    int n_qubits = 3;
    std::vector<Gate> gates;

    Circuit& rotate(int q, const Rotation& r) {
        gates.push_back({GateKind::rotation, {q}, r, {}, {}});
        return *this;
    }
    Circuit& cnot(int control, int target) {
        gates.push_back({GateKind::cnot, {control, target}, {}, {}, {}});
        return *this;
    }
    Circuit& cphase(int a, int b, const PhaseGateSpec& p) {
        gates.push_back({GateKind::cphase, {a, b}, {}, p, {}});
        return *this;
    }
    Circuit& ccphase(int a, int b, int c, const PhaseGateSpec& p) {
        gates.push_back({GateKind::ccphase, {a, b, c}, {}, p, {}});
        return *this;
    }
    Circuit& reset(int q) {
        gates.push_back({GateKind::reset, {q}, {}, {}, {}});
        return *this;
    }
    Circuit& channel(int q, const KrausChannel& ch) {
        gates.push_back({GateKind::channel, {q}, {}, {}, ch});
        return *this;
    }
    Circuit& append(const Circuit& other) {
        if (other.n_qubits != n_qubits) fail(ErrorKind::DimMismatch, "Circuit::append: qubit counts differ");
        gates.insert(gates.end(), other.gates.begin(), other.gates.end());
        return *this;
    }

    bool is_unitary() const {
        return std::none_of(gates.begin(), gates.end(), [](const Gate& g) {
            return g.kind == GateKind::reset || g.kind == GateKind::channel;
        });
    }
};

// Phase pattern putting pi on a single computational state of the gate's qubits.
inline PhaseGateSpec phase_on_state(const std::string& bits) {
    const int n = static_cast<int>(bits.size());
    std::vector<double> target(std::size_t{1} << n, 0.0);
    std::size_t mask = 0;
    for (char c : bits) mask = (mask << 1) | (c == '1' ? 1u : 0u);
    target[mask] = constants::pi;
    // Moebius inversion of total(k) = sum_{m subset k} phi[m]
    PhaseGateSpec p{n, std::vector<double>(target.size(), 0.0)};
    for (std::size_t m = 1; m < target.size(); ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= m; ++k)
            if ((k & m) == k) acc += ((std::popcount(m) - std::popcount(k)) % 2 ? -1.0 : 1.0) * target[k];
        p.phi[m] = acc;
    }
    return p;
}

// Lifts an operator on the listed qubits (first listed = most significant) to the full register.
inline ComplexMatrix embed_on(const ComplexMatrix& op, const std::vector<int>& qubits, int n_qubits) {
    const auto k = static_cast<int>(qubits.size());
    if (op.rows() != (Eigen::Index{1} << k) || op.cols() != op.rows())
        fail(ErrorKind::DimMismatch, "embed_on: operator size does not match qubit list");
    std::size_t used = 0;
    for (int q : qubits) {
        if (q < 0 || q >= n_qubits) fail(ErrorKind::DimMismatch, "embed_on: qubit index out of range");
        const std::size_t bit = std::size_t{1} << (n_qubits - 1 - q);
        if (used & bit) fail(ErrorKind::InvalidInput, "embed_on: repeated qubit");
        used |= bit;
    }
    const std::size_t d = std::size_t{1} << n_qubits;
    auto sub = [&](std::size_t idx) {
        std::size_t s = 0;
        for (int q : qubits) s = (s << 1) | ((idx >> (n_qubits - 1 - q)) & 1u);
        return s;
    };
    ComplexMatrix full = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if ((r & ~used) == (c & ~used))
                full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    op(static_cast<Eigen::Index>(sub(r)), static_cast<Eigen::Index>(sub(c)));
    return full;
}

inline ComplexMatrix cnot_matrix() {
    ComplexMatrix u = ComplexMatrix::Zero(4, 4);
    u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
    return u;
}

inline std::vector<ComplexMatrix> gate_kraus(const Gate& g, int n) {
    switch (g.kind) {
    case GateKind::rotation:
        return {embed_on(rotation_unitary(g.rot), g.targets, n)};
    case GateKind::cnot:
        return {embed_on(cnot_matrix(), g.targets, n)};
    case GateKind::cphase:
    case GateKind::ccphase: {
        const auto need = g.kind == GateKind::cphase ? 2 : 3;
        if (g.phase.n_qubits != need || static_cast<int>(g.targets.size()) != need)
            fail(ErrorKind::DimMismatch, "gate_kraus: phase gate arity");
        return {embed_on(build_phase_gate(g.phase), g.targets, n)};
    }
    case GateKind::reset: {
        ComplexMatrix k0 = ComplexMatrix::Zero(2, 2), k1 = ComplexMatrix::Zero(2, 2);
        k0(0, 0) = 1.0;
        k1(0, 1) = 1.0;
        return {embed_on(k0, g.targets, n), embed_on(k1, g.targets, n)};
    }
    case GateKind::channel: {
        std::vector<ComplexMatrix> out;
        for (const auto& m : g.channel.ops) out.push_back(embed_on(m, g.targets, n));
        return out;
    }
    }
    fail(ErrorKind::InvalidInput, "gate_kraus: unknown gate kind");
}

inline DensityMatrix run_circuit(const Circuit& c, const DensityMatrix& input) {
    const Eigen::Index d = Eigen::Index{1} << c.n_qubits;
    if (input.rows() != d || input.cols() != d) fail(ErrorKind::DimMismatch, "run_circuit: input dimension");
    DensityMatrix rho = input;
    for (const auto& g : c.gates) {
        const auto ks = gate_kraus(g, c.n_qubits);
        if (ks.size() == 1) {
            rho = ks[0] * rho * ks[0].adjoint();
            continue;
        }
        DensityMatrix next = DensityMatrix::Zero(d, d);
        for (const auto& k : ks) next += k * rho * k.adjoint();
        rho = std::move(next);
    }
    return rho;
}

inline ComplexMatrix circuit_unitary(const Circuit& c) {
    if (!c.is_unitary()) fail(ErrorKind::Unsupported, "circuit_unitary: circuit contains reset or channel gates");
    const Eigen::Index d = Eigen::Index{1} << c.n_qubits;
    ComplexMatrix u = ComplexMatrix::Identity(d, d);
    for (const auto& g : c.gates) u = gate_kraus(g, c.n_qubits)[0] * u;
    return u;
}

struct GhzSyndromes {
    double z1z2;
    double z2z3;
};

inline GhzSyndromes ghz_syndromes(const DensityMatrix& rho) {
    if (rho.rows() != 8 || rho.cols() != 8) fail(ErrorKind::DimMismatch, "ghz_syndromes: need a 3-qubit state");
    return {(rho * pauli_string("ZZI")).trace().real(), (rho * pauli_string("IZZ")).trace().real()};
}

// cNOT either as a primitive or as cPhase wrapped in y rotations on the target.
inline void add_cnot(Circuit& c, int control, int target, bool compiled) {
    if (!compiled) {
        c.cnot(control, target);
        return;
    }
    c.rotate(target, rot_y(-constants::pi / 2));
    c.cphase(control, target, phase_on_state("11"));
    c.rotate(target, rot_y(constants::pi / 2));
}

// Toffoli (controls a, b; target t) through the ccPhase gate.
inline void add_toffoli(Circuit& c, int a, int b, int t) {
    c.rotate(t, rot_y(-constants::pi / 2));
    c.ccphase(a, b, t, phase_on_state("111"));
    c.rotate(t, rot_y(constants::pi / 2));
}

enum class CodeKind { bit, phase };

inline CodeKind parse_code_kind(std::string_view s) {
    if (s == "bit") return CodeKind::bit;
    if (s == "phase") return CodeKind::phase;
    fail(ErrorKind::InvalidInput, "unknown code kind: " + std::string(s));
}

inline Circuit repetition_encode(CodeKind kind, bool compiled = false) {
    Circuit c;
    add_cnot(c, 1, 0, compiled);
    add_cnot(c, 1, 2, compiled);
    if (kind == CodeKind::phase)
        for (int q = 0; q < 3; ++q) c.rotate(q, rot_y(constants::pi / 2));
    return c;
}

inline Circuit repetition_decode_correct(CodeKind kind, bool compiled = false) {
    Circuit c;
    if (kind == CodeKind::phase)
        for (int q = 0; q < 3; ++q) c.rotate(q, rot_y(-constants::pi / 2));
    add_cnot(c, 1, 0, compiled);
    add_cnot(c, 1, 2, compiled);
    add_toffoli(c, 0, 2, 1);
    return c;
}

// Data on Q2 (index 1), ancillas Q1 and Q3 start in |0>; error_slot runs between encode and decode.
inline Circuit repetition_code_circuit(CodeKind kind, const Circuit& error_slot = {}, bool compiled = false) {
    Circuit c = repetition_encode(kind, compiled);
    c.append(error_slot);
    c.append(repetition_decode_correct(kind, compiled));
    return c;
}

// Input on Q2, ancillas |00>, output reduced to Q2.
inline DensityMatrix run_logical(const Circuit& code, const DensityMatrix& data) {
    DensityMatrix zero = DensityMatrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    const DensityMatrix full = run_circuit(code, kron_all({zero, data, zero}));
    return partial_trace(full, {2, 2, 2}, {1});
}

enum class ErrorModel { coherent, incoherent };

inline KrausChannel flip_channel(char axis, double p) {
    if (p < 0.0 || p > 1.0) fail(ErrorKind::InvalidProbability, "flip_channel: p must lie in [0, 1]");
    return {std::string("flip_") + axis, {std::sqrt(1.0 - p) * pauli('I'), std::sqrt(p) * pauli(axis)}};
}

// Independent errors of flip probability p on all three qubits.
inline Circuit error_slot(CodeKind kind, double p, ErrorModel model) {
    require_finite(p, "error_slot");
    if (p < 0.0 || p > 1.0) fail(ErrorKind::InvalidProbability, "error_slot: p must lie in [0, 1]");
    Circuit c;
    const char axis = kind == CodeKind::bit ? 'X' : 'Z';
    const double theta = 2.0 * std::asin(std::sqrt(p));
    for (int q = 0; q < 3; ++q) {
        if (model == ErrorModel::coherent) c.rotate(q, axis == 'X' ? rot_x(theta) : rot_z(theta));
        else c.channel(q, flip_channel(axis, p));
    }
    return c;
}

inline double logical_process_fidelity(const Circuit& code) {
    const ChiMatrix chi = chi_of_channel([&](const DensityMatrix& r) { return run_logical(code, r); }, 1);
    return process_fidelity(chi, unitary_chi(pauli('I')));
}

struct FidelitySweep {
    std::vector<double> p;
    std::vector<double> fidelity;
    std::array<double, 4> coeffs; // c0 + c1 p + c2 p^2 + c3 p^3
};

inline std::array<double, 4> cubic_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 4) fail(ErrorKind::InvalidInput, "cubic_fit: need at least 4 points");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 4);
    Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        a(r, 0) = 1.0;
        a(r, 1) = x[i];
        a(r, 2) = x[i] * x[i];
        a(r, 3) = x[i] * x[i] * x[i];
        b(r) = y[i];
    }
    const Eigen::Vector4d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1), c(2), c(3)};
}

inline FidelitySweep qec_fidelity_sweep(CodeKind kind, const std::vector<double>& p_grid,
                                        ErrorModel model = ErrorModel::coherent) {
    FidelitySweep s;
    s.p = p_grid;
    for (double p : p_grid)
        s.fidelity.push_back(logical_process_fidelity(repetition_code_circuit(kind, error_slot(kind, p, model))));
    s.coeffs = cubic_fit(s.p, s.fidelity);
    return s;
}

struct ToffoliBuild {
    Circuit full;
    Circuit qec_optimized;
    ComplexMatrix ccphase_ideal;
};

inline ComplexMatrix toffoli_matrix(int c1 = 0, int c2 = 2, int t = 1) {
    ComplexMatrix u = ComplexMatrix::Zero(8, 8);
    for (std::size_t k = 0; k < 8; ++k) {
        std::size_t out = k;
        if (((k >> (2 - c1)) & 1u) && ((k >> (2 - c2)) & 1u)) out ^= std::size_t{1} << (2 - t);
        u(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(k)) = 1.0;
    }
    return u;
}

// Six-cNOT decomposition with controls Q1, Q3 and target Q2. Dropping the final
// control-only block leaves four cNOTs and a controlled-S^dag between the controls.
inline ToffoliBuild toffoli_constructions() {
    const double pi = constants::pi;
    const int a = 0, b = 2, t = 1;
    const Rotation h{Eigen::Vector3d(1, 0, 1).normalized(), pi};
    auto tg = [](double s) { return rot_z(s * constants::pi / 4); };
    Circuit opt;
    opt.rotate(t, h).cnot(b, t).rotate(t, tg(-1)).cnot(a, t).rotate(t, tg(1)).cnot(b, t).rotate(t, tg(-1));
    opt.cnot(a, t).rotate(t, tg(1)).rotate(t, h);
    Circuit full = opt;
    full.rotate(b, tg(1)).cnot(a, b).rotate(a, tg(1)).rotate(b, tg(-1)).cnot(a, b);
    return {full, opt, build_phase_gate(phase_on_state("111"))};
}

// Distance to b after removing the best global phase.
inline double phase_insensitive_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    const cplx ov = (b.adjoint() * a).trace();
    const cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

inline StateVector ghz_phi_closed_form(double phi) {
    StateVector s = StateVector::Zero(8);
    s(0) = 1.0 / std::sqrt(2.0);
    s(7) = -I_unit * std::exp(I_unit * phi) / std::sqrt(2.0);
    return s;
}

inline Circuit ghz_phi_circuit(double phi) {
    const double pi = constants::pi;
    Circuit c;
    c.rotate(0, rot_y(pi / 2)).rotate(2, rot_y(pi / 2));
    c.rotate(1, {Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0), pi / 2});
    c.cphase(1, 2, phase_on_state("01"));
    c.cphase(0, 1, phase_on_state("10"));
    c.rotate(0, rot_y(pi / 2)).rotate(2, rot_y(pi / 2));
    return c;
}

// Built by the circuit; the result differs from the closed form by a global phase only.
inline StateVector ghz_phi_state(double phi) {
    require_finite(phi, "ghz_phi_state");
    StateVector psi = circuit_unitary(ghz_phi_circuit(phi)).col(0);
    const cplx ov = ghz_phi_closed_form(phi).dot(psi);
    if (std::abs(ov) > 0) psi *= std::conj(ov) / std::abs(ov);
    return psi;
}

struct WitnessReport {
    double m_s1, m_s2, m_p1, m_p2, chsh, ghz_fidelity, ghz_phi;
};

inline double expect(const DensityMatrix& rho, std::string_view label) {
    return (rho * pauli_string(label)).trace().real();
}

// Maximum over phi of <GHZ_phi|rho|GHZ_phi> = a + b cos(phi) + c sin(phi), from a 360-point grid plus a sinusoid fit.
inline std::pair<double, double> ghz_family_fidelity(const DensityMatrix& rho, int grid = 360) {
    Eigen::MatrixXd a(grid, 3);
    Eigen::VectorXd f(grid);
    double best = -1.0, best_phi = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double phi = constants::two_pi * i / grid;
        const StateVector s = ghz_phi_closed_form(phi);
        f(i) = s.dot(rho * s).real();
        a(i, 0) = 1.0;
        a(i, 1) = std::cos(phi);
        a(i, 2) = std::sin(phi);
        if (f(i) > best) {
            best = f(i);
            best_phi = phi;
        }
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(f);
    const double fit_max = c(0) + std::hypot(c(1), c(2));
    if (fit_max > best) {
        best = fit_max;
        best_phi = std::atan2(c(2), c(1));
        if (best_phi < 0) best_phi += constants::two_pi;
    }
    return {best, best_phi};
}

inline WitnessReport witnesses(const DensityMatrix& rho) {
    if (rho.rows() != 8 || rho.cols() != 8) fail(ErrorKind::DimMismatch, "witnesses: need a 3-qubit state");
    auto e = [&](std::string_view l) { return expect(rho, l); };
    WitnessReport w{};
    w.m_s1 = e("XXX") - e("YYX") - e("YXY") - e("XYY");
    w.m_s2 = -e("YYY") + e("XXY") + e("XYX") + e("XYY");
    w.m_p1 = e("XXX") * e("YYX") * e("YXY") * e("XYY");
    w.m_p2 = e("YYY") * e("XXY") * e("XYX") * e("YXX");
    // CHSH on the Q2-Q3 pair
    w.chsh = e("IXX") - e("IXZ") + e("IZX") + e("IZZ");
    const auto [fid, phi] = ghz_family_fidelity(rho);
    w.ghz_fidelity = fid;
    w.ghz_phi = phi;
    return w;
}

} // namespace cqedwb
