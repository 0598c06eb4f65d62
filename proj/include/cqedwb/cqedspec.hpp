#pragma once

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "numkit.hpp"
#include "transmon.hpp"

namespace cqedwb {

// Levels are measured from the qubit ground state; g couples |0>-|1> and
// higher transitions i -> i+1 carry sqrt(i+1).
struct QubitSpec {
    std::vector<double> levels_ghz;
    double g_ghz = 0.0;
};

struct CavitySpec {
    double omega_ghz = 7.0;
    int levels = 5; // Fock states 0 .. levels-1
};

struct SystemSpec {
    std::vector<QubitSpec> qubits;
    CavitySpec cavity;
};

inline QubitSpec anharmonic_qubit(double f01, double alpha, int n_levels, double g) {
    QubitSpec q;
    for (int j = 0; j < n_levels; ++j) q.levels_ghz.push_back(j * f01 + 0.5 * j * (j - 1) * alpha);
    q.g_ghz = g;
    return q;
}

inline QubitSpec two_level_qubit(double f01, double g) { return anharmonic_qubit(f01, 0.0, 2, g); }

inline QubitSpec transmon_qubit(const TransmonParams& p, int n_levels, double g) {
    auto lv = transmon_levels(p, n_levels).levels;
    QubitSpec q;
    for (double e : lv) q.levels_ghz.push_back(e - lv[0]);
    q.g_ghz = g;
    return q;
}

inline std::vector<std::size_t> subsystem_dims(const SystemSpec& s) {
    std::vector<std::size_t> d;
    for (const auto& q : s.qubits) d.push_back(q.levels_ghz.size());
    d.push_back(static_cast<std::size_t>(s.cavity.levels));
    return d;
}

inline void validate(const SystemSpec& s) {
    if (s.cavity.levels < 2) fail(ErrorKind::InvalidInput, "SystemSpec: cavity cutoff below 2");
    require_finite(s.cavity.omega_ghz, "SystemSpec");
    for (const auto& q : s.qubits) {
        if (q.levels_ghz.size() < 2) fail(ErrorKind::InvalidInput, "SystemSpec: qubit with fewer than 2 levels");
        for (double e : q.levels_ghz) require_finite(e, "SystemSpec");
        require_finite(q.g_ghz, "SystemSpec");
        if (q.g_ghz < 0) fail(ErrorKind::InvalidInput, "SystemSpec: negative coupling");
    }
}

inline std::size_t state_index(const SystemSpec& s, const std::vector<int>& qubit_states, int photons) {
    auto d = subsystem_dims(s);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.qubits.size(); ++i) idx = idx * d[i] + static_cast<std::size_t>(qubit_states.at(i));
    return idx * d.back() + static_cast<std::size_t>(photons);
}

inline std::size_t total_dim(const SystemSpec& s) { return product(subsystem_dims(s)); }

inline ComplexMatrix annihilation(int n) {
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline ComplexMatrix build_jc_hamiltonian(const SystemSpec& s, bool rwa = true) {
    validate(s);
    const std::size_t dim = total_dim(s);
    if (dim > 4096) fail(ErrorKind::DimTooLarge, "build_jc_hamiltonian: dimension " + std::to_string(dim) + " exceeds 4096");
    auto d = subsystem_dims(s);
    const std::size_t nq = s.qubits.size();

    auto ident = [&](std::size_t i) { return ComplexMatrix::Identity(d[i], d[i]); };
    auto lift = [&](std::size_t which, const ComplexMatrix& op) {
        std::vector<ComplexMatrix> parts;
        for (std::size_t i = 0; i <= nq; ++i) parts.push_back(i == which ? op : ident(i));
        return kron_all(parts);
    };

    const ComplexMatrix a = annihilation(s.cavity.levels);
    const ComplexMatrix a_full = lift(nq, a);
    ComplexMatrix h = s.cavity.omega_ghz * (a_full.adjoint() * a_full);
    for (std::size_t i = 0; i < nq; ++i) {
        const auto& q = s.qubits[i];
        const int nl = static_cast<int>(q.levels_ghz.size());
        ComplexMatrix diag = ComplexMatrix::Zero(nl, nl);
        ComplexMatrix lower = ComplexMatrix::Zero(nl, nl); // sum sqrt(k+1)|k><k+1|
        for (int k = 0; k < nl; ++k) diag(k, k) = q.levels_ghz[k];
        for (int k = 0; k + 1 < nl; ++k) lower(k, k + 1) = std::sqrt(k + 1.0);
        h += lift(i, diag);
        const ComplexMatrix b = lift(i, lower);
        if (rwa) h += q.g_ghz * (b * a_full.adjoint() + b.adjoint() * a_full);
        else h += q.g_ghz * (b + b.adjoint()) * (a_full + a_full.adjoint());
    }
    return h;
}

inline ComplexMatrix excitation_number(const SystemSpec& s) {
    const std::size_t dim = total_dim(s);
    auto d = subsystem_dims(s);
    ComplexMatrix n = ComplexMatrix::Zero(dim, dim);
    for (std::size_t idx = 0; idx < dim; ++idx) {
        std::size_t r = idx, count = 0;
        for (std::size_t i = d.size(); i-- > 0;) { count += r % d[i]; r /= d[i]; }
        n(idx, idx) = static_cast<double>(count);
    }
    return n;
}

struct LadderPair {
    double e_plus;
    double e_minus;
};

// Energies in the frame H = w_r(a+a + 1/2) + w_q sz/2 with delta = w_q - w_r.
// build_jc_hamiltonian of a two-level qubit gives the same values plus delta/2.
inline LadderPair jc_ladder_energies(int n, double omega_r, double g, double delta) {
    if (n < 1) fail(ErrorKind::InvalidInput, "jc_ladder_energies: n must be >= 1");
    const double half = 0.5 * std::sqrt(4.0 * g * g * n + delta * delta);
    return {n * omega_r + half, n * omega_r - half};
}

// delta = w_q - w_r. Sign follows chi = (1/2)[(E(e,1)-E(e,0)) - (E(g,1)-E(g,0))].
inline double chi_dispersive(double g, double delta, double ec) {
    for (double v : {g, delta, ec}) require_finite(v, "chi_dispersive");
    if (std::abs(delta) < 1e-15 || std::abs(delta - ec) < 1e-15)
        fail(ErrorKind::Divergent, "chi_dispersive: resonance at delta=0 or delta=ec");
    return -(g * g / delta) * ec / (delta - ec);
}

// Follow bare states |label> from g=0 to full coupling by maximum overlap.
inline std::vector<double> tracked_energies(const SystemSpec& s, const std::vector<std::size_t>& labels,
                                            int steps = 40, double threshold = 0.5) {
    validate(s);
    const std::size_t dim = total_dim(s);
    std::vector<StateVector> prev;
    for (auto l : labels) prev.push_back(basis_state(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(l)));
    std::vector<double> energies(labels.size(), 0.0);
    bool uncoupled = true;
    for (const auto& q : s.qubits) uncoupled = uncoupled && q.g_ghz == 0.0;
    if (uncoupled) steps = 0;
    for (int k = 1; k <= steps; ++k) {
        SystemSpec sk = s;
        for (auto& q : sk.qubits) q.g_ghz *= static_cast<double>(k) / steps;
        auto e = eig_hermitian(build_jc_hamiltonian(sk, true));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            Eigen::Index best = 0;
            double best_ov = -1;
            for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) {
                double ov = std::norm(prev[i].dot(e.vectors.col(c)));
                if (ov > best_ov) { best_ov = ov; best = c; }
            }
            if (best_ov < threshold)
                fail(ErrorKind::LabelAmbiguous, "tracked_energies: overlap " + std::to_string(best_ov) + " below threshold");
            StateVector v = e.vectors.col(best);
            cplx ph = prev[i].dot(v);
            prev[i] = v * std::conj(ph) / std::abs(ph);
            energies[i] = e.values(best);
        }
    }
    if (steps == 0) {
        auto h = build_jc_hamiltonian(s, true);
        for (std::size_t i = 0; i < labels.size(); ++i) energies[i] = h(labels[i], labels[i]).real();
    }
    return energies;
}

// chi of qubit 0 from the dressed spectrum; other qubits are held in their ground state.
inline double chi_exact(const SystemSpec& s) {
    if (s.qubits.empty()) fail(ErrorKind::InvalidInput, "chi_exact: no qubit");
    std::vector<int> gq(s.qubits.size(), 0), eq = gq;
    eq[0] = 1;
    auto e = tracked_energies(s, {state_index(s, gq, 0), state_index(s, gq, 1), state_index(s, eq, 0),
                                  state_index(s, eq, 1)});
    return 0.5 * ((e[3] - e[2]) - (e[1] - e[0]));
}

// Dressed cavity frequency with qubit 0 in level j, j = 0 .. max_level.
inline std::vector<double> cavity_pulls(const SystemSpec& s, int max_level) {
    std::vector<std::size_t> labels;
    std::vector<int> st(s.qubits.size(), 0);
    for (int j = 0; j <= max_level; ++j) {
        st[0] = j;
        labels.push_back(state_index(s, st, 0));
        labels.push_back(state_index(s, st, 1));
    }
    auto e = tracked_energies(s, labels);
    std::vector<double> out;
    for (int j = 0; j <= max_level; ++j) out.push_back(e[2 * j + 1] - e[2 * j]);
    return out;
}

inline double zz_xi(double g1, double g2, double delta1, double delta2, double deltaA, double deltaB) {
    for (double v : {g1, g2, delta1, delta2, deltaA, deltaB}) require_finite(v, "zz_xi");
    for (double v : {delta1, delta2, deltaA, deltaB})
        if (std::abs(v) < 1e-9) fail(ErrorKind::Divergent, "zz_xi: transitions in resonance");
    return -2.0 * g1 * g1 * g2 * g2 *
           (1.0 / (deltaA * delta1 * delta1) + 1.0 / (deltaB * delta2 * delta2) + 1.0 / (delta1 * delta2 * delta2) +
            1.0 / (delta2 * delta1 * delta1));
}

// zeta = E11 + E00 - E10 - E01; near the 11-02 style resonance zeta ~ -xi.
inline double zeta_from_xi(double xi) { return -xi; }

inline double zeta_exact(const SystemSpec& s) {
    if (s.qubits.size() < 2) fail(ErrorKind::InvalidInput, "zeta_exact: need two qubits");
    std::vector<int> st(s.qubits.size(), 0);
    auto idx = [&](int a, int b) {
        st[0] = a;
        st[1] = b;
        return state_index(s, st, 0);
    };
    auto e = tracked_energies(s, {idx(0, 0), idx(1, 0), idx(0, 1), idx(1, 1)});
    return e[3] + e[0] - e[1] - e[2];
}

struct CrossingModel {
    double g_ghz = 0.05;
    double delta_ghz = 0.0;
};

inline ComplexMatrix crossing_hamiltonian(const CrossingModel& m) {
    ComplexMatrix h(2, 2);
    h << 0, m.g_ghz, m.g_ghz, -m.delta_ghz;
    return h;
}

inline double crossing_rephasing_time(const CrossingModel& m) {
    return 1.0 / std::sqrt(4.0 * m.g_ghz * m.g_ghz + m.delta_ghz * m.delta_ghz);
}

inline double crossing_return_probability(const CrossingModel& m, double t_ns) {
    if (!(m.g_ghz > 0)) fail(ErrorKind::InvalidInput, "CrossingModel: g must be positive");
    return std::norm(evolve_unitary(crossing_hamiltonian(m), t_ns)(1, 1));
}

inline double crossing_conditional_phase(const CrossingModel& m) {
    if (!(m.g_ghz > 0)) fail(ErrorKind::InvalidInput, "CrossingModel: g must be positive");
    return constants::pi * (1.0 - m.delta_ghz / std::sqrt(4.0 * m.g_ghz * m.g_ghz + m.delta_ghz * m.delta_ghz));
}

// Piecewise-constant parameter steps. Qubit i level j moves by j*qubit_shift_ghz[i].
struct Segment {
    std::vector<double> qubit_shift_ghz;
    double cavity_shift_ghz = 0.0;
    double duration_ns = 0.0;
};

inline SystemSpec apply_segment(SystemSpec s, const Segment& seg) {
    for (std::size_t i = 0; i < s.qubits.size() && i < seg.qubit_shift_ghz.size(); ++i)
        for (std::size_t j = 0; j < s.qubits[i].levels_ghz.size(); ++j)
            s.qubits[i].levels_ghz[j] += static_cast<double>(j) * seg.qubit_shift_ghz[i];
    s.cavity.omega_ghz += seg.cavity_shift_ghz;
    return s;
}

inline ComplexMatrix evolve_piecewise(const std::vector<std::pair<ComplexMatrix, double>>& segments,
                                      Eigen::Index dim) {
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (const auto& [h, t] : segments) u = evolve_unitary(h, t) * u;
    return u;
}

inline ComplexMatrix evolve_piecewise(const SystemSpec& s, const std::vector<Segment>& segments, bool rwa = true) {
    std::vector<std::pair<ComplexMatrix, double>> hs;
    for (const auto& seg : segments) hs.emplace_back(build_jc_hamiltonian(apply_segment(s, seg), rwa), seg.duration_ns);
    return evolve_piecewise(hs, static_cast<Eigen::Index>(total_dim(s)));
}

// Phase of the return amplitude at t_rp relative to the uncoupled state, in [0, 2pi).
inline double crossing_conditional_phase_simulated(const CrossingModel& m) {
    const double t = crossing_rephasing_time(m);
    ComplexMatrix u = evolve_piecewise({{crossing_hamiltonian(m), t}}, 2);
    double ph = std::arg(u(1, 1)) - constants::two_pi * m.delta_ghz * t;
    ph = std::fmod(ph, constants::two_pi);
    if (ph < 0) ph += constants::two_pi;
    return ph;
}

// Population left in bare state `prepared` after holding at each shift for each time.
inline std::vector<std::vector<double>> chevron_scan(const SystemSpec& s, std::size_t prepared, int qubit,
                                                     const std::vector<double>& shifts,
                                                     const std::vector<double>& times) {
    std::vector<std::vector<double>> out;
    for (double sh : shifts) {
        Segment seg;
        seg.qubit_shift_ghz.assign(s.qubits.size(), 0.0);
        seg.qubit_shift_ghz.at(static_cast<std::size_t>(qubit)) = sh;
        auto e = eig_hermitian(build_jc_hamiltonian(apply_segment(s, seg)));
        std::vector<double> row;
        for (double t : times) {
            StateVector psi0 = basis_state(static_cast<Eigen::Index>(total_dim(s)), static_cast<Eigen::Index>(prepared));
            Eigen::VectorXcd c = e.vectors.adjoint() * psi0;
            for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-I_unit * constants::two_pi * e.values(k) * t);
            StateVector psi = e.vectors * c;
            row.push_back(std::norm(psi(static_cast<Eigen::Index>(prepared))));
        }
        out.push_back(std::move(row));
    }
    return out;
}

// Conditional phase of an adiabatic trajectory: trapezoid integral of zeta over time.
inline double adiabatic_conditional_phase(const SystemSpec& s, const std::vector<double>& times_ns,
                                          const std::vector<std::vector<double>>& shifts) {
    if (times_ns.size() != shifts.size()) fail(ErrorKind::DimMismatch, "adiabatic_conditional_phase: size mismatch");
    double phase = 0.0, prev_zeta = 0.0;
    for (std::size_t k = 0; k < times_ns.size(); ++k) {
        if (k > 0 && times_ns[k] - times_ns[k - 1] > 0.1 + 1e-12)
            fail(ErrorKind::InvalidInput, "adiabatic_conditional_phase: step above 0.1 ns");
        Segment seg;
        seg.qubit_shift_ghz = shifts[k];
        const double z = zeta_exact(apply_segment(s, seg));
        if (k > 0) phase += 0.5 * (z + prev_zeta) * (times_ns[k] - times_ns[k - 1]);
        prev_zeta = z;
    }
    return constants::two_pi * phase;
}

// phi[mask] for every non-empty subset of qubits; bit (n-1-q) of mask is qubit q.
struct PhaseGateSpec {
    int n_qubits = 2;
    std::vector<double> phi;

    double at(const std::string& bits) const {
        std::size_t mask = 0;
        for (char c : bits) mask = (mask << 1) | (c == '1' ? 1u : 0u);
        return phi.at(mask);
    }
};

inline ComplexMatrix build_phase_gate(const PhaseGateSpec& p) {
    const std::size_t d = std::size_t{1} << p.n_qubits;
    if (p.phi.size() != d) fail(ErrorKind::DimMismatch, "build_phase_gate: need 2^n phases");
    ComplexMatrix u = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        double total = 0.0;
        for (std::size_t m = 1; m < d; ++m)
            if ((m & k) == m) total += p.phi[m];
        u(k, k) = std::exp(I_unit * total);
    }
    return u;
}

inline PhaseGateSpec extract_phase_gate(const ComplexMatrix& u, int n_qubits) {
    if (n_qubits != 2 && n_qubits != 3) fail(ErrorKind::Unsupported, "extract_phase_gate: n must be 2 or 3");
    const std::size_t d = std::size_t{1} << n_qubits;
    if (static_cast<std::size_t>(u.rows()) != d || u.cols() != u.rows())
        fail(ErrorKind::DimMismatch, "extract_phase_gate: matrix is not 2^n square");
    require_finite(u, "extract_phase_gate");
    double off = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            if (i != j) off += std::norm(u(i, j));
    off = std::sqrt(off);
    if (off > 1e-6) fail(ErrorKind::NotPhaseGate, "extract_phase_gate: off-diagonal mass " + std::to_string(off));

    std::vector<double> arg(d);
    for (std::size_t k = 0; k < d; ++k) arg[k] = std::arg(u(k, k) / u(0, 0));
    PhaseGateSpec p{n_qubits, std::vector<double>(d, 0.0)};
    for (std::size_t m = 1; m < d; ++m) {
        double acc = 0.0;
        for (std::size_t sub = m;; sub = (sub - 1) & m) {
            const int parity = std::popcount(m) - std::popcount(sub);
            acc += (parity % 2 == 0 ? 1.0 : -1.0) * arg[sub];
            if (sub == 0) break;
        }
        p.phi[m] = wrap_phase(acc);
    }
    return p;
}

} // namespace cqedwb
