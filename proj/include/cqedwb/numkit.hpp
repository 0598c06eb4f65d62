#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "constants.hpp"
#include "error.hpp"

namespace cqedwb {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

inline void require_finite(const ComplexMatrix& m, std::string_view where) {
    if (!m.allFinite())
        fail(ErrorKind::InvalidInput, std::string(where) + ": non-finite entry");
}

inline void require_finite(double x, std::string_view where) {
    if (!std::isfinite(x))
        fail(ErrorKind::InvalidInput, std::string(where) + ": non-finite value");
}

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(max_abs(m), 1e-300);
    return max_abs(m - m.adjoint()) <= rel_tol * scale;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline ComplexMatrix kron_all(const std::vector<ComplexMatrix>& ms) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (const auto& m : ms) out = kron(out, m);
    return out;
}

struct EigResult {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns, first non-negligible component real positive
};

inline EigResult eig_hermitian(const ComplexMatrix& h) {
    require_finite(h, "eig_hermitian");
    if (!is_hermitian(h))
        fail(ErrorKind::NotHermitian, "eig_hermitian: matrix is not Hermitian");
    ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::NoConvergence, "eig_hermitian: eigensolver failed");
    EigResult r{es.eigenvalues(), es.eigenvectors()};
    for (Eigen::Index k = 0; k < r.vectors.cols(); ++k) {
        auto col = r.vectors.col(k);
        double cut = 1e-12 * col.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i)) > cut) {
                col *= std::conj(col(i)) / std::abs(col(i));
                col(i) = std::abs(col(i));
                break;
            }
        }
    }
    return r;
}

// Apply f(lambda) to a Hermitian matrix through its eigendecomposition.
template <class F>
ComplexMatrix hermitian_function(const ComplexMatrix& h, F f) {
    auto e = eig_hermitian(h);
    Eigen::VectorXcd d(e.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(e.values(i));
    return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

// U = exp(-i 2 pi H t); H in GHz, t in ns.
inline ComplexMatrix evolve_unitary(const ComplexMatrix& h, double t) {
    require_finite(t, "evolve_unitary");
    return hermitian_function(h, [t](double lam) {
        return std::exp(-I_unit * constants::two_pi * lam * t);
    });
}

inline std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& dims,
                                   std::vector<std::size_t> keep) {
    const std::size_t n = dims.size();
    if (rho.rows() != rho.cols() || product(dims) != static_cast<std::size_t>(rho.rows()))
        fail(ErrorKind::DimMismatch, "partial_trace: dims do not match rho");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for (auto k : keep)
        if (k >= n) fail(ErrorKind::DimMismatch, "partial_trace: keep index out of range");

    std::vector<bool> kept(n, false);
    for (auto k : keep) kept[k] = true;
    std::vector<std::size_t> kdims, tdims;
    for (std::size_t i = 0; i < n; ++i) (kept[i] ? kdims : tdims).push_back(dims[i]);
    const std::size_t dk = product(kdims), dt = product(tdims);

    // full index from (kept index, traced index)
    auto compose = [&](std::size_t ik, std::size_t it) {
        std::vector<std::size_t> digits(n);
        for (std::size_t i = n; i-- > 0;) {
            if (kept[i]) { digits[i] = ik % dims[i]; ik /= dims[i]; }
            else { digits[i] = it % dims[i]; it /= dims[i]; }
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) idx = idx * dims[i] + digits[i];
        return idx;
    };

    std::vector<std::size_t> table(dk * dt);
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t t = 0; t < dt; ++t) table[a * dt + t] = compose(a, t);

    DensityMatrix out = DensityMatrix::Zero(dk, dk);
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b) {
            cplx s = 0;
            for (std::size_t t = 0; t < dt; ++t)
                s += rho(table[a * dt + t], table[b * dt + t]);
            out(a, b) = s;
        }
    return out;
}

struct PurityEntropy {
    double purity;
    double entropy_bits;
};

inline PurityEntropy purity_entropy(const DensityMatrix& rho) {
    auto e = eig_hermitian(rho);
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        double l = e.values(i);
        if (l > 1e-12) s -= l * std::log2(l);
    }
    double purity = (rho * rho).trace().real();
    return {purity, s};
}

inline DensityMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

// Single-qubit Paulis in the order I, X, Y, Z.
inline ComplexMatrix pauli(char c) {
    ComplexMatrix m(2, 2);
    switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -I_unit, I_unit, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: fail(ErrorKind::InvalidInput, std::string("pauli: unknown label ") + c);
    }
    return m;
}

inline ComplexMatrix pauli_string(std::string_view labels) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (char c : labels) out = kron(out, pauli(c));
    return out;
}

// Lexicographic {I,X,Y,Z}^n with the identity string first.
inline std::vector<std::string> pauli_labels(int n_qubits, bool include_identity = false) {
    static constexpr char letters[4] = {'I', 'X', 'Y', 'Z'};
    std::size_t total = std::size_t{1} << (2 * n_qubits);
    std::vector<std::string> out;
    out.reserve(total);
    for (std::size_t k = include_identity ? 0 : 1; k < total; ++k) {
        std::string s(n_qubits, 'I');
        std::size_t r = k;
        for (int q = n_qubits - 1; q >= 0; --q) { s[q] = letters[r % 4]; r /= 4; }
        out.push_back(std::move(s));
    }
    return out;
}

struct PauliVector {
    int n_qubits = 0;
    std::vector<double> values; // 4^n - 1 entries, order of pauli_labels(n)

    double at(std::string_view label) const {
        auto labels = pauli_labels(n_qubits);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return values[i];
        fail(ErrorKind::InvalidInput, "PauliVector: unknown label " + std::string(label));
    }
};

inline int qubit_count(Eigen::Index dim) {
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) return -1;
    return n;
}

inline PauliVector pauli_expectations(const DensityMatrix& rho, int n_qubits) {
    require_finite(rho, "pauli_expectations");
    if (n_qubits < 1 || rho.rows() != (Eigen::Index{1} << n_qubits) || rho.cols() != rho.rows())
        fail(ErrorKind::DimMismatch, "pauli_expectations: rho dimension is not 2^n");
    PauliVector pv{n_qubits, {}};
    for (const auto& l : pauli_labels(n_qubits))
        pv.values.push_back((rho * pauli_string(l)).trace().real());
    return pv;
}

inline DensityMatrix rho_from_paulis(const PauliVector& pv) {
    const Eigen::Index d = Eigen::Index{1} << pv.n_qubits;
    auto labels = pauli_labels(pv.n_qubits);
    if (labels.size() != pv.values.size())
        fail(ErrorKind::DimMismatch, "rho_from_paulis: wrong number of values");
    DensityMatrix rho = DensityMatrix::Identity(d, d);
    for (std::size_t i = 0; i < labels.size(); ++i) rho += pv.values[i] * pauli_string(labels[i]);
    return rho / static_cast<double>(d);
}

struct KrausChannel {
    std::string kind;
    std::vector<ComplexMatrix> ops;

    DensityMatrix apply(const DensityMatrix& rho) const {
        DensityMatrix out = DensityMatrix::Zero(rho.rows(), rho.cols());
        for (const auto& m : ops) out += m * rho * m.adjoint();
        return out;
    }

    double completeness_error() const {
        if (ops.empty()) return 0.0;
        ComplexMatrix s = ComplexMatrix::Zero(ops[0].cols(), ops[0].cols());
        for (const auto& m : ops) s += m.adjoint() * m;
        return max_abs(s - ComplexMatrix::Identity(s.rows(), s.cols()));
    }
};

enum class ChannelKind { dephasing, amplitude_damping, depolarizing };

inline KrausChannel make_channel(ChannelKind kind, double p) {
    require_finite(p, "make_channel");
    if (p < 0.0 || p > 1.0)
        fail(ErrorKind::InvalidProbability, "make_channel: p must lie in [0, 1]");
    KrausChannel ch;
    ComplexMatrix m(2, 2);
    switch (kind) {
    case ChannelKind::dephasing:
        ch.kind = "dephasing";
        ch.ops.push_back(std::sqrt(1 - p) * pauli('I'));
        m << std::sqrt(p), 0, 0, 0;
        ch.ops.push_back(m);
        m << 0, 0, 0, std::sqrt(p);
        ch.ops.push_back(m);
        break;
    case ChannelKind::amplitude_damping:
        ch.kind = "amplitude_damping";
        m << 1, 0, 0, std::sqrt(1 - p);
        ch.ops.push_back(m);
        m << 0, std::sqrt(p), 0, 0;
        ch.ops.push_back(m);
        break;
    case ChannelKind::depolarizing:
        ch.kind = "depolarizing";
        ch.ops.push_back(std::sqrt(1 - p) * pauli('I'));
        for (char c : {'X', 'Y', 'Z'}) ch.ops.push_back(std::sqrt(p / 3) * pauli(c));
        break;
    }
    return ch;
}

inline ChannelKind parse_channel_kind(std::string_view s) {
    if (s == "dephasing") return ChannelKind::dephasing;
    if (s == "amplitude_damping") return ChannelKind::amplitude_damping;
    if (s == "depolarizing") return ChannelKind::depolarizing;
    fail(ErrorKind::InvalidInput, "unknown channel kind " + std::string(s));
}

// Operator acting on qubit q (0 = leftmost) of an n-qubit register.
inline ComplexMatrix embed(const ComplexMatrix& op, int q, int n_qubits) {
    std::vector<ComplexMatrix> parts(n_qubits, ComplexMatrix::Identity(2, 2));
    parts[q] = op;
    return kron_all(parts);
}

inline KrausChannel embed(const KrausChannel& ch, int q, int n_qubits) {
    KrausChannel out{ch.kind, {}};
    for (const auto& m : ch.ops) out.ops.push_back(embed(m, q, n_qubits));
    return out;
}

inline Eigen::Vector3d bloch_vector(const DensityMatrix& rho) {
    return {(rho * pauli('X')).trace().real(), (rho * pauli('Y')).trace().real(),
            (rho * pauli('Z')).trace().real()};
}

inline StateVector basis_state(Eigen::Index dim, Eigen::Index k) {
    StateVector v = StateVector::Zero(dim);
    v(k) = 1.0;
    return v;
}

// Wrap an angle into (-pi, pi].
inline double wrap_phase(double a) {
    double w = std::remainder(a, constants::two_pi);
    if (w <= -constants::pi) w += constants::two_pi;
    return w;
}

inline double state_fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.dot(b));
}

} // namespace cqedwb
