#pragma once

#include <bit>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "numkit.hpp"
#include "pulsectl.hpp"

namespace cqedwb {

// beta[s] multiplies the Z-type string whose Z positions are the set bits of s (qubit 0 = most significant).
struct MeasurementModel {
    int n_qubits = 1;
    std::vector<double> beta;
};

inline std::string z_string(std::size_t s, int n) {
    std::string out(static_cast<std::size_t>(n), 'I');
    for (int q = 0; q < n; ++q)
        if ((s >> (n - 1 - q)) & 1u) out[static_cast<std::size_t>(q)] = 'Z';
    return out;
}

inline void validate(const MeasurementModel& m) {
    if (m.n_qubits < 1) fail(ErrorKind::InvalidInput, "MeasurementModel: need at least one qubit");
    if (m.beta.size() != (std::size_t{1} << m.n_qubits))
        fail(ErrorKind::DimMismatch, "MeasurementModel: need 2^n beta coefficients");
    for (double b : m.beta) require_finite(b, "MeasurementModel");
}

// Effective measurement operator sum_s beta_s U^dag P_s U.
inline ComplexMatrix measurement_operator(const MeasurementModel& m, const std::vector<Rotation>& pre) {
    validate(m);
    if (pre.size() != static_cast<std::size_t>(m.n_qubits))
        fail(ErrorKind::DimMismatch, "measurement_operator: one rotation per qubit required");
    std::vector<ComplexMatrix> us;
    for (const auto& r : pre) us.push_back(rotation_unitary(r));
    const ComplexMatrix u = kron_all(us);
    ComplexMatrix op = ComplexMatrix::Zero(u.rows(), u.cols());
    for (std::size_t s = 0; s < m.beta.size(); ++s)
        if (m.beta[s] != 0.0) op += m.beta[s] * pauli_string(z_string(s, m.n_qubits));
    return u.adjoint() * op * u;
}

inline double joint_measurement_voltage(const DensityMatrix& rho, const MeasurementModel& m,
                                        const std::vector<Rotation>& pre) {
    const Eigen::Index d = Eigen::Index{1} << m.n_qubits;
    if (rho.rows() != d || rho.cols() != d) fail(ErrorKind::DimMismatch, "joint_measurement_voltage: rho dimension");
    return (rho * measurement_operator(m, pre)).trace().real();
}

// Voltages of the computational basis states are W*beta with W[b][s] = (-1)^popcount(b&s); W^2 = 2^n.
inline MeasurementModel beta_calibration(const std::vector<double>& basis_voltages) {
    const std::size_t d = basis_voltages.size();
    if (d < 2 || !std::has_single_bit(d))
        fail(ErrorKind::SingularDesign, "beta_calibration: voltage count must be a power of two >= 2");
    for (double v : basis_voltages) require_finite(v, "beta_calibration");
    MeasurementModel m;
    m.n_qubits = std::countr_zero(d);
    m.beta.assign(d, 0.0);
    for (std::size_t s = 0; s < d; ++s) {
        double acc = 0.0;
        for (std::size_t b = 0; b < d; ++b) acc += (std::popcount(b & s) % 2 ? -1.0 : 1.0) * basis_voltages[b];
        m.beta[s] = acc / static_cast<double>(d);
    }
    return m;
}

inline std::vector<double> basis_voltages(const MeasurementModel& m) {
    validate(m);
    const std::size_t d = m.beta.size();
    std::vector<double> v(d, 0.0);
    for (std::size_t b = 0; b < d; ++b)
        for (std::size_t s = 0; s < d; ++s) v[b] += (std::popcount(b & s) % 2 ? -1.0 : 1.0) * m.beta[s];
    return v;
}

using TomoRow = std::vector<std::string>; // pulse names per qubit: Id, X9, Y9, Xp

inline std::vector<TomoRow> prerotation_table(int n_qubits) {
    static const std::vector<std::string> gates{"Id", "X9", "Y9", "Xp"};
    switch (n_qubits) {
    case 1:
        return {{"Id"}, {"X9"}, {"Y9"}};
    case 2:
        return {{"Id", "Id"}, {"Xp", "Id"}, {"Id", "Xp"}, {"X9", "Id"}, {"X9", "X9"},
                {"X9", "Y9"}, {"X9", "Xp"}, {"Y9", "Id"}, {"Y9", "X9"}, {"Y9", "Y9"},
                {"Y9", "Xp"}, {"Id", "X9"}, {"Xp", "X9"}, {"Id", "Y9"}, {"Xp", "Y9"}};
    case 3: {
        std::vector<TomoRow> rows;
        for (const auto& a : gates)
            for (const auto& b : gates)
                for (const auto& c : gates)
                    if (!(a == "Xp" && b == "Xp" && c == "Xp")) rows.push_back({a, b, c});
        return rows;
    }
    default:
        fail(ErrorKind::Unsupported, "prerotation_table: only 1, 2 or 3 qubits");
    }
}

inline std::vector<Rotation> row_rotations(const TomoRow& row) {
    std::vector<Rotation> out;
    for (const auto& g : row) out.push_back(allxy_pulse(g).rot);
    return out;
}

inline std::string row_label(const TomoRow& row) {
    std::string s;
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "_" : "") + row[i];
    return s;
}

inline std::vector<double> simulate_tomo_voltages(const DensityMatrix& rho, const MeasurementModel& m) {
    std::vector<double> v;
    for (const auto& row : prerotation_table(m.n_qubits))
        v.push_back(joint_measurement_voltage(rho, m, row_rotations(row)));
    return v;
}

struct TomoDesign {
    Eigen::MatrixXd a;      // rows x (4^n - 1)
    Eigen::VectorXd offset; // identity coefficient of each row
    double condition;
};

inline TomoDesign tomo_design(const MeasurementModel& m) {
    validate(m);
    const int n = m.n_qubits;
    const auto rows = prerotation_table(n);
    const auto labels = pauli_labels(n);
    const double d = static_cast<double>(std::size_t{1} << n);
    TomoDesign t{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size())),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size())), 0.0};
    std::vector<ComplexMatrix> paulis;
    for (const auto& l : labels) paulis.push_back(pauli_string(l));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const ComplexMatrix op = measurement_operator(m, row_rotations(rows[r]));
        const auto ri = static_cast<Eigen::Index>(r);
        t.offset(ri) = op.trace().real() / d;
        for (std::size_t k = 0; k < paulis.size(); ++k)
            t.a(ri, static_cast<Eigen::Index>(k)) = (op * paulis[k]).trace().real() / d;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.a);
    const auto& sv = svd.singularValues();
    t.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    return t;
}

struct TomoResult {
    PauliVector paulis;
    DensityMatrix rho;
    double min_eigenvalue;
    double condition;
};

// offset is subtracted from every voltage first (constant out-of-subspace population).
inline TomoResult reconstruct_state(const std::vector<double>& voltages, const MeasurementModel& m,
                                    double offset = 0.0) {
    const TomoDesign t = tomo_design(m);
    if (voltages.size() != static_cast<std::size_t>(t.a.rows()))
        fail(ErrorKind::DimMismatch, "reconstruct_state: voltage count does not match the table");
    if (!(t.condition <= 1e6)) fail(ErrorKind::IllConditioned, "reconstruct_state: design condition number above 1e6");
    Eigen::VectorXd b(t.a.rows());
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        require_finite(voltages[static_cast<std::size_t>(i)], "reconstruct_state");
        b(i) = voltages[static_cast<std::size_t>(i)] - offset - t.offset(i);
    }
    const Eigen::VectorXd x = t.a.colPivHouseholderQr().solve(b);
    PauliVector pv;
    pv.n_qubits = m.n_qubits;
    pv.values.assign(x.data(), x.data() + x.size());
    TomoResult res{pv, rho_from_paulis(pv), 0.0, t.condition};
    res.min_eigenvalue = eig_hermitian(res.rho).values.minCoeff();
    return res;
}

// Offset minimising the summed squared Pauli bars.
inline double fit_voltage_offset(const std::vector<double>& voltages, const MeasurementModel& m) {
    const TomoDesign t = tomo_design(m);
    if (voltages.size() != static_cast<std::size_t>(t.a.rows()))
        fail(ErrorKind::DimMismatch, "fit_voltage_offset: voltage count does not match the table");
    Eigen::VectorXd b(t.a.rows());
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = voltages[static_cast<std::size_t>(i)] - t.offset(i);
    auto qr = t.a.colPivHouseholderQr();
    const Eigen::VectorXd x0 = qr.solve(b);
    const Eigen::VectorXd y = qr.solve(Eigen::VectorXd::Ones(b.size()));
    const double yy = y.squaredNorm();
    return yy > 0 ? x0.dot(y) / yy : 0.0;
}

inline DensityMatrix physicality_project(const DensityMatrix& rho) {
    require_finite(rho, "physicality_project");
    const DensityMatrix h = 0.5 * (rho + rho.adjoint());
    auto e = eig_hermitian(h);
    Eigen::VectorXd lam = e.values.cwiseMax(0.0);
    const double s = lam.sum();
    if (!(s > 0)) fail(ErrorKind::InvalidInput, "physicality_project: no positive eigenvalues");
    lam /= s;
    return e.vectors * lam.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

using ChiMatrix = ComplexMatrix;

// Pauli operator basis E_m in lexicographic order, identity first.
inline std::vector<ComplexMatrix> pauli_basis(int n_qubits) {
    std::vector<ComplexMatrix> out;
    for (const auto& l : pauli_labels(n_qubits, true)) out.push_back(pauli_string(l));
    return out;
}

// {|0>, |1>, |+X>, |+Y>} on each qubit, first qubit slowest.
inline std::vector<DensityMatrix> standard_preps(int n_qubits) {
    std::vector<StateVector> single(4, StateVector::Zero(2));
    single[0](0) = 1.0;
    single[1](1) = 1.0;
    single[2] << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    single[3] << 1.0 / std::sqrt(2.0), I_unit / std::sqrt(2.0);
    std::vector<DensityMatrix> out;
    const std::size_t total = std::size_t{1} << (2 * n_qubits);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<ComplexMatrix> parts;
        for (int q = 0; q < n_qubits; ++q) {
            const std::size_t digit = (idx >> (2 * (n_qubits - 1 - q))) & 3u;
            parts.push_back(projector(single[digit]));
        }
        out.push_back(kron_all(parts));
    }
    return out;
}

namespace detail {
inline Eigen::VectorXcd vec(const ComplexMatrix& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}
} // namespace detail

// Solves for the superoperator from the input/output pairs, then reads chi_mn off its
// expansion in conj(E_n) (x) E_m, which is orthogonal with norm d^2.
inline ChiMatrix process_tomography(const std::vector<DensityMatrix>& inputs,
                                    const std::vector<DensityMatrix>& outputs) {
    if (inputs.empty() || inputs.size() != outputs.size())
        fail(ErrorKind::DimMismatch, "process_tomography: need matching input and output lists");
    const Eigen::Index d = inputs[0].rows();
    const int n = qubit_count(d);
    const Eigen::Index d2 = d * d;
    const auto j = static_cast<Eigen::Index>(inputs.size());
    ComplexMatrix xin(d2, j), xout(d2, j);
    for (Eigen::Index k = 0; k < j; ++k) {
        const auto& a = inputs[static_cast<std::size_t>(k)];
        const auto& b = outputs[static_cast<std::size_t>(k)];
        if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d)
            fail(ErrorKind::DimMismatch, "process_tomography: inconsistent state dimensions");
        xin.col(k) = detail::vec(a);
        xout.col(k) = detail::vec(b);
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(xin, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cut;
    if (rank < d2) fail(ErrorKind::RankDeficientPreps, "process_tomography: preparations do not span the operator space");
    // S = Xout * pinv(Xin)
    const ComplexMatrix pinv = svd.matrixV() * sv.cwiseInverse().cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
    const ComplexMatrix s = xout * pinv;

    const auto basis = pauli_basis(n);
    const auto nb = static_cast<Eigen::Index>(basis.size());
    ChiMatrix chi(nb, nb);
    for (Eigen::Index m = 0; m < nb; ++m) {
        for (Eigen::Index nn = 0; nn < nb; ++nn) {
            const auto& em = basis[static_cast<std::size_t>(m)];
            const auto& en = basis[static_cast<std::size_t>(nn)];
            // tr((conj(En) (x) Em)^dag S) with column-stacked vec: row index c*d + a, column index e*d + f
            cplx acc = 0.0;
            for (Eigen::Index c = 0; c < d; ++c)
                for (Eigen::Index e = 0; e < d; ++e) {
                    const cplx ce = std::conj(en(c, e));
                    if (ce == 0.0) continue;
                    for (Eigen::Index a = 0; a < d; ++a)
                        for (Eigen::Index f = 0; f < d; ++f) {
                            const cplx af = em(a, f);
                            if (af == 0.0) continue;
                            acc += std::conj(ce * af) * s(c * d + a, e * d + f);
                        }
                }
            chi(m, nn) = acc / static_cast<double>(d2);
        }
    }
    return chi;
}

// chi = v v^dag with v_m = tr(E_m U)/d.
inline ChiMatrix unitary_chi(const ComplexMatrix& u) {
    const int n = qubit_count(u.rows());
    const auto basis = pauli_basis(n);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t m = 0; m < basis.size(); ++m)
        v(static_cast<Eigen::Index>(m)) = (basis[m] * u).trace() / static_cast<double>(u.rows());
    return v * v.adjoint();
}

inline ChiMatrix chi_of_channel(const std::function<DensityMatrix(const DensityMatrix&)>& channel, int n_qubits) {
    const auto preps = standard_preps(n_qubits);
    std::vector<DensityMatrix> outs;
    for (const auto& p : preps) outs.push_back(channel(p));
    return process_tomography(preps, outs);
}

inline DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho) {
    const auto basis = pauli_basis(qubit_count(rho.rows()));
    if (static_cast<std::size_t>(chi.rows()) != basis.size()) fail(ErrorKind::DimMismatch, "apply_chi: chi size");
    DensityMatrix out = DensityMatrix::Zero(rho.rows(), rho.cols());
    for (std::size_t m = 0; m < basis.size(); ++m)
        for (std::size_t n = 0; n < basis.size(); ++n) {
            const cplx c = chi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
            if (std::abs(c) > 0) out += c * basis[m] * rho * basis[n].adjoint();
        }
    return out;
}

inline double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorKind::DimMismatch, "process_fidelity: chi sizes differ");
    return (a * b).trace().real();
}

// Reads "label,voltage" rows (optional header) and orders them by the prerotation table.
inline std::vector<double> read_tomo_csv(std::istream& in, int n_qubits) {
    const auto rows = prerotation_table(n_qubits);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rows.size(); ++i) index[row_label(rows[i])] = i;
    std::vector<double> v(rows.size(), std::nan(""));
    std::vector<bool> seen(rows.size(), false);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(ErrorKind::InvalidInput, "read_tomo_csv: expected label,voltage");
        const std::string label = line.substr(0, comma), value = line.substr(comma + 1);
        if (first && label == "label") {
            first = false;
            continue;
        }
        first = false;
        auto it = index.find(label);
        if (it == index.end()) fail(ErrorKind::InvalidInput, "read_tomo_csv: unknown sequence " + label);
        if (seen[it->second]) fail(ErrorKind::InvalidInput, "read_tomo_csv: duplicate sequence " + label);
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(value, &pos);
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidInput, "read_tomo_csv: bad voltage for " + label);
        }
        if (pos != value.size()) fail(ErrorKind::InvalidInput, "read_tomo_csv: bad voltage for " + label);
        v[it->second] = x;
        seen[it->second] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) fail(ErrorKind::DimMismatch, "read_tomo_csv: missing sequence " + row_label(rows[i]));
    return v;
}

} // namespace cqedwb
