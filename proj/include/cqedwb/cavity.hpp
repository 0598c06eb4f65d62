#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cqedspec.hpp"
#include "numkit.hpp"

namespace cqedwb {

struct OscillatorSpec {
    int n_max = 40;
    double kerr_K_ghz = 0.001;
    double omega_ghz = 8.0;
};

// Coherent amplitudes are trustworthy while |alpha|^2 <= N/4.
inline bool truncation_ok(std::complex<double> alpha, int n) { return std::norm(alpha) <= n / 4.0; }

inline void check_truncation(std::complex<double> alpha, int n, bool strict, const char* where) {
    if (n < 4) fail(ErrorKind::InvalidInput, std::string(where) + ": truncation below 4");
    if (strict && !truncation_ok(alpha, n))
        fail(ErrorKind::TruncationWarning, std::string(where) + ": |alpha|^2 exceeds N/4");
}

inline ComplexMatrix displacement(std::complex<double> alpha, int n, bool strict = false) {
    require_finite(alpha.real(), "displacement");
    require_finite(alpha.imag(), "displacement");
    check_truncation(alpha, n, strict, "displacement");
    const ComplexMatrix a = annihilation(n);
    // alpha a^dag - conj(alpha) a = -i H with H Hermitian
    const ComplexMatrix h = I_unit * (alpha * a.adjoint() - std::conj(alpha) * a);
    return hermitian_function(h, [](double lam) { return std::exp(-I_unit * lam); });
}

// Fock expansion truncated at n and renormalized.
inline StateVector coherent_state(std::complex<double> alpha, int n) {
    StateVector v(n);
    std::complex<double> term = std::exp(-0.5 * std::norm(alpha));
    for (int k = 0; k < n; ++k) {
        v(k) = term;
        term *= alpha / std::sqrt(static_cast<double>(k + 1));
    }
    return v / v.norm();
}

enum class KerrFrame { number_squared, normal_ordered };

// Amplitude n picks up exp(i pi K n^2 t) (K in GHz, t in ns); normal ordering uses n(n-1).
inline StateVector kerr_evolve(const StateVector& psi, double k_ghz, double t_ns,
                               KerrFrame frame = KerrFrame::number_squared) {
    require_finite(k_ghz, "kerr_evolve");
    require_finite(t_ns, "kerr_evolve");
    StateVector out = psi;
    for (Eigen::Index n = 0; n < psi.size(); ++n) {
        const double nn = static_cast<double>(n);
        const double w = frame == KerrFrame::number_squared ? nn * nn : nn * (nn - 1.0);
        // reduce before multiplying so long times keep full phase accuracy
        const double ph = std::fmod(k_ghz * t_ns * w, 2.0);
        out(n) *= std::exp(I_unit * constants::pi * ph);
    }
    return out;
}

inline double kerr_revival_time(double k_ghz) {
    if (k_ghz == 0.0) fail(ErrorKind::Divergent, "kerr_revival_time: K is zero");
    return 1.0 / std::abs(k_ghz);
}

// (1/2q) sum_{k,p=0}^{2q-1} exp(i k (k-p) pi / q) |beta exp(i p pi / q)>, normalized.
inline StateVector cat_state(int q, std::complex<double> beta, int n, bool strict = false) {
    if (q < 1) fail(ErrorKind::InvalidInput, "cat_state: q must be >= 1");
    check_truncation(beta, n, strict, "cat_state");
    const double pi = constants::pi;
    StateVector s = StateVector::Zero(n);
    for (int p = 0; p < 2 * q; ++p) {
        cplx weight = 0.0;
        for (int k = 0; k < 2 * q; ++k) weight += std::exp(I_unit * (pi * k * (k - p) / q));
        if (std::abs(weight) < 1e-12) continue;
        s += weight * coherent_state(beta * std::exp(I_unit * (pi * p / q)), n);
    }
    const double nrm = s.norm();
    if (!(nrm > 0)) fail(ErrorKind::InvalidInput, "cat_state: vanishing superposition");
    return s / nrm;
}

// Mean phase-space rotation 2 pi K t (|beta|^2 + 1/2) for short times.
inline double kerr_rotation_angle(double k_ghz, double t_ns, double beta_abs) {
    for (double v : {k_ghz, t_ns, beta_abs}) require_finite(v, "kerr_rotation_angle");
    const double phi = constants::two_pi * k_ghz * t_ns * (beta_abs * beta_abs + 0.5);
    if (std::abs(phi) > 0.5) fail(ErrorKind::OutOfRegime, "kerr_rotation_angle: rotation beyond the short-time regime");
    return phi;
}

struct QGridSpec {
    int points = 121;
    double alpha_max = 6.0;
};

// values(iy, ix) at alpha = axis[ix] + i axis[iy].
struct QGrid {
    std::vector<double> axis;
    Eigen::MatrixXd values;

    double step() const { return axis.size() > 1 ? axis[1] - axis[0] : 0.0; }
    double integral() const { return values.sum() * step() * step(); }
    std::complex<double> centroid() const {
        std::complex<double> c = 0.0;
        for (Eigen::Index iy = 0; iy < values.rows(); ++iy)
            for (Eigen::Index ix = 0; ix < values.cols(); ++ix)
                c += values(iy, ix) * std::complex<double>(axis[static_cast<std::size_t>(ix)],
                                                           axis[static_cast<std::size_t>(iy)]);
        return c * step() * step();
    }
};

inline QGrid q_function(const DensityMatrix& rho, const QGridSpec& g = {}) {
    if (g.points < 2 || !(g.alpha_max > 0)) fail(ErrorKind::InvalidInput, "q_function: bad grid");
    if (rho.rows() != rho.cols()) fail(ErrorKind::DimMismatch, "q_function: rho must be square");
    const int n = static_cast<int>(rho.rows());
    QGrid q;
    for (int i = 0; i < g.points; ++i) q.axis.push_back(-g.alpha_max + 2.0 * g.alpha_max * i / (g.points - 1));
    q.values.resize(g.points, g.points);
    for (int iy = 0; iy < g.points; ++iy)
        for (int ix = 0; ix < g.points; ++ix) {
            const StateVector c = coherent_state({q.axis[static_cast<std::size_t>(ix)], q.axis[static_cast<std::size_t>(iy)]}, n);
            q.values(iy, ix) = std::max(0.0, c.dot(rho * c).real()) / constants::pi;
        }
    return q;
}

inline QGrid q_function(const StateVector& psi, const QGridSpec& g = {}) {
    if (g.points < 2 || !(g.alpha_max > 0)) fail(ErrorKind::InvalidInput, "q_function: bad grid");
    const int n = static_cast<int>(psi.size());
    QGrid q;
    for (int i = 0; i < g.points; ++i) q.axis.push_back(-g.alpha_max + 2.0 * g.alpha_max * i / (g.points - 1));
    q.values.resize(g.points, g.points);
    for (int iy = 0; iy < g.points; ++iy)
        for (int ix = 0; ix < g.points; ++ix) {
            const StateVector c = coherent_state({q.axis[static_cast<std::size_t>(ix)], q.axis[static_cast<std::size_t>(iy)]}, n);
            q.values(iy, ix) = std::norm(c.dot(psi)) / constants::pi;
        }
    return q;
}

struct SpectrumPeak {
    double offset_ghz;
    double weight;
};

// Qubit line split into Poisson-weighted peaks at n * 2 chi.
inline std::vector<SpectrumPeak> number_splitting_spectrum(double chi_ghz, double nbar, int n_peaks) {
    require_finite(chi_ghz, "number_splitting_spectrum");
    require_finite(nbar, "number_splitting_spectrum");
    if (nbar < 0) fail(ErrorKind::InvalidInput, "number_splitting_spectrum: nbar must be >= 0");
    if (n_peaks < 1) fail(ErrorKind::InvalidInput, "number_splitting_spectrum: need at least one peak");
    std::vector<SpectrumPeak> out;
    double w = std::exp(-nbar);
    for (int n = 0; n < n_peaks; ++n) {
        out.push_back({2.0 * chi_ghz * n, w});
        w *= nbar / (n + 1);
    }
    return out;
}

} // namespace cqedwb
