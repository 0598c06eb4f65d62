#pragma once

#include <cmath>
#include <vector>

#include "numkit.hpp"

namespace cqedwb {

struct TransmonParams {
    double ej1_ghz = 15.0;
    double ej2_ghz = 15.0;
    double ec_ghz = 0.35;
    double ng = 0.0;
    double flux_phi0 = 0.0;
    int charge_cutoff = 15;
};

struct FluxNoiseParams {
    double a_phi0 = 1e-5;
};

inline void validate(const TransmonParams& p) {
    for (double v : {p.ej1_ghz, p.ej2_ghz, p.ec_ghz, p.ng, p.flux_phi0}) require_finite(v, "TransmonParams");
    if (p.ec_ghz <= 0) fail(ErrorKind::InvalidInput, "TransmonParams: ec must be positive");
    if (p.ej1_ghz + p.ej2_ghz <= 0) fail(ErrorKind::InvalidInput, "TransmonParams: ej1+ej2 must be positive");
    if (p.ej1_ghz < 0 || p.ej2_ghz < 0) fail(ErrorKind::InvalidInput, "TransmonParams: negative junction energy");
    if (p.charge_cutoff < 10) fail(ErrorKind::InvalidInput, "TransmonParams: charge cutoff below 10");
}

struct EjEffective {
    double ej_eff_ghz;
    double d_asym;
};

inline EjEffective ej_effective(const TransmonParams& p) {
    const double sum = p.ej1_ghz + p.ej2_ghz;
    const double d = (p.ej1_ghz - p.ej2_ghz) / sum;
    const double x = constants::pi * p.flux_phi0;
    const double c = std::cos(x), s = std::sin(x);
    // sum*sqrt(cos^2 + d^2 sin^2) == sum*|cos|*sqrt(1 + d^2 tan^2), finite at half flux
    return {sum * std::sqrt(c * c + d * d * s * s), d};
}

inline ComplexMatrix cpb_hamiltonian(double ej_ghz, double ec_ghz, double ng, int cutoff) {
    const int dim = 2 * cutoff + 1;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const double j = k - cutoff;
        h(k, k) = 4.0 * ec_ghz * (j - ng) * (j - ng);
        if (k + 1 < dim) {
            h(k, k + 1) = -ej_ghz / 2.0;
            h(k + 1, k) = -ej_ghz / 2.0;
        }
    }
    return h;
}

inline ComplexMatrix cpb_hamiltonian(const TransmonParams& p) {
    validate(p);
    return cpb_hamiltonian(ej_effective(p).ej_eff_ghz, p.ec_ghz, p.ng, p.charge_cutoff);
}

inline std::vector<double> cpb_levels(double ej, double ec, double ng, int cutoff, int count) {
    auto e = eig_hermitian(cpb_hamiltonian(ej, ec, ng, cutoff));
    std::vector<double> out;
    for (int i = 0; i < count && i < e.values.size(); ++i) out.push_back(e.values(i));
    return out;
}

struct ConvergedLevels {
    std::vector<double> levels; // absolute energies, ascending
    int cutoff_used;
};

// Lowest `count` levels, escalating the cutoff by 5 until they move less than tol.
inline ConvergedLevels transmon_levels(const TransmonParams& p, int count = 4, double tol = 1e-6,
                                       int max_cutoff = 200) {
    validate(p);
    const double ej = ej_effective(p).ej_eff_ghz;
    int n = p.charge_cutoff;
    auto prev = cpb_levels(ej, p.ec_ghz, p.ng, n, count);
    while (n + 5 <= max_cutoff) {
        auto next = cpb_levels(ej, p.ec_ghz, p.ng, n + 5, count);
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - prev[i]));
        if (change < tol) return {prev, n};
        prev = std::move(next);
        n += 5;
    }
    fail(ErrorKind::TruncationNotConverged, "transmon_levels: no convergence up to cutoff " + std::to_string(max_cutoff));
}

struct F01Alpha {
    double f01_ghz;
    double alpha_ghz;
};

inline F01Alpha transmon_f01_anharmonicity(const TransmonParams& p) {
    auto lv = transmon_levels(p, 3).levels;
    return {lv[1] - lv[0], (lv[2] - lv[1]) - (lv[1] - lv[0])};
}

inline double transmon_f01_asymptotic(double ej, double ec) { return std::sqrt(8.0 * ej * ec) - ec; }

inline double charge_dispersion_wkb(int m, const TransmonParams& p) {
    validate(p);
    const double ej = ej_effective(p).ej_eff_ghz, ec = p.ec_ghz;
    if (m < 0) fail(ErrorKind::InvalidInput, "charge_dispersion_wkb: negative level");
    if (ej / ec <= 10.0) fail(ErrorKind::OutOfRegime, "charge_dispersion_wkb: requires EJ/EC > 10");
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * ec * std::pow(2.0, 4 * m + 5) / std::tgamma(m + 1.0) * std::sqrt(2.0 / constants::pi) *
           std::pow(ej / (2.0 * ec), m / 2.0 + 0.75) * std::exp(-std::sqrt(8.0 * ej / ec));
}

// Peak-to-peak charge dispersion of level m from diagonalization: E_m(ng=1/2) - E_m(ng=0).
inline double charge_dispersion_exact(int m, const TransmonParams& p) {
    TransmonParams a = p, b = p;
    a.ng = 0.5;
    b.ng = 0.0;
    auto la = transmon_levels(a, m + 1).levels, lb = transmon_levels(b, m + 1).levels;
    return la[m] - lb[m];
}

struct FluxPoint {
    double flux_phi0;
    double ej_eff_ghz;
    double f01_formula_ghz; // NaN when out of regime
    double f01_exact_ghz;
    bool out_of_regime;
};

inline std::vector<FluxPoint> f01_vs_flux(const TransmonParams& p, const std::vector<double>& flux_grid) {
    validate(p);
    std::vector<FluxPoint> out;
    out.reserve(flux_grid.size());
    for (double phi : flux_grid) {
        require_finite(phi, "f01_vs_flux");
        TransmonParams q = p;
        q.flux_phi0 = phi;
        const double ej = ej_effective(q).ej_eff_ghz;
        FluxPoint fp{phi, ej, std::nan(""), 0.0, false};
        // the asymptotic form needs EJ_eff/EC well above 1
        if (ej / p.ec_ghz < 1.0) fp.out_of_regime = true;
        else fp.f01_formula_ghz = transmon_f01_asymptotic(ej, p.ec_ghz);
        fp.f01_exact_ghz = transmon_f01_anharmonicity(q).f01_ghz;
        out.push_back(fp);
    }
    return out;
}

// Pure dephasing time in seconds for RMS flux noise amplitude A.
inline double tphi_flux_noise(const TransmonParams& p, const FluxNoiseParams& n, double phi) {
    validate(p);
    require_finite(phi, "tphi_flux_noise");
    if (!(n.a_phi0 > 0)) fail(ErrorKind::InvalidInput, "tphi_flux_noise: A must be positive");
    using namespace constants;
    const double ej_max = (p.ej1_ghz + p.ej2_ghz) * GHz * h;
    const double ec = p.ec_ghz * GHz * h;
    const double a_wb = n.a_phi0 * phi0;

    const double to_half = std::abs(phi - std::floor(phi) - 0.5);
    if (to_half < 1e-6) fail(ErrorKind::OutOfRegime, "tphi_flux_noise: too close to half flux");

    const double to_int = std::abs(phi - std::round(phi));
    if (to_int < 1e-12)
        return hbar * phi0 * phi0 / (a_wb * a_wb * std::pow(pi, 4) * std::sqrt(2.0 * ej_max * ec));

    const double x = pi * phi;
    const double st = std::abs(std::sin(x) * std::tan(x));
    return (hbar / a_wb) * (phi0 / pi) / std::sqrt(2.0 * ec * ej_max * st);
}

} // namespace cqedwb
