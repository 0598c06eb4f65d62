#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "numkit.hpp"

namespace cqedwb {

// SI units throughout.
struct FblGeometry {
    double seg_len_L_m = 500e-6;
    double dist_D_m = 400e-6;
    double width_W_m = 100e-6;
    double height_H_m = 100e-6;
    double altitude_A_m = 0.0;
    double offset_O_m = 0.0;
    double current_I_A = 1e-3;
    double plate_gap_w_m = 1e-3;
};

struct FblCircuit {
    double cc_F = 0.25e-15;
    double csigma_F = 40e-15;
    double ls_H = 0.5e-9;
    double cg_F = 0.0;
    double cs_F = 0.0;
    double lf_H = 0.0;
    double z0_ohm = 50.0;
};

inline double segment_field(const FblGeometry& g, double x_m, double y_m) {
    if (std::abs(y_m) < 1e-12) fail(ErrorKind::OnWire, "segment_field: point lies on the wire");
    const double a = g.seg_len_L_m / 2 - x_m, b = g.seg_len_L_m / 2 + x_m;
    return constants::mu0 * g.current_I_A / (4 * constants::pi * y_m) *
           (a / std::hypot(a, y_m) + b / std::hypot(b, y_m));
}

namespace detail {
// Antiderivative in u and y of the segment field; even in u.
inline double flux_antiderivative(double u, double y) {
    return std::hypot(u, y) - u * std::asinh(u / y);
}
} // namespace detail

// Flux through a W x H loop centred on a segment of length L at distance D.
// A negative W returns the negated flux.
inline double flux_f(double L, double D, double W, double H, double I) {
    if (!(D > 0)) fail(ErrorKind::InvalidInput, "flux_f: D must be positive");
    const double u1 = (L - W) / 2, u2 = (L + W) / 2;
    using detail::flux_antiderivative;
    const double s = flux_antiderivative(u2, D + H) - flux_antiderivative(u2, D) - flux_antiderivative(u1, D + H) +
                     flux_antiderivative(u1, D);
    return constants::mu0 * I / (2 * constants::pi) * s;
}

inline double flux_f(const FblGeometry& g) {
    return flux_f(g.seg_len_L_m, g.dist_D_m, g.width_W_m, g.height_H_m, g.current_I_A);
}

inline double flux_g_altitude(const FblGeometry& g) {
    if (g.altitude_A_m < 0) fail(ErrorKind::InvalidInput, "flux_g_altitude: A must be >= 0");
    const double d = std::hypot(g.dist_D_m, g.altitude_A_m);
    const double h = std::hypot(g.dist_D_m + g.height_H_m, g.altitude_A_m) - d;
    return flux_f(g.seg_len_L_m, d, g.width_W_m, h, g.current_I_A);
}

inline double flux_h_offset(const FblGeometry& g) {
    if (g.offset_O_m < 0) fail(ErrorKind::InvalidInput, "flux_h_offset: O must be >= 0");
    const double L = g.seg_len_L_m, D = g.dist_D_m, W = g.width_W_m, H = g.height_H_m, O = g.offset_O_m;
    const double I = g.current_I_A;
    if (W < 2 * O) return 0.5 * (flux_f(L, D, W + 2 * O, H, I) + flux_f(L, D, W - 2 * O, H, I));
    return 0.5 * (flux_f(L, D, W + 2 * O, H, I) - flux_f(L, D, 2 * O - W, H, I));
}

// Fraction of the direct flux carried by one mirror image at the given height.
inline double image_flux_fraction(const FblGeometry& g, double image_height_m) {
    FblGeometry im = g;
    im.altitude_A_m = image_height_m;
    return flux_g_altitude(im) / flux_f(g);
}

enum class ScreeningMethod { sum, fit };

struct ScreeningSum {
    double value;
    long terms;
};

inline ScreeningSum screening_sum(double d_m, double w_m, double tol = 1e-10) {
    if (!(d_m > 0 && w_m > 0)) fail(ErrorKind::InvalidInput, "screening_G: d and w must be positive");
    const double r = w_m / d_m;
    auto term = [r](long n) { return 1.0 / ((n * r) * (n * r) + 1.0); };
    // alternating remainder after N pairs is bounded by 2*term(N+1)
    long n_max = 50;
    const double need = std::sqrt(std::max(2.0 / tol - 1.0, 0.0)) / r;
    if (need > static_cast<double>(n_max)) n_max = static_cast<long>(std::ceil(need));
    // smallest terms first, then repeated averaging of the last partial sums to cancel the tail
    constexpr int k_avg = 24;
    const long head = n_max - k_avg;
    double s = 0.0;
    for (long n = head; n >= 1; --n) s += (n % 2 == 0 ? 2.0 : -2.0) * term(n);
    std::vector<double> partial;
    for (long n = head + 1; n <= n_max + 1; ++n) {
        s += (n % 2 == 0 ? 2.0 : -2.0) * term(n);
        partial.push_back(1.0 + s);
    }
    while (partial.size() > 1) {
        for (std::size_t i = 0; i + 1 < partial.size(); ++i) partial[i] = 0.5 * (partial[i] + partial[i + 1]);
        partial.pop_back();
    }
    return {partial[0], n_max};
}

inline double screening_G(double d_m, double w_m, ScreeningMethod method = ScreeningMethod::sum) {
    if (method == ScreeningMethod::sum) return screening_sum(d_m, w_m).value;
    if (!(d_m > 0 && w_m > 0)) fail(ErrorKind::InvalidInput, "screening_G: d and w must be positive");
    const double sigma = 0.955 * constants::pi * constants::pi / 24.0;
    const double c = std::cosh(d_m / (2 * w_m * sigma));
    return 1.0 / (c * c);
}

// Current (A) that threads target_phi0 flux quanta, screening evaluated at the loop centroid.
inline double required_current(const FblGeometry& g, double target_phi0, bool screened = true,
                               ScreeningMethod method = ScreeningMethod::sum) {
    FblGeometry unit = g;
    unit.current_I_A = 1.0;
    double per_amp = flux_f(unit);
    if (screened) per_amp *= screening_G(g.dist_D_m + g.height_H_m / 2, g.plate_gap_w_m, method);
    if (!(per_amp > 0)) fail(ErrorKind::InvalidInput, "required_current: non-positive coupling");
    return target_phi0 * constants::phi0 / per_amp;
}

struct T1Result {
    double t1_s;
    bool infinite;
};

inline T1Result t1_from_admittance(double csigma_F, double reY_S) {
    require_finite(csigma_F, "t1_from_admittance");
    require_finite(reY_S, "t1_from_admittance");
    if (reY_S < 1e-30) return {std::numeric_limits<double>::infinity(), true};
    return {csigma_F / reY_S, false};
}

struct ModeAdmittance {
    double reY_common;
    double reY_diff;
};

namespace detail {
using zc = std::complex<double>;

inline zc checked(zc z, const char* where) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1e30)
        fail(ErrorKind::SingularNetwork, std::string(where) + ": impedance magnitude exceeds 1e30");
    return z;
}

inline zc inv(zc z, const char* where) {
    if (std::abs(z) < 1e-30) fail(ErrorKind::SingularNetwork, std::string(where) + ": division by zero impedance");
    return checked(1.0 / z, where);
}
} // namespace detail

inline void validate(const FblCircuit& c) {
    for (double v : {c.cc_F, c.csigma_F, c.ls_H, c.cg_F, c.cs_F, c.lf_H, c.z0_ohm}) {
        require_finite(v, "FblCircuit");
        if (v < 0) fail(ErrorKind::InvalidInput, "FblCircuit: negative component");
    }
    if (!(c.z0_ohm > 0)) fail(ErrorKind::InvalidInput, "FblCircuit: z0 must be positive");
}

// omega in rad/s.
inline ModeAdmittance fbl_unfiltered_Y(const FblCircuit& c, double omega) {
    validate(c);
    if (!(omega > 0)) fail(ErrorKind::InvalidInput, "fbl_unfiltered_Y: omega must be positive");
    using detail::zc;
    using detail::inv;
    const zc j(0.0, 1.0);
    const zc zcc = inv(j * omega * c.cc_F, "fbl_unfiltered_Y");
    const zc z_com = 0.5 * (c.z0_ohm + zcc);
    const zc z_par = inv(1.0 / c.z0_ohm + inv(j * omega * c.ls_H / 2.0, "fbl_unfiltered_Y"), "fbl_unfiltered_Y");
    const zc z_dif = 2.0 * (z_par + zcc);
    return {inv(z_com, "fbl_unfiltered_Y").real(), inv(z_dif, "fbl_unfiltered_Y").real()};
}

inline ModeAdmittance fbl_filtered_Y(const FblCircuit& c, double omega) {
    validate(c);
    if (!(omega > 0)) fail(ErrorKind::InvalidInput, "fbl_filtered_Y: omega must be positive");
    using detail::zc;
    using detail::inv;
    using detail::checked;
    const char* w = "fbl_filtered_Y";
    const zc j(0.0, 1.0);
    const zc zcc = inv(j * omega * c.cc_F, w);
    const zc zlf = checked(j * omega * c.lf_H, w);
    const zc z_com = 0.5 * (inv(1.0 / c.z0_ohm + j * omega * c.cg_F, w) + zlf + zcc);
    const zc inner = inv(1.0 / c.z0_ohm + j * omega * (c.cg_F + 2 * c.cs_F), w) + zlf;
    const zc z_dif = 2.0 * inv(inv(inner, w) + inv(j * omega * c.ls_H / 2.0, w), w) + 2.0 * zcc;
    return {inv(checked(z_com, w), w).real(), inv(checked(z_dif, w), w).real()};
}

inline double purcell_single_mode(double g, double delta, double kappa) {
    for (double v : {g, delta, kappa}) require_finite(v, "purcell_single_mode");
    if (delta == 0.0) fail(ErrorKind::Divergent, "purcell_single_mode: zero detuning");
    return (g / delta) * (g / delta) * kappa;
}

} // namespace cqedwb
