#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "numkit.hpp"

namespace cqedwb {

// Frequencies are given in GHz (linear) and converted to angular rates inside.
struct ReadoutParams {
    double eps_rf = 0.01;       // sqrt(photons)/ns
    double delta_rf_ghz = 0.0;  // drive detuning from the bare cavity
    double chi_ghz = 0.001;
    double kappa_in_ghz = 0.0025;
    double kappa_out_ghz = 0.0025;
    double t1_s = 3e-6;
    double n_bar = 10.0;
    double tn_K = 10.0;
    double omega_r_ghz = 8.0;
};

struct BrightStateParams {
    double g_ghz = 0.1;
    double delta_ghz = 1.0; // qubit-cavity detuning
    double kappa_ghz = 0.001;
    double omega_r_ghz = 8.0;
    int sigma_z = 1;
};

inline std::complex<double> dispersive_alpha(const ReadoutParams& p, int qubit) {
    if (qubit != 1 && qubit != -1) fail(ErrorKind::InvalidInput, "dispersive_alpha: qubit must be +1 or -1");
    for (double v : {p.eps_rf, p.delta_rf_ghz, p.chi_ghz, p.kappa_in_ghz, p.kappa_out_ghz})
        require_finite(v, "dispersive_alpha");
    using constants::two_pi;
    const double kappa = two_pi * (p.kappa_in_ghz + p.kappa_out_ghz);
    const double det = two_pi * (p.delta_rf_ghz + qubit * p.chi_ghz);
    return p.eps_rf / std::complex<double>(kappa / 2.0, det);
}

inline double distinguishability(const ReadoutParams& p) {
    return std::exp(-std::norm(dispersive_alpha(p, 1) - dispersive_alpha(p, -1)));
}

inline double measurement_snr(const ReadoutParams& p) {
    for (double v : {p.n_bar, p.omega_r_ghz, p.chi_ghz, p.t1_s, p.tn_K}) require_finite(v, "measurement_snr");
    if (p.t1_s <= 0 || p.n_bar < 0 || p.tn_K <= 0) fail(ErrorKind::InvalidInput, "measurement_snr: bad parameters");
    using namespace constants;
    const double omega_r = two_pi * p.omega_r_ghz * GHz;
    const double kappa = two_pi * (p.kappa_in_ghz + p.kappa_out_ghz) * GHz;
    const double theta = std::atan(2.0 * two_pi * p.chi_ghz * GHz / kappa);
    const double s = std::sin(theta);
    return p.n_bar * hbar * omega_r * s * s * p.t1_s * kappa / (kB * p.tn_K);
}

inline double chi_of_amplitude(const BrightStateParams& b, double a2) {
    const double arg = 2.0 * b.g_ghz * b.g_ghz * (a2 + b.sigma_z) + b.delta_ghz * b.delta_ghz;
    if (!(arg > 0)) fail(ErrorKind::DomainError, "chi_of_amplitude: square-root argument not positive");
    return b.sigma_z * b.g_ghz * b.g_ghz / std::sqrt(arg);
}

struct BrightRoot {
    double a2;
    bool stable;
};

// Fixed-point residual A^2 - F(A^2) of the semiclassical amplitude equation, angular units.
inline double bright_state_residual(const BrightStateParams& b, double xi, double omega_d_ghz, double a2) {
    using constants::two_pi;
    const double wr = two_pi * b.omega_r_ghz, wd = two_pi * omega_d_ghz, k = two_pi * b.kappa_ghz;
    const double chi = two_pi * chi_of_amplitude(b, a2);
    const double x = two_pi * xi;
    const double det = wd * wd - (wr - chi) * (wr - chi);
    return a2 - wr * wr * x * x / (det * det + k * k * wd * wd);
}

inline std::vector<BrightRoot> bright_state_solve(const BrightStateParams& b, double xi, double omega_d_ghz,
                                                  double a2_max = 1e4, int scan_points = 2000,
                                                  int max_iter = 200, double tol = 1e-10) {
    for (double v : {b.g_ghz, b.delta_ghz, b.kappa_ghz, b.omega_r_ghz, xi, omega_d_ghz})
        require_finite(v, "bright_state_solve");
    if (xi < 0) fail(ErrorKind::InvalidInput, "bright_state_solve: xi must be >= 0");
    if (!(b.g_ghz > 0)) fail(ErrorKind::InvalidInput, "bright_state_solve: g must be positive");
    if (b.sigma_z != 1 && b.sigma_z != -1) fail(ErrorKind::InvalidInput, "bright_state_solve: sigma_z must be +-1");

    // grid: 0 followed by log-spaced points up to a2_max
    std::vector<double> grid{0.0};
    const double lo = std::log10(a2_max) - 12.0, hi = std::log10(a2_max);
    for (int i = 0; i < scan_points - 1; ++i) grid.push_back(std::pow(10.0, lo + (hi - lo) * i / (scan_points - 2)));

    auto res = [&](double a2) -> double {
        try {
            return bright_state_residual(b, xi, omega_d_ghz, a2);
        } catch (const Error&) {
            return std::nan("");
        }
    };

    std::vector<double> roots;
    double prev_x = grid[0], prev_r = res(prev_x);
    if (prev_r == 0.0) roots.push_back(prev_x);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i], r = res(x);
        if (r == 0.0) roots.push_back(x);
        else if (std::isfinite(prev_r) && std::isfinite(r) && prev_r != 0.0 && (prev_r < 0) != (r < 0)) {
            double a = prev_x, fa = prev_r, c = x;
            double mid = 0.5 * (a + c), fm = res(mid);
            for (int it = 0; it < max_iter; ++it) {
                mid = 0.5 * (a + c);
                fm = res(mid);
                if (fm == 0.0 || c - a <= 1e-300) break;
                if ((fa < 0) == (fm < 0)) { a = mid; fa = fm; }
                else c = mid;
            }
            if (std::abs(fm) > tol * std::max(1.0, mid))
                fail(ErrorKind::NoConvergence, "bright_state_solve: bisection residual too large");
            roots.push_back(mid);
        }
        prev_x = x;
        prev_r = r;
    }

    std::vector<BrightRoot> out;
    for (std::size_t i = 0; i < roots.size(); ++i) out.push_back({roots[i], !(roots.size() == 3 && i == 1)});
    return out;
}

} // namespace cqedwb
