#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "numkit.hpp"

namespace cqedwb {

struct Rotation {
    Eigen::Vector3d axis{1.0, 0.0, 0.0};
    double angle = 0.0;
};

inline Rotation rot_x(double angle) { return {{1, 0, 0}, angle}; }
inline Rotation rot_y(double angle) { return {{0, 1, 0}, angle}; }
inline Rotation rot_z(double angle) { return {{0, 0, 1}, angle}; }
inline Rotation rot_id() { return {{1, 0, 0}, 0.0}; }

// Exact trig values at multiples of pi/4 keep ideal sequences free of rounding.
inline double exact_cos(double x) {
    const double q = x / (constants::pi / 4);
    if (std::abs(q - std::round(q)) < 1e-15) {
        static constexpr std::array<double, 8> table{1.0, std::numbers::sqrt2 / 2, 0.0, -std::numbers::sqrt2 / 2,
                                                     -1.0, -std::numbers::sqrt2 / 2, 0.0, std::numbers::sqrt2 / 2};
        long k = static_cast<long>(std::round(q)) % 8;
        if (k < 0) k += 8;
        return table[static_cast<std::size_t>(k)];
    }
    return std::cos(x);
}

inline double exact_sin(double x) { return exact_cos(x - constants::pi / 2); }

inline ComplexMatrix rotation_unitary(const Rotation& r) {
    require_finite(r.angle, "rotation_unitary");
    const double nrm = r.axis.norm();
    if (std::abs(nrm - 1.0) > 1e-12) fail(ErrorKind::InvalidInput, "rotation_unitary: axis must be a unit vector");
    const double c = exact_cos(r.angle / 2), s = exact_sin(r.angle / 2);
    ComplexMatrix u = c * pauli('I');
    u -= I_unit * s * (r.axis.x() * pauli('X') + r.axis.y() * pauli('Y') + r.axis.z() * pauli('Z'));
    return u;
}

// Excited-state probability under H = (Omega/2) sigma_x, Omega in GHz, t in ns.
inline std::vector<double> rabi_trace(double omega_ghz, const std::vector<double>& t_ns) {
    std::vector<double> out;
    out.reserve(t_ns.size());
    for (double t : t_ns) {
        const double s = std::sin(constants::pi * omega_ghz * t);
        out.push_back(s * s);
    }
    return out;
}

struct PulseErrorModel {
    double power_db = 0.0;
    double detuning_frac = 0.0; // dimensionless epsilon
    double skew_rad = 0.0;
    double amp_imbalance = 0.0;
};

// Power error in dB that over-rotates a pi/2 pulse by eps radians.
inline double power_db_from_epsilon(double eps) {
    return 20.0 * std::log10(1.0 + 2.0 * eps / constants::pi);
}

// Effective rotation produced by a pulse under the error model.
inline Rotation error_rotation(const Rotation& r, const PulseErrorModel& e) {
    const Eigen::Vector3d n = r.axis;
    const double nx = n.x(), ny = n.y();
    // virtual z rotations and idles are frame updates
    if (std::hypot(nx, ny) <= 1e-12 || r.angle == 0.0) return r;
    double theta = r.angle * std::pow(10.0, e.power_db / 20.0);
    theta *= std::hypot(nx * (1.0 + e.amp_imbalance), ny) / std::hypot(nx, ny);
    // y axis skewed towards x
    Eigen::Vector3d m(nx * (1.0 + e.amp_imbalance) + ny * std::sin(e.skew_rad), ny * std::cos(e.skew_rad), n.z());
    m.normalize();
    // detuning adds a fixed z field over the pulse duration
    const Eigen::Vector3d field = theta * m + Eigen::Vector3d(0, 0, constants::pi / 2 * e.detuning_frac);
    const double angle = field.norm();
    if (angle == 0.0) return rot_id();
    return {field / angle, angle};
}

inline ComplexMatrix apply_error(const Rotation& r, const PulseErrorModel& e) {
    return rotation_unitary(error_rotation(r, e));
}

// Bloch-vector image of a rotation (Rodrigues), exact at multiples of pi/4.
inline Eigen::Vector3d rotate_bloch(const Rotation& r, const Eigen::Vector3d& v) {
    const double c = exact_cos(r.angle), s = exact_sin(r.angle);
    const Eigen::Vector3d& n = r.axis;
    return c * v + s * n.cross(v) + (1.0 - c) * n.dot(v) * n;
}

struct AllXYPulse {
    const char* label;
    Rotation rot;
};

inline AllXYPulse allxy_pulse(const std::string& label) {
    const double pi = constants::pi;
    if (label == "Id") return {"Id", rot_id()};
    if (label == "Xp") return {"Xp", rot_x(pi)};
    if (label == "Yp") return {"Yp", rot_y(pi)};
    if (label == "X9") return {"X9", rot_x(pi / 2)};
    if (label == "Y9") return {"Y9", rot_y(pi / 2)};
    fail(ErrorKind::InvalidInput, "allxy_pulse: unknown pulse " + label);
}

inline const std::array<std::pair<const char*, const char*>, 21>& allxy_sequence() {
    static const std::array<std::pair<const char*, const char*>, 21> seq{{
        {"Id", "Id"}, {"Xp", "Xp"}, {"Yp", "Yp"}, {"Xp", "Yp"}, {"Yp", "Xp"},
        {"X9", "Id"}, {"Y9", "Id"}, {"X9", "Y9"}, {"Y9", "X9"}, {"X9", "Yp"}, {"Y9", "Xp"},
        {"Xp", "Y9"}, {"Yp", "X9"}, {"X9", "Xp"}, {"Xp", "X9"}, {"Y9", "Yp"}, {"Yp", "Y9"},
        {"Xp", "Id"}, {"Yp", "Id"}, {"X9", "X9"}, {"Y9", "Y9"},
    }};
    return seq;
}

struct AllXYResult {
    std::vector<std::string> labels;
    std::vector<double> z;
    std::vector<double> ideal;
};

inline AllXYResult allxy_simulate(const PulseErrorModel& e) {
    AllXYResult res;
    const Eigen::Vector3d north(0, 0, 1);
    for (const auto& [first, second] : allxy_sequence()) {
        const auto p1 = allxy_pulse(first), p2 = allxy_pulse(second);
        const Eigen::Vector3d v = rotate_bloch(error_rotation(p2.rot, e), rotate_bloch(error_rotation(p1.rot, e), north));
        const Eigen::Vector3d ideal = rotate_bloch(p2.rot, rotate_bloch(p1.rot, north));
        res.labels.push_back(std::string(first) + "," + second);
        res.z.push_back(v.z());
        res.ideal.push_back(ideal.z());
    }
    return res;
}

// Leading-order d<z>/d(eps) per sequence.
inline const std::array<double, 21>& allxy_power_syndrome() {
    static const std::array<double, 21> v{0, 0, 0, 0, 0, -1, -1, 0, 0, 1, 1, 1, 1, 3, 3, 3, 3, 0, 0, 0, 0};
    return v;
}

inline const std::array<double, 21>& allxy_detuning_syndrome() {
    static const std::array<double, 21> v{0, 0, 0, 0, 0, 0, 0, -2, 2, -1, 1, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    return v;
}

struct SyndromeFit {
    double power;    // estimated eps for power
    double detuning; // estimated eps for detuning
    double residual; // norm of the unexplained deviation
};

inline SyndromeFit allxy_syndrome_fit(const AllXYResult& r) {
    if (r.z.size() != 21 || r.ideal.size() != 21) fail(ErrorKind::DimMismatch, "allxy_syndrome_fit: need 21 sequences");
    Eigen::Matrix<double, 21, 2> a;
    Eigen::Matrix<double, 21, 1> d;
    for (int i = 0; i < 21; ++i) {
        a(i, 0) = allxy_power_syndrome()[static_cast<std::size_t>(i)];
        a(i, 1) = allxy_detuning_syndrome()[static_cast<std::size_t>(i)];
        d(i) = r.z[static_cast<std::size_t>(i)] - r.ideal[static_cast<std::size_t>(i)];
    }
    const double cosang = std::abs(a.col(0).dot(a.col(1))) / (a.col(0).norm() * a.col(1).norm());
    if (cosang > 1.0 - 1e-6) fail(ErrorKind::DegenerateBasis, "allxy_syndrome_fit: syndrome vectors are parallel");
    Eigen::Vector2d c = a.colPivHouseholderQr().solve(d);
    return {c(0), c(1), (d - a * c).norm()};
}

} // namespace cqedwb
