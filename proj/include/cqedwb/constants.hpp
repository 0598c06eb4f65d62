#pragma once

#include <numbers>

namespace cqedwb::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double h = two_pi * hbar;          // J s
inline constexpr double phi0 = 2.067833848e-15;     // Wb
inline constexpr double kB = 1.380649e-23;          // J/K
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi; // H/m

inline constexpr double GHz = 1e9;
inline constexpr double ns = 1e-9;

} // namespace cqedwb::constants
