#pragma once

#include <numbers>

// CODATA 2018 values, hard-coded so tabulated outputs are reproducible
// independent of the host math library's headers.
namespace cpcal::constants {

inline constexpr double epsilon0 = 8.8541878128e-12;  // vacuum permittivity [F/m]
inline constexpr double hbar = 1.054571817e-34;       // reduced Planck constant [J s]
inline constexpr double c_light = 299792458.0;        // speed of light [m/s]
inline constexpr double pi = std::numbers::pi;

}  // namespace cpcal::constants
