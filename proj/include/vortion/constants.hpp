#pragma once

// CODATA 2018 values. All derived quantities in the library flow from this
// table; nothing downstream hard-codes a dimensional constant.

namespace vortion::constants {

inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;    // kg
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace vortion::constants
