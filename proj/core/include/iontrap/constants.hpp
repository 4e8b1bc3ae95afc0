#pragma once

namespace iontrap::constants {

// CODATA 2018 exact / recommended values, SI units throughout.
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double epsilon0 = 8.8541878128e-12;          // F/m
inline constexpr double mu0 = 1.25663706212e-6;               // N/A^2
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double boltzmann = 1.380649e-23;             // J/K
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double electron_volt = elementary_charge;    // J

// 1 / (4 pi eps0)
inline constexpr double coulomb = 1.0 / (4.0 * pi * epsilon0);

} // namespace iontrap::constants
