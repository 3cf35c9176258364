#pragma once

// Physical constants, CODATA 2018 recommended values
// (https://physics.nist.gov/cuu/Constants/).

namespace qzeeman::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double planck = 6.62607015e-34;           // h, J s (exact)
inline constexpr double hbar = planck / two_pi;             // J s
inline constexpr double bohr_magneton = 9.2740100783e-24;   // mu_B, J/T
inline constexpr double boltzmann = 1.380649e-23;           // k_B, J/K (exact)
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // u, kg
inline constexpr double vacuum_permeability = 1.25663706212e-6;  // mu_0, N/A^2

inline constexpr double gauss_to_tesla = 1e-4;
inline constexpr double tesla_to_gauss = 1e4;

inline constexpr double celsius_to_kelvin(double t_c) { return t_c + 273.15; }

}  // namespace qzeeman::constants
