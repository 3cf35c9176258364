#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

// Atomic species data, exact ground-state level energies in a magnetic
// field, and the linear/quadratic contributions to the Larmor frequency.

namespace qzeeman {

struct AtomSpecies {
  double nuclear_spin = 0.0;        // I, half-integer
  double g_i = 0.0;                 // nuclear g-factor (Bohr-magneton units)
  double g_j = 0.0;                 // electronic Lande factor
  double hyperfine_splitting = 0.0; // Delta E_hfs, J
  double mass = 0.0;                // kg
  std::string name;

  void validate() const;  // throws std::invalid_argument on bad fields
};

// Built-in 87Rb preset. g-factors and mass are standard reference values
// (Steck, "Rubidium 87 D Line Data"); the hyperfine splitting is the exact
// defined value of the 87Rb ground-state clock transition.
AtomSpecies rb87();

// Load a species from JSON keys {name, I, gI, gJ, dE_hfs_Hz, mass_u}.
AtomSpecies species_from_json(const nlohmann::json& j);

struct ZeemanCoefficients {
  double omega1_per_b = 0.0;   // rad s^-1 T^-1
  double omega2_per_b2 = 0.0;  // rad s^-1 T^-2
  int sign = +1;               // hyperfine branch F = I +/- 1/2
};

// Exact level energy E(F, m_F, B) of the ground-state hyperfine manifold.
// Stretched states are evaluated through the collapsed perfect-square form
// so no sign ambiguity arises at large fields. Negative B is allowed.
double breit_rabi_energy(const AtomSpecies& species, double f_total,
                         double m_f, double b_field);

// Second-order expansion coefficients of the level splitting. The nuclear
// term is dropped here (g_I << g_J); it is retained in breit_rabi_energy.
ZeemanCoefficients zeeman_coefficients(const AtomSpecies& species,
                                       int branch = -1);

struct LarmorFrequencies {
  double omega1 = 0.0;  // rad/s, sign follows B
  double omega2 = 0.0;  // rad/s, always >= 0
};

LarmorFrequencies larmor_frequencies(const ZeemanCoefficients& coeffs,
                                     double b_field);

}  // namespace qzeeman
