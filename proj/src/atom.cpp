#include "qzeeman/atom.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qzeeman/constants.hpp"

namespace qzeeman {

namespace {

bool is_half_integer(double x) {
  return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9;
}

}  // namespace

void AtomSpecies::validate() const {
  if (!(nuclear_spin > 0.0) || !is_half_integer(nuclear_spin))
    throw std::invalid_argument("species: I must be a positive half-integer");
  if (!(hyperfine_splitting > 0.0))
    throw std::invalid_argument("species: hyperfine splitting must be > 0");
  if (!(mass > 0.0)) throw std::invalid_argument("species: mass must be > 0");
}

AtomSpecies rb87() {
  AtomSpecies s;
  s.nuclear_spin = 1.5;
  s.g_i = -0.0009951414;
  s.g_j = 2.00233113;
  s.hyperfine_splitting = constants::planck * 6.834682610904e9;
  s.mass = 86.909180527 * constants::atomic_mass_unit;
  s.name = "87Rb";
  return s;
}

AtomSpecies species_from_json(const nlohmann::json& j) {
  AtomSpecies s;
  s.name = j.at("name").get<std::string>();
  s.nuclear_spin = j.at("I").get<double>();
  s.g_i = j.at("gI").get<double>();
  s.g_j = j.at("gJ").get<double>();
  s.hyperfine_splitting = constants::planck * j.at("dE_hfs_Hz").get<double>();
  s.mass = j.at("mass_u").get<double>() * constants::atomic_mass_unit;
  s.validate();
  return s;
}

double breit_rabi_energy(const AtomSpecies& species, double f_total,
                         double m_f, double b_field) {
  species.validate();
  const double i_spin = species.nuclear_spin;
  const double f_upper = i_spin + 0.5;
  const double f_lower = i_spin - 0.5;

  int branch = 0;
  if (std::abs(f_total - f_upper) < 1e-9) {
    branch = +1;
  } else if (f_lower > 0.0 && std::abs(f_total - f_lower) < 1e-9) {
    branch = -1;
  } else {
    throw std::domain_error("breit_rabi_energy: F must be I +/- 1/2");
  }
  if (std::abs(m_f) > f_total + 1e-9 ||
      std::abs(std::remainder(f_total - m_f, 1.0)) > 1e-9)
    throw std::domain_error("breit_rabi_energy: invalid m_F for this F");

  const double de = species.hyperfine_splitting;
  const double two_i_plus_1 = 2.0 * i_spin + 1.0;
  const double x =
      (species.g_j + species.g_i) * constants::bohr_magneton * b_field / de;

  const double scalar = -de / (2.0 * two_i_plus_1);
  const double nuclear = species.g_i * constants::bohr_magneton * m_f * b_field;

  double root;
  if (std::abs(std::abs(m_f) - f_upper) < 1e-9) {
    // Stretched state: the argument is a perfect square (1 +/- x)^2.
    root = std::abs(1.0 + (m_f > 0 ? x : -x));
  } else {
    root = std::sqrt(1.0 + 4.0 * m_f * x / two_i_plus_1 + x * x);
  }
  return scalar + nuclear + branch * 0.5 * de * root;
}

ZeemanCoefficients zeeman_coefficients(const AtomSpecies& species, int branch) {
  species.validate();
  if (branch != +1 && branch != -1)
    throw std::domain_error("zeeman_coefficients: branch must be +1 or -1");
  const double two_i_plus_1 = 2.0 * species.nuclear_spin + 1.0;
  const double gj_mub = species.g_j * constants::bohr_magneton;
  ZeemanCoefficients c;
  c.omega1_per_b = gj_mub / (two_i_plus_1 * constants::hbar);
  c.omega2_per_b2 = gj_mub * gj_mub /
                    (species.hyperfine_splitting * two_i_plus_1 * two_i_plus_1 *
                     constants::hbar);
  c.sign = branch;
  return c;
}

LarmorFrequencies larmor_frequencies(const ZeemanCoefficients& coeffs,
                                     double b_field) {
  return {coeffs.omega1_per_b * b_field,
          coeffs.omega2_per_b2 * b_field * b_field};
}

}  // namespace qzeeman
