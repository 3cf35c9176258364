#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qzeeman/atom.hpp"
#include "qzeeman/circuit.hpp"
#include "qzeeman/coils.hpp"
#include "qzeeman/rng.hpp"
#include "qzeeman/spin.hpp"

// Thermal-motion dephasing: ballistic atoms bouncing around the spherical
// cell while the pulser field oscillates. Linear precession is applied as
// spin-1 rotations about the instantaneous local field; the quadratic phase
// accumulates from the axial field component and is applied as a single
// operator at the end of the pulse (or interleaved, behind a flag).

namespace qzeeman {

struct CellGeometry {
  double radius = 0.0185;                 // m
  Eigen::Vector3d center{0.0, 0.0, 0.0};  // m

  void validate() const;
};

struct Particle {
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // m
  Eigen::Vector3d velocity{0.0, 0.0, 0.0};  // m/s
  SpinState spin;
  double phi2_accum = 0.0;  // rad
};

struct EnsembleConfig {
  int n_particles = 10000;
  double temperature = 311.15;  // K
  AtomSpecies species = rb87();
  CellGeometry cell;
  CoilGeometry coils;
  CircuitParams circuit;
  std::uint64_t rng_seed = 1;
  int steps_per_cycle = 200;

  bool homogeneous_field = false;    // override b(r) by b(center)
  bool linear_full_vector = true;    // false: axial field component only
  bool interleaved_quadratic = false;
  bool cosine_law_walls = false;     // default: uniform inward hemisphere
  double evolution_window = -1.0;    // s past pulse end; <0 -> 10/damping
  int threads = 1;

  void validate() const;
};

// Position uniform in the cell, Maxwell-Boltzmann velocity, spin |1>_x.
Particle sample_initial(const EnsembleConfig& config, Rng& rng);

// Ballistic flight for dt with exact sphere-wall bounces; the speed is
// preserved and the outgoing direction is redrawn at each wall hit.
void propagate(Particle& particle, double dt, const CellGeometry& cell,
               Rng& rng, bool cosine_law = false);

struct EnsembleResult {
  std::vector<SpinState> states;  // final states, particle index order
  Eigen::Matrix3cd density;       // ensemble-averaged density matrix
  double tau = 0.0;               // pulse length used
};

// Evolve the whole ensemble through one pulse. The field map and trace
// must be prepared for the config's coil geometry and circuit parameters.
EnsembleResult evolve_pulse(const EnsembleConfig& config,
                            const CurrentTrace& trace,
                            const AxisymmetricFieldMap& map);

// Convenience overload that prepares the trace and map itself.
EnsembleResult evolve_pulse(const EnsembleConfig& config);

// Build the lookup map sized for the config's cell.
AxisymmetricFieldMap build_field_map(const EnsembleConfig& config);

// Mean and standard error of <alpha_R> after the quarter rotation about x.
struct AmplitudeStats {
  double mean = 0.0;
  double std_err = 0.0;
};
AmplitudeStats ensemble_alpha_r(const std::vector<SpinState>& states,
                                double a_scale = 1.0);

struct DephasingPoint {
  double frequency = 0.0;  // Hz
  int n_pi = 0;
  double amplitude = 0.0;
  double std_err = 0.0;
  double tau = 0.0;        // s, solved pulse length
  bool reached = true;     // false when phi2 = n pi is unreachable
};

// Fig.-7-style table: for each drive frequency, solve pulse lengths giving
// a center-of-cell quadratic phase of n*pi (capacitance retuned so the
// drive sits on the circuit resonance), then measure the ensemble
// amplitude. Deterministic for a fixed seed at any thread count.
std::vector<DephasingPoint> dephasing_curve(const EnsembleConfig& base,
                                            const std::vector<double>& frequencies,
                                            int n_max, double a_scale = 1.0,
                                            double tau_max = 1e-3,
                                            bool retune_capacitance = true);

// Pulse length with center-of-cell phi2 equal to the target (bisection).
// Returns a negative value when the target is unreachable within tau_max.
double solve_tau_for_phi2(const CircuitParams& params, double field_per_ampere,
                          const ZeemanCoefficients& coeffs, double target,
                          double tau_max);

}  // namespace qzeeman
