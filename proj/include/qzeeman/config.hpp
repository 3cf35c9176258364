#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qzeeman/atom.hpp"
#include "qzeeman/circuit.hpp"
#include "qzeeman/coils.hpp"
#include "qzeeman/fid.hpp"
#include "qzeeman/montecarlo.hpp"

// Declarative experiment configuration: a versioned JSON document merged
// over built-in defaults (the published pulser parameters), validated
// against every module's invariants before any computation starts.

namespace qzeeman {

struct SweepSection {
  std::vector<double> tau_list;  // s; empty -> generated grid
  double tau_min = 0.0;
  double tau_max = 1.2e-4;
  int tau_count = 61;
  std::vector<double> voltage_list{12.0, 24.0};
  std::vector<double> frequency_list{1.0e5, 1.4e5, 2.0e5, 3.26e5};
  int n_pi_max = 6;
  bool retune_capacitance = true;
  double tau_solve_max = 1e-3;

  std::vector<double> taus() const;
};

struct SignalSection {
  FidModel probe;      // chi, gamma, omega_l, v_r, v_i
  double a_scale = 1.0;
  double b_scale = 1.0;
  double noise_sigma = 0.0;
  int n_samples = 2000;
  double duration = 0.1;
  double fid_phi2 = 0.0;  // rad, phase used by the `fid` subcommand
};

struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 20260809;
  std::string output_dir = "out";
  AtomSpecies species = rb87();
  CircuitParams circuit;
  CoilGeometry coils;
  CellGeometry cell;
  EnsembleConfig montecarlo;  // species/cell/coils/circuit mirrored in
  SignalSection signal;
  SweepSection sweep;
  double field_per_ampere = -1.0;  // <= 0 -> coil-center value
  std::string mode = "motionless"; // or "montecarlo" for alpha-vs-tau

  double effective_field_per_ampere() const;
  void validate() const;
};

// Full default document (published pulser parameters).
nlohmann::json default_config_json();

// Strict parse: unknown keys and invariant violations throw
// std::invalid_argument with a JSON-path message.
ExperimentConfig parse_config(const nlohmann::json& user);

// Load from file; JSON syntax errors are reported with a line number.
ExperimentConfig load_config(const std::string& path);

// The effective (defaults-merged) document, for hashing and reruns.
nlohmann::json effective_config_json(const nlohmann::json& user);

// Apply a dotted-path override, e.g. "circuit.V_volts=24". The value is
// parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

std::string sha256_hex(const std::string& payload);

}  // namespace qzeeman
