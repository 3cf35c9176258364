#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qzeeman/atom.hpp"
#include "qzeeman/circuit.hpp"
#include "qzeeman/rng.hpp"

// Probe-stage polarization-rotation transient: synthesis of
//   delta_alpha(t) = chi e^{-gamma t} [ alpha_R V_R sin(2 Omega_L t)
//                    + alpha_I V_R cos(2 Omega_L t) - beta V_I ]
// and damped least-squares recovery of its parameters. Only the products
// chi * <..> * V are identifiable; fits therefore run with chi, V_R, V_I
// frozen unless the caller chooses otherwise.

namespace qzeeman {

struct FidModel {
  double chi = 1.0;      // overall rotation scale, rad
  double gamma = 0.0;    // decay rate, 1/s
  double omega_l = 0.0;  // probe-stage Larmor frequency, rad/s
  double alpha_r = 0.0;
  double alpha_i = 0.0;
  double beta = 0.0;
  double v_r = 1.0;      // lineshape factors at fixed detuning
  double v_i = 1.0;

  static constexpr int n_params = 8;
  static const std::array<const char*, n_params>& param_names();
  double param(int idx) const;
  void set_param(int idx, double value);

  double evaluate(double t) const;
};

// Model plus white Gaussian noise of the given standard deviation.
std::vector<double> synthesize_fid(const FidModel& model,
                                   const std::vector<double>& times,
                                   double noise_sigma, Rng& rng);

// Frequency (Hz) of the periodogram peak; seeds the Omega_L guess.
double spectral_peak_frequency(const std::vector<double>& times,
                               const std::vector<double>& values);

struct FitResult {
  FidModel model;
  double residual_rms = 0.0;
  std::array<double, FidModel::n_params> std_errors{};  // 0 for frozen
  bool converged = false;
  int iterations = 0;
};

// Levenberg-Marquardt over the non-frozen parameters with the analytic
// Jacobian. A non-positive omega_l guess (when free) is seeded from the
// spectrum. Non-convergence is flagged, not thrown.
FitResult fit_fid(const std::vector<double>& times,
                  const std::vector<double>& values, FidModel guess,
                  const std::array<bool, FidModel::n_params>& frozen);

// Default mask: chi, V_R, V_I frozen, everything else free.
std::array<bool, FidModel::n_params> default_frozen_mask();

nlohmann::json fit_result_to_json(const FitResult& result);

// Motionless-atom figure sweep: for each pulse length, run the circuit,
// accumulate the quadratic phase, evaluate the pipeline expectations,
// synthesize the probe transient, and fit the amplitude back out.
struct AmplitudeVsTauConfig {
  CircuitParams circuit;          // pulse_length is overridden per point
  std::vector<double> taus;       // s
  double field_per_ampere = 0.0;  // T/A at the cell center
  ZeemanCoefficients coeffs;
  FidModel probe;                 // chi/gamma/omega_l/V template
  double a_scale = 1.0;
  double b_scale = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  int n_samples = 2000;
  double duration = 0.1;          // s of probe record
  int threads = 1;
};

struct AmplitudeVsTauRow {
  double tau = 0.0;
  double phi2 = 0.0;
  double alpha_r_direct = 0.0;  // pipeline expectation value
  double alpha_r_fit = 0.0;     // recovered from the synthetic transient
};

std::vector<AmplitudeVsTauRow> amplitude_vs_tau(const AmplitudeVsTauConfig& config);

}  // namespace qzeeman
