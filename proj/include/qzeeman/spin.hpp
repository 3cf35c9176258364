#pragma once

#include <complex>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qzeeman/atom.hpp"
#include "qzeeman/circuit.hpp"

// Spin-1 states, rotations, the pulse evolution operator and the probe
// observables. Basis convention throughout: z quantization axis, amplitude
// order m_F = +1, 0, -1, with F_z = diag(1, 0, -1) and F_x, F_y from the
// standard ladder construction. Rotations are exp(-i * angle * axis.F).
//
// Handedness convention (fixed here, asserted by tests): the x->z basis
// change is exp(-i (pi/2) F_y), which maps |1>_z to (|1> + sqrt(2)|0> +
// |-1>)/2, and the pre-probe quarter rotation is exp(-i (pi/4) F_x). With
// these choices the pipeline yields <alpha_R> = (A/2)(1 - sin phi2).

namespace qzeeman {

using Operator3 = Eigen::Matrix3cd;

const Operator3& spin_fx();
const Operator3& spin_fy();
const Operator3& spin_fz();

struct SpinState {
  Eigen::Vector3cd amplitudes{0.0, 0.0, 0.0};

  double norm() const { return amplitudes.norm(); }
  double expectation(const Operator3& op) const {
    return (amplitudes.adjoint() * op * amplitudes)(0).real();
  }
};

// exp(-i angle (axis.F)) in closed form; axis must be unit length.
Operator3 rotation(const Eigen::Vector3d& axis, double angle);

// In-place application of exp(-i angle (axis.F)) without building the
// matrix; the Monte Carlo inner loop lives on this.
void apply_rotation(SpinState& state, const Eigen::Vector3d& axis,
                    double angle);

// In-place application of exp(-i phi (axis.F)^2).
void apply_quadratic_phase(SpinState& state, const Eigen::Vector3d& axis,
                           double phi);

// Quantization-axis changes used by the pipeline.
Operator3 x_to_z_rotation();  // exp(-i (pi/2) F_y)
Operator3 y_to_z_rotation();  // exp(+i (pi/2) F_x)

// |1>_x expressed in the z basis: (|1> + sqrt(2)|0> + |-1>)/2.
SpinState initial_state_x();

struct PhasePair {
  double phi1 = 0.0;  // rad, integral of the linear Larmor frequency
  double phi2 = 0.0;  // rad, integral of the quadratic one; always >= 0
};

// Phase integrals over the full trace with B(t) = field_per_ampere * I(t).
// Requires the decayed tail (same precondition as total_charge).
PhasePair phases_from_trace(const CurrentTrace& trace, double field_per_ampere,
                            const ZeemanCoefficients& coeffs);

// Pulse evolution operator: phase exp(-i phi2 m^2) on the y-basis levels,
// returned in the z basis. Equals exp(-i phi2 F_y^2).
Operator3 pulse_unitary(double phi2);

// exp(-i phi (n.F)^2) for an arbitrary unit axis.
Operator3 quadratic_phase_operator(const Eigen::Vector3d& axis, double phi);

struct SpinObservables {
  Operator3 alpha_r;
  Operator3 alpha_i;
  Operator3 beta;
};

// Probe observables in the z basis, with scale constants A and B.
SpinObservables observables(double a_scale = 1.0, double b_scale = 1.0);

struct PipelineExpectations {
  double alpha_r = 0.0;
  double alpha_i = 0.0;
  double beta = 0.0;
};

// |1>_x -> pulse_unitary(phi2) -> quarter rotation about x -> expectation
// values. Closed form: alpha_r = (A/2)(1 - sin phi2), others vanish.
PipelineExpectations appendix_pipeline(double phi2, double a_scale = 1.0,
                                       double b_scale = 1.0);

// Time-ordered product of short-step propagators
// exp(-i [Omega1(t) F_y + Omega2(t) F_y^2] dt) over the whole trace, for a
// motionless atom in the homogeneous center field. Steps are aligned to the
// trace grid with Simpson-weighted sampling of the rates; at least 100
// steps per drive cycle are required.
Operator3 brute_force_evolution(const CurrentTrace& trace,
                                double field_per_ampere,
                                const ZeemanCoefficients& coeffs,
                                int steps_per_cycle = 1000);

// Max-norm distance between operators after aligning global phase on the
// largest element of the reference.
double operator_distance_up_to_phase(const Operator3& test,
                                     const Operator3& reference);

// JSON export as nested arrays of [re, im] pairs.
nlohmann::json operator_to_json(const Operator3& op);
nlohmann::json state_to_json(const SpinState& state);

}  // namespace qzeeman
