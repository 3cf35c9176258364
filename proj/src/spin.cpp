#include "qzeeman/spin.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qzeeman/constants.hpp"

namespace qzeeman {

namespace {
using std::complex;
const complex<double> I_UNIT{0.0, 1.0};
const double INV_SQRT2 = 1.0 / std::sqrt(2.0);
}  // namespace

const Operator3& spin_fx() {
  static const Operator3 fx = [] {
    Operator3 m = Operator3::Zero();
    m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = INV_SQRT2;
    return m;
  }();
  return fx;
}

const Operator3& spin_fy() {
  static const Operator3 fy = [] {
    Operator3 m = Operator3::Zero();
    m(0, 1) = m(1, 2) = -I_UNIT * INV_SQRT2;
    m(1, 0) = m(2, 1) = I_UNIT * INV_SQRT2;
    return m;
  }();
  return fy;
}

const Operator3& spin_fz() {
  static const Operator3 fz = [] {
    Operator3 m = Operator3::Zero();
    m(0, 0) = 1.0;
    m(2, 2) = -1.0;
    return m;
  }();
  return fz;
}

Operator3 rotation(const Eigen::Vector3d& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw std::domain_error("rotation: axis must be a unit vector");
  const Operator3 m =
      axis.x() * spin_fx() + axis.y() * spin_fy() + axis.z() * spin_fz();
  // For spin 1 and a unit axis, (axis.F)^3 = axis.F, so the exponential
  // closes after the quadratic term.
  return Operator3::Identity() - I_UNIT * std::sin(angle) * m +
         (std::cos(angle) - 1.0) * (m * m);
}

namespace {

// w = (axis.F) psi, unrolled; axis.F has the tridiagonal form
// [[nz, t*, 0], [t, 0, t*], [0, t, -nz]] with t = (nx + i ny)/sqrt(2).
inline void axis_f_apply(const Eigen::Vector3d& n,
                         const Eigen::Vector3cd& psi, Eigen::Vector3cd& out) {
  const complex<double> t{n.x() * INV_SQRT2, n.y() * INV_SQRT2};
  const complex<double> tc = std::conj(t);
  out(0) = n.z() * psi(0) + tc * psi(1);
  out(1) = t * psi(0) + tc * psi(2);
  out(2) = t * psi(1) - n.z() * psi(2);
}

}  // namespace

void apply_rotation(SpinState& state, const Eigen::Vector3d& axis,
                    double angle) {
  Eigen::Vector3cd w, w2;
  axis_f_apply(axis, state.amplitudes, w);
  axis_f_apply(axis, w, w2);
  const double s = std::sin(angle);
  const double cm1 = std::cos(angle) - 1.0;
  state.amplitudes += -I_UNIT * s * w + cm1 * w2;
}

void apply_quadratic_phase(SpinState& state, const Eigen::Vector3d& axis,
                           double phi) {
  Eigen::Vector3cd w, w2;
  axis_f_apply(axis, state.amplitudes, w);
  axis_f_apply(axis, w, w2);
  state.amplitudes += (std::exp(-I_UNIT * phi) - 1.0) * w2;
}

Operator3 x_to_z_rotation() {
  return rotation(Eigen::Vector3d::UnitY(), 0.5 * constants::pi);
}

Operator3 y_to_z_rotation() {
  return rotation(Eigen::Vector3d::UnitX(), -0.5 * constants::pi);
}

SpinState initial_state_x() {
  SpinState s;
  s.amplitudes = x_to_z_rotation() * Eigen::Vector3cd{1.0, 0.0, 0.0};
  return s;
}

PhasePair phases_from_trace(const CurrentTrace& trace, double field_per_ampere,
                            const ZeemanCoefficients& coeffs) {
  PhasePair out;
  out.phi1 = coeffs.omega1_per_b * field_per_ampere * total_charge(trace);
  out.phi2 = coeffs.omega2_per_b2 * field_per_ampere * field_per_ampere *
             trace.integral_i2(trace.times.front(), trace.times.back());
  return out;
}

Operator3 quadratic_phase_operator(const Eigen::Vector3d& axis, double phi) {
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw std::domain_error("quadratic_phase_operator: axis must be unit");
  const Operator3 m =
      axis.x() * spin_fx() + axis.y() * spin_fy() + axis.z() * spin_fz();
  // (n.F)^2 projects onto the m = +/-1 subspace of the n quantization axis,
  // so exp(-i phi (n.F)^2) = 1 + (e^{-i phi} - 1) (n.F)^2.
  return Operator3::Identity() +
         (std::exp(-I_UNIT * phi) - 1.0) * (m * m);
}

Operator3 pulse_unitary(double phi2) {
  return quadratic_phase_operator(Eigen::Vector3d::UnitY(), phi2);
}

SpinObservables observables(double a_scale, double b_scale) {
  SpinObservables obs;
  obs.alpha_r = Operator3::Zero();
  obs.alpha_r(0, 2) = a_scale;
  obs.alpha_r(2, 0) = a_scale;
  obs.alpha_i = Operator3::Zero();
  obs.alpha_i(2, 0) = I_UNIT * a_scale;
  obs.alpha_i(0, 2) = -I_UNIT * a_scale;
  obs.beta = Operator3::Zero();
  obs.beta(0, 0) = b_scale;
  obs.beta(2, 2) = -b_scale;
  return obs;
}

PipelineExpectations appendix_pipeline(double phi2, double a_scale,
                                       double b_scale) {
  const SpinState psi0 = initial_state_x();
  const Operator3 quarter =
      rotation(Eigen::Vector3d::UnitX(), 0.25 * constants::pi);
  SpinState psi;
  psi.amplitudes = quarter * (pulse_unitary(phi2) * psi0.amplitudes);
  const SpinObservables obs = observables(a_scale, b_scale);
  return {psi.expectation(obs.alpha_r), psi.expectation(obs.alpha_i),
          psi.expectation(obs.beta)};
}

Operator3 brute_force_evolution(const CurrentTrace& trace,
                                double field_per_ampere,
                                const ZeemanCoefficients& coeffs,
                                int steps_per_cycle) {
  if (steps_per_cycle < 100)
    throw std::invalid_argument(
        "brute_force_evolution: need at least 100 steps per drive cycle");
  const double c1 = coeffs.omega1_per_b * field_per_ampere;
  const double c2 = coeffs.omega2_per_b2 * field_per_ampere * field_per_ampere;

  // Substep the trace grid so segment boundaries stay exact step edges.
  const double grid_rate =
      trace.params.drive_frequency > 0.0
          ? trace.params.effective_sample_rate() / trace.params.drive_frequency
          : static_cast<double>(steps_per_cycle);
  const int substeps = std::max(
      1, static_cast<int>(std::ceil(steps_per_cycle / grid_rate)));

  Operator3 u = Operator3::Identity();
  for (std::size_t j = 0; j + 1 < trace.times.size(); ++j) {
    const double t0 = trace.times[j];
    const double h = (trace.times[j + 1] - t0) / substeps;
    if (h <= 0.0) continue;
    for (int s = 0; s < substeps; ++s) {
      const double a = t0 + s * h;
      const double ia = trace.current_at(a);
      const double im = trace.current_at(a + 0.5 * h);
      const double ib = trace.current_at(a + h);
      // Simpson-weighted rate samples over the step.
      const double angle1 = c1 * h * (ia + 4.0 * im + ib) / 6.0;
      const double angle2 =
          c2 * h * (ia * ia + 4.0 * im * im + ib * ib) / 6.0;
      const Operator3 step =
          rotation(Eigen::Vector3d::UnitY(), angle1) * pulse_unitary(angle2);
      u = step * u;
    }
  }
  return u;
}

double operator_distance_up_to_phase(const Operator3& test,
                                     const Operator3& reference) {
  Eigen::Index row = 0, col = 0;
  reference.cwiseAbs().maxCoeff(&row, &col);
  const complex<double> ref = reference(row, col);
  const complex<double> val = test(row, col);
  complex<double> phase{1.0, 0.0};
  if (std::abs(val) > 0.0 && std::abs(ref) > 0.0)
    phase = (ref / val) / std::abs(ref / val);
  return ((phase * test) - reference).cwiseAbs().maxCoeff();
}

nlohmann::json operator_to_json(const Operator3& op) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 3; ++c)
      row.push_back({op(r, c).real(), op(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json state_to_json(const SpinState& state) {
  nlohmann::json arr = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    arr.push_back({state.amplitudes(r).real(), state.amplitudes(r).imag()});
  return arr;
}

}  // namespace qzeeman
