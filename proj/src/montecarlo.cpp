#include "qzeeman/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <future>
#include <stdexcept>

#include "qzeeman/constants.hpp"

namespace qzeeman {

void CellGeometry::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("cell: radius must be > 0");
}

void EnsembleConfig::validate() const {
  if (n_particles < 1)
    throw std::invalid_argument("montecarlo: need at least one particle");
  if (!(temperature > 0.0))
    throw std::invalid_argument("montecarlo: temperature must be > 0");
  if (steps_per_cycle < 50)
    throw std::invalid_argument(
        "montecarlo: need at least 50 steps per drive cycle");
  if (threads < 1)
    throw std::invalid_argument("montecarlo: thread count must be >= 1");
  species.validate();
  cell.validate();
  coils.validate();
  circuit.validate();
}

Particle sample_initial(const EnsembleConfig& config, Rng& rng) {
  Particle p;
  p.position = config.cell.center + rng.point_in_ball(config.cell.radius);
  const double sigma = std::sqrt(constants::boltzmann * config.temperature /
                                 config.species.mass);
  p.velocity = sigma * Eigen::Vector3d{rng.normal(), rng.normal(), rng.normal()};
  p.spin = initial_state_x();
  return p;
}

namespace {

Eigen::Vector3d bounce_direction(const Eigen::Vector3d& inward_normal, Rng& rng,
                                 bool cosine_law) {
  if (cosine_law) {
    // Lambertian: pdf proportional to cos(theta) about the inward normal.
    const Eigen::Vector3d t1 =
        (std::abs(inward_normal.x()) < 0.9
             ? inward_normal.cross(Eigen::Vector3d::UnitX())
             : inward_normal.cross(Eigen::Vector3d::UnitY()))
            .normalized();
    const Eigen::Vector3d t2 = inward_normal.cross(t1);
    const double u = rng.uniform();
    const double phi = rng.uniform(0.0, constants::two_pi);
    const double s = std::sqrt(1.0 - u);
    return std::sqrt(u) * inward_normal +
           s * (std::cos(phi) * t1 + std::sin(phi) * t2);
  }
  // Uniform over the inward solid-angle hemisphere.
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::Vector3d dir = rng.isotropic_direction();
    double along = dir.dot(inward_normal);
    if (along < 0.0) {
      dir = -dir;
      along = -along;
    }
    if (along > 1e-9) return dir;
  }
  return inward_normal;
}

}  // namespace

void propagate(Particle& particle, double dt, const CellGeometry& cell,
               Rng& rng, bool cosine_law) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
  const double speed = particle.velocity.norm();
  if (speed == 0.0) return;
  const double radius = cell.radius;
  double remaining = dt;
  for (int guard = 0; guard < 10000 && remaining > 0.0; ++guard) {
    const Eigen::Vector3d d = particle.position - cell.center;
    const double a = particle.velocity.squaredNorm();
    const double b = d.dot(particle.velocity);
    const double c = d.squaredNorm() - radius * radius;
    if (c < 0.0 || b < 0.0) {
      // Inside (or on the wall moving inward): fly to the next contact.
      // Clamping c keeps roundoff from pushing the root complex when the
      // particle sits exactly on the sphere.
      const double disc = b * b - a * std::min(c, 0.0);
      const double t_hit = (-b + std::sqrt(disc)) / a;
      if (t_hit >= remaining) {
        particle.position += particle.velocity * remaining;
        return;
      }
      particle.position += particle.velocity * t_hit;
      remaining -= t_hit;
    }
    // Wall contact: pin the position exactly onto the sphere and redraw
    // an inward direction at the preserved speed.
    Eigen::Vector3d out_normal = particle.position - cell.center;
    const double r = out_normal.norm();
    out_normal = r > 0.0 ? Eigen::Vector3d(out_normal / r)
                         : Eigen::Vector3d::UnitZ();
    particle.position = cell.center + radius * out_normal;
    particle.velocity = speed * bounce_direction(-out_normal, rng, cosine_law);
  }
}

AxisymmetricFieldMap build_field_map(const EnsembleConfig& config) {
  const double margin = 1.0 + 1e-6;
  const double extent = config.cell.radius * margin +
                        (config.cell.center - config.coils.center).norm();
  return AxisymmetricFieldMap(config.coils, extent, extent, 128, 257);
}

EnsembleResult evolve_pulse(const EnsembleConfig& config) {
  const CurrentTrace trace = simulate_pulse(config.circuit);
  const AxisymmetricFieldMap map = build_field_map(config);
  return evolve_pulse(config, trace, map);
}

EnsembleResult evolve_pulse(const EnsembleConfig& config,
                            const CurrentTrace& trace,
                            const AxisymmetricFieldMap& map) {
  config.validate();
  const double dt =
      1.0 / (config.steps_per_cycle * config.circuit.drive_frequency);
  const double window =
      config.evolution_window >= 0.0
          ? config.evolution_window
          : 10.0 / config.circuit.damping_rate();
  const double t_end =
      std::min(trace.end_time(), config.circuit.pulse_length + window);
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt));

  // Midpoint-of-step currents, shared by every particle.
  std::vector<double> currents(n_steps);
  std::vector<double> step_dt(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t0 = k * dt;
    const double t1 = std::min(t_end, t0 + dt);
    step_dt[k] = t1 - t0;
    currents[k] = trace.current_at(0.5 * (t0 + t1));
  }

  const ZeemanCoefficients coeffs = zeeman_coefficients(config.species);
  const Eigen::Vector3d axis = config.coils.axis.normalized();
  const Eigen::Vector3d b_center = map.field_per_ampere(config.cell.center);

  auto run_particle = [&](std::uint64_t index) {
    Rng rng = Rng::stream(config.rng_seed, index);
    Particle p = sample_initial(config, rng);
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double h = step_dt[k];
      if (h <= 0.0) continue;
      propagate(p, 0.5 * h, config.cell, rng, config.cosine_law_walls);
      const Eigen::Vector3d b_per_amp =
          config.homogeneous_field ? b_center
                                   : map.field_per_ampere(p.position);
      const Eigen::Vector3d b = b_per_amp * currents[k];
      const double b_axial = b.dot(axis);
      if (config.linear_full_vector) {
        const double mag = b.norm();
        const double angle = coeffs.omega1_per_b * mag * h;
        if (mag > 0.0 && angle != 0.0) {
          const Eigen::Vector3d n = b / mag;
          apply_rotation(p.spin, n, angle);
        }
      } else {
        const double angle = coeffs.omega1_per_b * b_axial * h;
        if (angle != 0.0) apply_rotation(p.spin, axis, angle);
      }
      const double dphi2 = coeffs.omega2_per_b2 * b_axial * b_axial * h;
      if (config.interleaved_quadratic) {
        apply_quadratic_phase(p.spin, axis, dphi2);
      } else {
        p.phi2_accum += dphi2;
      }
      propagate(p, 0.5 * h, config.cell, rng, config.cosine_law_walls);
    }
    if (!config.interleaved_quadratic)
      apply_quadratic_phase(p.spin, axis, p.phi2_accum);
    return p.spin;
  };

  const auto n = static_cast<std::size_t>(config.n_particles);
  std::vector<SpinState> states(n);
  const std::size_t chunk = 256;  // fixed, so results ignore the thread count
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  if (config.threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) states[i] = run_particle(i);
  } else {
    std::vector<std::future<void>> work;
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(config.threads,
                                      static_cast<int>(n_chunks));
    work.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      work.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t c = next.fetch_add(1); c < n_chunks;
             c = next.fetch_add(1)) {
          const std::size_t lo = c * chunk;
          const std::size_t hi = std::min(n, lo + chunk);
          for (std::size_t i = lo; i < hi; ++i) states[i] = run_particle(i);
        }
      }));
    }
    for (auto& f : work) f.get();
  }

  EnsembleResult result;
  result.tau = config.circuit.pulse_length;
  result.states = std::move(states);
  result.density = Eigen::Matrix3cd::Zero();
  for (const auto& s : result.states)
    result.density += s.amplitudes * s.amplitudes.adjoint();
  result.density /= static_cast<double>(n);
  return result;
}

AmplitudeStats ensemble_alpha_r(const std::vector<SpinState>& states,
                                double a_scale) {
  const Operator3 quarter =
      rotation(Eigen::Vector3d::UnitX(), 0.25 * constants::pi);
  const Operator3 alpha_r = observables(a_scale).alpha_r;
  const Operator3 effective = quarter.adjoint() * alpha_r * quarter;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& s : states) {
    const double a = s.expectation(effective);
    sum += a;
    sum_sq += a * a;
  }
  const double n = static_cast<double>(states.size());
  AmplitudeStats stats;
  stats.mean = sum / n;
  if (states.size() > 1) {
    const double var = std::max(0.0, (sum_sq - n * stats.mean * stats.mean) /
                                         (n - 1.0));
    stats.std_err = std::sqrt(var / n);
  }
  return stats;
}

double solve_tau_for_phi2(const CircuitParams& params, double field_per_ampere,
                          const ZeemanCoefficients& coeffs, double target,
                          double tau_max) {
  CircuitParams probe = params;
  probe.sample_rate = 50.0 * probe.drive_frequency;  // integrals are exact
  auto phi2_of = [&](double tau) {
    probe.pulse_length = tau;
    return phases_from_trace(simulate_pulse(probe), field_per_ampere, coeffs)
        .phi2;
  };
  if (!(target > 0.0)) return 0.0;
  double lo = 0.0;
  double hi = tau_max;
  if (phi2_of(hi) < target) return -1.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (phi2_of(mid) < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<DephasingPoint> dephasing_curve(const EnsembleConfig& base,
                                            const std::vector<double>& frequencies,
                                            int n_max, double a_scale,
                                            double tau_max,
                                            bool retune_capacitance) {
  base.validate();
  const AxisymmetricFieldMap map = build_field_map(base);
  const ZeemanCoefficients coeffs = zeeman_coefficients(base.species);
  const double b_center =
      map.field_per_ampere(base.cell.center).dot(base.coils.axis.normalized());

  std::vector<DephasingPoint> table;
  table.reserve(frequencies.size() * static_cast<std::size_t>(n_max));
  for (const double f : frequencies) {
    EnsembleConfig config = base;
    config.circuit.drive_frequency = f;
    config.circuit.sample_rate = -1.0;
    if (retune_capacitance) {
      const double w = constants::two_pi * f;
      config.circuit.capacitance = 1.0 / (config.circuit.inductance * w * w);
    }
    for (int n_pi = 1; n_pi <= n_max; ++n_pi) {
      DephasingPoint point;
      point.frequency = f;
      point.n_pi = n_pi;
      const double tau =
          solve_tau_for_phi2(config.circuit, b_center, coeffs,
                             n_pi * constants::pi, tau_max);
      if (tau < 0.0) {
        point.reached = false;
        table.push_back(point);
        continue;
      }
      point.tau = tau;
      config.circuit.pulse_length = tau;
      const CurrentTrace trace = simulate_pulse(config.circuit);
      const EnsembleResult ens = evolve_pulse(config, trace, map);
      const AmplitudeStats stats = ensemble_alpha_r(ens.states, a_scale);
      point.amplitude = stats.mean;
      point.std_err = stats.std_err;
      table.push_back(point);
    }
  }
  return table;
}

}  // namespace qzeeman
