#include "qzeeman/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qzeeman {

namespace {

struct State {
  double i = 0.0;  // A
  double q = 0.0;  // C
};

// Closed-form solution of L I' + R I + Q/C = V, Q' = I on a span of
// constant V, anchored at the state at the span start.
class RlcPropagator {
 public:
  explicit RlcPropagator(const CircuitParams& p)
      : c_(p.capacitance),
        alpha_(p.total_resistance() / (2.0 * p.inductance)),
        omega0_sq_(1.0 / (p.inductance * p.capacitance)) {
    const double disc = alpha_ * alpha_ - omega0_sq_;
    if (std::abs(disc) < 1e-12 * omega0_sq_) {
      regime_ = Regime::Critical;
    } else if (disc < 0.0) {
      regime_ = Regime::Underdamped;
      omega_d_ = std::sqrt(-disc);
    } else {
      regime_ = Regime::Overdamped;
      beta_ = std::sqrt(disc);
    }
  }

  double damped_angular_frequency() const { return omega_d_; }

  State advance(const State& s, double v, double u) const {
    const double qt0 = s.q - c_ * v;
    State out;
    switch (regime_) {
      case Regime::Underdamped: {
        const double env = std::exp(-alpha_ * u);
        const double cs = std::cos(omega_d_ * u);
        const double sn = std::sin(omega_d_ * u);
        const double b_i = -(alpha_ * s.i + omega0_sq_ * qt0) / omega_d_;
        const double b_q = (s.i + alpha_ * qt0) / omega_d_;
        out.i = env * (s.i * cs + b_i * sn);
        out.q = c_ * v + env * (qt0 * cs + b_q * sn);
        break;
      }
      case Regime::Overdamped: {
        const double s1 = -alpha_ + beta_;
        const double s2 = -alpha_ - beta_;
        const double a1 = (s.i - s2 * qt0) / (s1 - s2);
        const double a2 = (s1 * qt0 - s.i) / (s1 - s2);
        const double e1 = std::exp(s1 * u);
        const double e2 = std::exp(s2 * u);
        out.i = s1 * a1 * e1 + s2 * a2 * e2;
        out.q = c_ * v + a1 * e1 + a2 * e2;
        break;
      }
      case Regime::Critical: {
        const double env = std::exp(-alpha_ * u);
        const double c1 = s.i + alpha_ * qt0;
        out.i = (s.i - alpha_ * c1 * u) * env;
        out.q = c_ * v + (qt0 + c1 * u) * env;
        break;
      }
    }
    return out;
  }

  // Integral of I^2 over [0, u] from the given start state.
  double integral_i2(const State& s, double v, double u) const {
    const double qt0 = s.q - c_ * v;
    switch (regime_) {
      case Regime::Underdamped: {
        const double a = s.i;
        const double b = -(alpha_ * s.i + omega0_sq_ * qt0) / omega_d_;
        const double e0 = exp_integral(u);
        const double denom = 4.0 * (alpha_ * alpha_ + omega_d_ * omega_d_);
        const double env = std::exp(-2.0 * alpha_ * u);
        const double cs = std::cos(2.0 * omega_d_ * u);
        const double sn = std::sin(2.0 * omega_d_ * u);
        const double ec =
            (env * (-2.0 * alpha_ * cs + 2.0 * omega_d_ * sn) + 2.0 * alpha_) /
            denom;
        const double es =
            (env * (-2.0 * alpha_ * sn - 2.0 * omega_d_ * cs) + 2.0 * omega_d_) /
            denom;
        return 0.5 * (a * a + b * b) * e0 + 0.5 * (a * a - b * b) * ec +
               a * b * es;
      }
      case Regime::Overdamped: {
        const double s1 = -alpha_ + beta_;
        const double s2 = -alpha_ - beta_;
        const double a1 = s1 * (s.i - s2 * qt0) / (s1 - s2);
        const double a2 = s2 * (s1 * qt0 - s.i) / (s1 - s2);
        auto growth = [u](double rate) { return std::expm1(rate * u) / rate; };
        return a1 * a1 * growth(2.0 * s1) + 2.0 * a1 * a2 * growth(s1 + s2) +
               a2 * a2 * growth(2.0 * s2);
      }
      case Regime::Critical: {
        const double d0 = s.i;
        const double d1 = -alpha_ * (s.i + alpha_ * qt0);
        const double g = 2.0 * alpha_;
        const double e = std::exp(-g * u);
        const double j0 = -std::expm1(-g * u) / g;
        const double j1 = (1.0 - (1.0 + g * u) * e) / (g * g);
        const double j2 =
            (2.0 - (2.0 + 2.0 * g * u + g * g * u * u) * e) / (g * g * g);
        return d0 * d0 * j0 + 2.0 * d0 * d1 * j1 + d1 * d1 * j2;
      }
    }
    return 0.0;
  }

 private:
  enum class Regime { Underdamped, Overdamped, Critical };

  double exp_integral(double u) const {
    if (alpha_ == 0.0) return u;
    return -std::expm1(-2.0 * alpha_ * u) / (2.0 * alpha_);
  }

  double c_;
  double alpha_;
  double omega0_sq_;
  double omega_d_ = 0.0;
  double beta_ = 0.0;
  Regime regime_ = Regime::Underdamped;
};

}  // namespace

double CircuitParams::damping_rate() const {
  return total_resistance() / (2.0 * inductance);
}

double CircuitParams::default_tail_length() const {
  return 20.0 / damping_rate();
}

double CircuitParams::effective_tail_length() const {
  return tail_length >= 0.0 ? tail_length : default_tail_length();
}

double CircuitParams::effective_sample_rate() const {
  return sample_rate > 0.0 ? sample_rate : 200.0 * drive_frequency;
}

void CircuitParams::validate() const {
  if (!(resistance > 0.0)) throw std::invalid_argument("circuit: R must be > 0");
  if (extra_resistance < 0.0)
    throw std::invalid_argument("circuit: extra resistance must be >= 0");
  if (!(inductance > 0.0)) throw std::invalid_argument("circuit: L must be > 0");
  if (!(capacitance > 0.0)) throw std::invalid_argument("circuit: C must be > 0");
  if (supply_voltage < 0.0)
    throw std::invalid_argument("circuit: supply voltage must be >= 0");
  if (!(drive_frequency > 0.0))
    throw std::invalid_argument("circuit: drive frequency must be > 0");
  if (pulse_length < 0.0)
    throw std::invalid_argument("circuit: pulse length must be >= 0");
  if (effective_sample_rate() < 50.0 * drive_frequency)
    throw std::invalid_argument(
        "circuit: sample rate must be at least 50x the drive frequency");
}

double drive_voltage(const CircuitParams& params, double t) {
  if (t < 0.0 || t >= params.pulse_length) return 0.0;
  const double cycles = t * params.drive_frequency;
  const double phase = cycles - std::floor(cycles);
  return phase < 0.5 ? params.supply_voltage : -params.supply_voltage;
}

CurrentTrace simulate_pulse(const CircuitParams& params) {
  params.validate();
  const double t_end = params.end_time();
  const double half_period = 0.5 / params.drive_frequency;
  const double dt_sample = 1.0 / params.effective_sample_rate();
  const double merge_eps = 1e-9 * dt_sample;

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(t_end / dt_sample) + 16);
  const auto n_samples = static_cast<std::size_t>(std::ceil(t_end / dt_sample));
  for (std::size_t j = 0; j <= n_samples; ++j)
    grid.push_back(std::min(j * dt_sample, t_end));
  for (double t = half_period; t < params.pulse_length; t += half_period)
    grid.push_back(t);
  if (params.pulse_length > 0.0 && params.pulse_length < t_end)
    grid.push_back(params.pulse_length);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [merge_eps](double a, double b) {
                           return std::abs(a - b) < merge_eps;
                         }),
             grid.end());
  if (grid.back() < t_end) grid.push_back(t_end);

  CurrentTrace trace;
  trace.params = params;
  trace.analytic = true;
  const std::size_t n = grid.size();
  trace.times = std::move(grid);
  trace.currents.resize(n);
  trace.charges.resize(n);
  trace.i2_integrals.resize(n);
  trace.drive.resize(n, 0.0);

  const RlcPropagator prop(params);
  State state;
  trace.currents[0] = 0.0;
  trace.charges[0] = 0.0;
  trace.i2_integrals[0] = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double t0 = trace.times[j];
    const double t1 = trace.times[j + 1];
    const double v = drive_voltage(params, 0.5 * (t0 + t1));
    trace.drive[j] = v;
    trace.i2_integrals[j + 1] =
        trace.i2_integrals[j] + prop.integral_i2(state, v, t1 - t0);
    state = prop.advance(state, v, t1 - t0);
    trace.currents[j + 1] = state.i;
    trace.charges[j + 1] = state.q;
  }
  trace.drive[n - 1] = 0.0;
  return trace;
}

namespace {

std::size_t locate(const std::vector<double>& times, double& t) {
  const double slop = 1e-9 * (times.back() - times.front());
  if (t < times.front() - slop || t > times.back() + slop)
    throw std::out_of_range("trace: time outside the recorded window");
  t = std::clamp(t, times.front(), times.back());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times.begin());
  return (j == 0) ? 0 : j - 1;
}

}  // namespace

double CurrentTrace::current_at(double t) const {
  const std::size_t j = locate(times, t);
  if (j + 1 >= times.size()) return currents.back();
  if (analytic) {
    const RlcPropagator prop(params);
    const State s{currents[j], charges[j]};
    return prop.advance(s, drive[j], t - times[j]).i;
  }
  const double w = (t - times[j]) / (times[j + 1] - times[j]);
  return currents[j] + w * (currents[j + 1] - currents[j]);
}

double CurrentTrace::integral_i(double t0, double t1) const {
  auto charge_at = [this](double t) {
    const std::size_t j = locate(times, t);
    if (j + 1 >= times.size()) return charges.back();
    if (analytic) {
      const RlcPropagator prop(params);
      const State s{currents[j], charges[j]};
      return prop.advance(s, drive[j], t - times[j]).q;
    }
    // Trapezoid of the linearly interpolated current.
    const double dt = t - times[j];
    return charges[j] + 0.5 * (currents[j] + current_at(t)) * dt;
  };
  return charge_at(t1) - charge_at(t0);
}

double CurrentTrace::integral_i2(double t0, double t1) const {
  auto cumulative = [this](double t) {
    const std::size_t j = locate(times, t);
    if (j + 1 >= times.size()) return i2_integrals.back();
    if (analytic) {
      const RlcPropagator prop(params);
      const State s{currents[j], charges[j]};
      return i2_integrals[j] + prop.integral_i2(s, drive[j], t - times[j]);
    }
    const double i1 = current_at(t);
    const double dt = t - times[j];
    return i2_integrals[j] +
           0.5 * (currents[j] * currents[j] + i1 * i1) * dt;
  };
  return cumulative(t1) - cumulative(t0);
}

CurrentTrace CurrentTrace::from_samples(std::vector<double> times,
                                        std::vector<double> currents,
                                        CircuitParams params) {
  if (times.size() != currents.size() || times.size() < 2)
    throw std::invalid_argument("trace: need matching times/currents arrays");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("trace: times must be sorted ascending");
  CurrentTrace trace;
  trace.times = std::move(times);
  trace.currents = std::move(currents);
  trace.params = params;
  trace.analytic = false;
  const std::size_t n = trace.times.size();
  trace.charges.resize(n, 0.0);
  trace.i2_integrals.resize(n, 0.0);
  trace.drive.resize(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double dt = trace.times[j + 1] - trace.times[j];
    trace.charges[j + 1] =
        trace.charges[j] +
        0.5 * (trace.currents[j] + trace.currents[j + 1]) * dt;
    trace.i2_integrals[j + 1] =
        trace.i2_integrals[j] + 0.5 *
                                    (trace.currents[j] * trace.currents[j] +
                                     trace.currents[j + 1] * trace.currents[j + 1]) *
                                    dt;
  }
  return trace;
}

double total_charge(const CurrentTrace& trace) {
  if (trace.times.size() < 2)
    throw std::invalid_argument("total_charge: empty trace");
  if (trace.params.inductance > 0.0 && trace.params.total_resistance() > 0.0) {
    const double required =
        trace.params.pulse_length + 10.0 / trace.params.damping_rate();
    if (trace.end_time() < required)
      throw std::invalid_argument(
          "total_charge: trace must extend at least 10/(damping rate) past "
          "the pulse");
  }
  return trace.charges.back() - trace.charges.front();
}

}  // namespace qzeeman
