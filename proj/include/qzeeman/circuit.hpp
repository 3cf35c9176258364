#pragma once

#include <vector>

// Transient of the H-bridge-driven series RLC pulser. The drive is a
// square wave between +V and -V while the bridge runs, then zero while the
// stored energy rings down. Each constant-voltage span has a closed-form
// damped-sinusoid solution; the state (I, Q) is propagated exactly across
// switch instants, which is what makes the total charge vanish to machine
// precision once the tail has decayed.

namespace qzeeman {

struct CircuitParams {
  double resistance = 0.0;        // ohm, coil + series resistor
  double extra_resistance = 0.0;  // ohm, optional switch/wiring losses
  double inductance = 0.0;        // H
  double capacitance = 0.0;       // F
  double supply_voltage = 0.0;    // V
  double drive_frequency = 0.0;   // Hz, square-wave switching rate
  double pulse_length = 0.0;      // s
  double tail_length = -1.0;      // s; negative selects the default
  double sample_rate = -1.0;      // Hz; non-positive selects the default

  double total_resistance() const { return resistance + extra_resistance; }
  double damping_rate() const;           // R_eff / (2L)
  double default_tail_length() const;    // 20 / damping_rate
  double effective_tail_length() const;
  double effective_sample_rate() const;  // default 200 x drive frequency
  double end_time() const { return pulse_length + effective_tail_length(); }

  void validate() const;  // throws std::invalid_argument
};

// Bridge output voltage seen by the RLC loop at time t.
double drive_voltage(const CircuitParams& params, double t);

struct CurrentTrace {
  std::vector<double> times;         // s, sorted, starts at 0
  std::vector<double> currents;      // A
  std::vector<double> charges;       // C, capacitor charge Q(t)
  std::vector<double> i2_integrals;  // A^2 s, cumulative integral of I^2
  std::vector<double> drive;         // V over [times[i], times[i+1])
  CircuitParams params;
  bool analytic = false;  // true when built by simulate_pulse

  // Exact evaluation between samples (closed form when analytic,
  // linear/trapezoid interpolation otherwise).
  double current_at(double t) const;
  double integral_i(double t0, double t1) const;
  double integral_i2(double t0, double t1) const;

  double end_time() const { return times.empty() ? 0.0 : times.back(); }

  // Build a non-analytic trace from raw samples (integrals by trapezoid).
  static CurrentTrace from_samples(std::vector<double> times,
                                   std::vector<double> currents,
                                   CircuitParams params = {});
};

// Piecewise-exact transient with I(0) = Q(0) = 0. The sample grid is
// uniform with every switch instant inserted as an exact breakpoint.
CurrentTrace simulate_pulse(const CircuitParams& params);

// Integral of I over the whole trace. Requires the trace to extend at
// least 10 / damping_rate past the end of the pulse.
double total_charge(const CurrentTrace& trace);

}  // namespace qzeeman
