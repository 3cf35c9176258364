#include "qzeeman/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "qzeeman/constants.hpp"
#include "qzeeman/fid.hpp"
#include "qzeeman/montecarlo.hpp"
#include "qzeeman/spin.hpp"

namespace qzeeman {

namespace {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_number(values[i]);
    }
    out_ << '\n';
  }
  void raw_row(const std::string& line) { out_ << line << '\n'; }

 private:
  std::ofstream out_;
};

struct Context {
  ExperimentConfig cfg;
  fs::path out_dir;
  std::vector<std::string>* files;
};

void emit(Context& ctx, const std::string& name) {
  ctx.files->push_back(name);
}

// --- circuit -------------------------------------------------------------

void run_circuit(Context& ctx) {
  const CurrentTrace trace = simulate_pulse(ctx.cfg.circuit);
  CsvWriter csv(ctx.out_dir / "trace.csv", "t_s,I_A");
  for (std::size_t j = 0; j < trace.times.size(); ++j)
    csv.row({trace.times[j], trace.currents[j]});
  emit(ctx, "trace.csv");
}

// --- phases --------------------------------------------------------------

void run_phases(Context& ctx) {
  const CurrentTrace trace = simulate_pulse(ctx.cfg.circuit);
  const ZeemanCoefficients coeffs = zeeman_coefficients(ctx.cfg.species);
  const double b = ctx.cfg.effective_field_per_ampere();
  const double c1 = coeffs.omega1_per_b * b;
  const double c2 = coeffs.omega2_per_b2 * b * b;
  CsvWriter csv(ctx.out_dir / "phases.csv",
                "t_s,omega1_rad_per_s,omega2_rad_per_s,phi1_rad,phi2_rad");
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    const double i = trace.currents[j];
    csv.row({trace.times[j], c1 * i, c2 * i * i,
             c1 * (trace.charges[j] - trace.charges.front()),
             c2 * trace.i2_integrals[j]});
  }
  emit(ctx, "phases.csv");
}

// --- alpha-vs-tau --------------------------------------------------------

void run_alpha_vs_tau(Context& ctx) {
  const ZeemanCoefficients coeffs = zeeman_coefficients(ctx.cfg.species);
  CsvWriter csv(ctx.out_dir / "alpha_vs_tau.csv",
                "tau_s,phi2_rad,alpha_R_direct,alpha_R_fit");
  if (ctx.cfg.mode == "montecarlo") {
    const AxisymmetricFieldMap map = build_field_map(ctx.cfg.montecarlo);
    const double b_center = map.field_per_ampere(ctx.cfg.cell.center)
                                .dot(ctx.cfg.coils.axis.normalized());
    for (const double tau : ctx.cfg.sweep.taus()) {
      EnsembleConfig mc = ctx.cfg.montecarlo;
      mc.circuit.pulse_length = tau;
      const CurrentTrace trace = simulate_pulse(mc.circuit);
      const PhasePair phases = phases_from_trace(trace, b_center, coeffs);
      const EnsembleResult ens = evolve_pulse(mc, trace, map);
      const AmplitudeStats stats =
          ensemble_alpha_r(ens.states, ctx.cfg.signal.a_scale);
      const PipelineExpectations ref =
          appendix_pipeline(phases.phi2, ctx.cfg.signal.a_scale);
      csv.row({tau, phases.phi2, ref.alpha_r, stats.mean});
    }
  } else {
    AmplitudeVsTauConfig sweep;
    sweep.circuit = ctx.cfg.circuit;
    sweep.taus = ctx.cfg.sweep.taus();
    sweep.field_per_ampere = ctx.cfg.effective_field_per_ampere();
    sweep.coeffs = coeffs;
    sweep.probe = ctx.cfg.signal.probe;
    sweep.a_scale = ctx.cfg.signal.a_scale;
    sweep.b_scale = ctx.cfg.signal.b_scale;
    sweep.noise_sigma = ctx.cfg.signal.noise_sigma;
    sweep.seed = ctx.cfg.seed;
    sweep.n_samples = ctx.cfg.signal.n_samples;
    sweep.duration = ctx.cfg.signal.duration;
    sweep.threads = ctx.cfg.montecarlo.threads;
    for (const auto& row : amplitude_vs_tau(sweep))
      csv.row({row.tau, row.phi2, row.alpha_r_direct, row.alpha_r_fit});
  }
  emit(ctx, "alpha_vs_tau.csv");
}

// --- phase-scaling -------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  const double ss_tot = syy - sy * sy / n;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

void run_phase_scaling(Context& ctx) {
  const ZeemanCoefficients coeffs = zeeman_coefficients(ctx.cfg.species);
  const double b = ctx.cfg.effective_field_per_ampere();
  CsvWriter csv(ctx.out_dir / "phase_scaling.csv", "V_volts,tau_s,phi2_rad");
  CsvWriter slopes(ctx.out_dir / "phase_scaling_slopes.csv",
                   "V_volts,slope_rad_per_s,intercept_rad,r_squared");
  for (const double v : ctx.cfg.sweep.voltage_list) {
    std::vector<double> fit_tau, fit_phi;
    for (const double tau : ctx.cfg.sweep.taus()) {
      CircuitParams params = ctx.cfg.circuit;
      params.supply_voltage = v;
      params.pulse_length = tau;
      const PhasePair phases =
          phases_from_trace(simulate_pulse(params), b, coeffs);
      csv.row({v, tau, phases.phi2});
      if (tau >= 40e-6 && tau <= 100e-6) {
        fit_tau.push_back(tau);
        fit_phi.push_back(phases.phi2);
      }
    }
    if (fit_tau.size() >= 2) {
      const LineFit fit = fit_line(fit_tau, fit_phi);
      slopes.row({v, fit.slope, fit.intercept, fit.r_squared});
    }
  }
  emit(ctx, "phase_scaling.csv");
  emit(ctx, "phase_scaling_slopes.csv");
}

// --- dephasing -----------------------------------------------------------

void run_dephasing(Context& ctx) {
  const auto table = dephasing_curve(
      ctx.cfg.montecarlo, ctx.cfg.sweep.frequency_list, ctx.cfg.sweep.n_pi_max,
      ctx.cfg.signal.a_scale, ctx.cfg.sweep.tau_solve_max,
      ctx.cfg.sweep.retune_capacitance);
  CsvWriter csv(ctx.out_dir / "dephasing.csv",
                "freq_hz,n_pi,amplitude,std_err");
  CsvWriter details(ctx.out_dir / "dephasing_details.csv",
                    "freq_hz,n_pi,tau_s,reached");
  for (const auto& point : table) {
    if (point.reached)
      csv.row({point.frequency, static_cast<double>(point.n_pi),
               point.amplitude, point.std_err});
    details.row({point.frequency, static_cast<double>(point.n_pi), point.tau,
                 point.reached ? 1.0 : 0.0});
  }
  emit(ctx, "dephasing.csv");
  emit(ctx, "dephasing_details.csv");
}

// --- fid -----------------------------------------------------------------

void run_fid(Context& ctx) {
  const PipelineExpectations expect = appendix_pipeline(
      ctx.cfg.signal.fid_phi2, ctx.cfg.signal.a_scale, ctx.cfg.signal.b_scale);
  FidModel truth = ctx.cfg.signal.probe;
  truth.alpha_r = expect.alpha_r;
  truth.alpha_i = expect.alpha_i;
  truth.beta = expect.beta;

  std::vector<double> times(static_cast<std::size_t>(ctx.cfg.signal.n_samples));
  for (std::size_t j = 0; j < times.size(); ++j)
    times[j] = ctx.cfg.signal.duration * static_cast<double>(j) /
               static_cast<double>(times.size() - 1);
  Rng rng = Rng::stream(ctx.cfg.seed, 0xf1d);
  const std::vector<double> series =
      synthesize_fid(truth, times, ctx.cfg.signal.noise_sigma, rng);

  CsvWriter csv(ctx.out_dir / "fid.csv", "t_s,delta_alpha_rad");
  for (std::size_t j = 0; j < times.size(); ++j)
    csv.row({times[j], series[j]});
  emit(ctx, "fid.csv");

  FidModel guess = ctx.cfg.signal.probe;
  guess.alpha_r = 0.25 * ctx.cfg.signal.a_scale;
  const FitResult fit = fit_fid(times, series, guess, default_frozen_mask());
  std::ofstream fit_out(ctx.out_dir / "fid_fit.json");
  fit_out << fit_result_to_json(fit).dump(2) << '\n';
  emit(ctx, "fid_fit.json");
}

// --- fieldmap ------------------------------------------------------------

void run_fieldmap(Context& ctx) {
  std::vector<Eigen::Vector3d> grid;
  const double r = ctx.cfg.cell.radius;
  const int half = 4;
  for (int ix = -half; ix <= half; ++ix)
    for (int iy = -half; iy <= half; ++iy)
      for (int iz = -half; iz <= half; ++iz) {
        const Eigen::Vector3d p =
            ctx.cfg.cell.center +
            (r / half) * Eigen::Vector3d(ix, iy, iz) * 0.999;
        if ((p - ctx.cfg.cell.center).norm() <= r) grid.push_back(p);
      }
  CsvWriter csv(ctx.out_dir / "fieldmap.csv", "x,y,z,bx,by,bz");
  for (const auto& sample : field_scale_map(ctx.cfg.coils, grid))
    csv.row({sample.point.x(), sample.point.y(), sample.point.z(),
             sample.b.x(), sample.b.y(), sample.b.z()});
  emit(ctx, "fieldmap.csv");
}

// --- plot script ---------------------------------------------------------

void write_plot_script(Context& ctx) {
  std::ofstream gp(ctx.out_dir / "plots.gp");
  gp << "# gnuplot script over the CSV artifacts of this run\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set terminal pngcairo size 900,600\n";
  auto have = [&ctx](const std::string& name) {
    for (const auto& f : *ctx.files)
      if (f == name) return true;
    return false;
  };
  if (have("trace.csv"))
    gp << "set output 'trace.png'\n"
          "set xlabel 't [s]'; set ylabel 'I [A]'\n"
          "plot 'trace.csv' using 1:2 with lines\n";
  if (have("phases.csv"))
    gp << "set output 'larmor_rates.png'\n"
          "set xlabel 't [s]'; set ylabel 'rad/s'\n"
          "plot 'phases.csv' using 1:2 with lines, '' using 1:3 with lines\n"
          "set output 'phases.png'\n"
          "set ylabel 'phase [rad]'\n"
          "plot 'phases.csv' using 1:4 with lines, '' using 1:5 with lines\n";
  if (have("alpha_vs_tau.csv"))
    gp << "set output 'alpha_vs_tau.png'\n"
          "set xlabel 'tau [s]'; set ylabel 'alpha_R'\n"
          "plot 'alpha_vs_tau.csv' using 1:3 with lines, '' using 1:4 "
          "with points\n";
  if (have("phase_scaling.csv"))
    gp << "set output 'phase_scaling.png'\n"
          "set xlabel 'tau [s]'; set ylabel 'phi2 [rad]'\n"
          "plot for [v in system(\"awk -F, 'NR>1{print $1}' "
          "phase_scaling.csv | sort -u\")] 'phase_scaling.csv' "
          "using (strcol(1) eq v ? $2 : NaN):3 with lines title 'V='.v\n";
  if (have("dephasing.csv"))
    gp << "set output 'dephasing.png'\n"
          "set xlabel 'n (pi cycles)'; set ylabel 'amplitude'\n"
          "plot for [f in system(\"awk -F, 'NR>1{print $1}' dephasing.csv "
          "| sort -u\")] 'dephasing.csv' using (strcol(1) eq f ? $2 : "
          "NaN):3:4 with yerrorlines title f.' Hz'\n";
  if (have("fid.csv"))
    gp << "set output 'fid.png'\n"
          "set xlabel 't [s]'; set ylabel 'rotation [rad]'\n"
          "plot 'fid.csv' using 1:2 with points pointsize 0.3\n";
  ctx.files->push_back("plots.gp");
}

}  // namespace

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> names = {
      "circuit", "phases",    "alpha-vs-tau", "phase-scaling",
      "dephasing", "fid",     "fieldmap",     "all"};
  return names;
}

RunReport run_subcommand(const nlohmann::json& effective_config,
                         const RunOptions& options) {
  ExperimentConfig cfg = parse_config(effective_config);
  if (options.has_seed_override) {
    cfg.seed = options.seed_override;
    cfg.montecarlo.rng_seed = options.seed_override;
  }
  if (options.threads > 0) cfg.montecarlo.threads = options.threads;
  if (!options.output_dir.empty()) cfg.output_dir = options.output_dir;

  bool known = false;
  for (const auto& name : known_subcommands()) known |= name == options.subcommand;
  if (!known)
    throw std::invalid_argument("unknown subcommand '" + options.subcommand +
                                "'");

  RunReport report;
  report.manifest["subcommand"] = options.subcommand;
  report.manifest["seed"] = cfg.seed;
  report.manifest["config_sha256"] = sha256_hex(effective_config.dump());
  report.manifest["versions"] = {{"qzeeman", "0.1.0"},
                                 {"schema", cfg.schema_version}};
  report.manifest["started"] = iso_timestamp();

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  Context ctx{cfg, out_dir, &report.files};
  using Step = void (*)(Context&);
  const std::vector<std::pair<std::string, Step>> steps = {
      {"circuit", run_circuit},     {"phases", run_phases},
      {"alpha-vs-tau", run_alpha_vs_tau}, {"phase-scaling", run_phase_scaling},
      {"dephasing", run_dephasing}, {"fid", run_fid},
      {"fieldmap", run_fieldmap}};

  nlohmann::json failures = nlohmann::json::array();
  for (const auto& [name, step] : steps) {
    if (options.subcommand != "all" && options.subcommand != name) continue;
    try {
      step(ctx);
    } catch (const std::exception& err) {
      if (options.subcommand != "all") throw;
      failures.push_back({{"subcommand", name}, {"error", err.what()}});
      report.ok = false;
    }
  }
  write_plot_script(ctx);

  report.manifest["failures"] = failures;
  report.manifest["finished"] = iso_timestamp();
  report.manifest["files"] = report.files;
  std::ofstream manifest_out(out_dir / "manifest.json");
  manifest_out << report.manifest.dump(2) << '\n';
  return report;
}

}  // namespace qzeeman
