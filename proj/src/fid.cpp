#include "qzeeman/fid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qzeeman/constants.hpp"
#include "qzeeman/spin.hpp"

namespace qzeeman {

const std::array<const char*, FidModel::n_params>& FidModel::param_names() {
  static const std::array<const char*, n_params> names = {
      "chi", "gamma", "omega_L", "alpha_R", "alpha_I", "beta", "V_R", "V_I"};
  return names;
}

double FidModel::param(int idx) const {
  switch (idx) {
    case 0: return chi;
    case 1: return gamma;
    case 2: return omega_l;
    case 3: return alpha_r;
    case 4: return alpha_i;
    case 5: return beta;
    case 6: return v_r;
    case 7: return v_i;
  }
  throw std::out_of_range("FidModel: bad parameter index");
}

void FidModel::set_param(int idx, double value) {
  switch (idx) {
    case 0: chi = value; return;
    case 1: gamma = value; return;
    case 2: omega_l = value; return;
    case 3: alpha_r = value; return;
    case 4: alpha_i = value; return;
    case 5: beta = value; return;
    case 6: v_r = value; return;
    case 7: v_i = value; return;
  }
  throw std::out_of_range("FidModel: bad parameter index");
}

double FidModel::evaluate(double t) const {
  const double envelope = chi * std::exp(-gamma * t);
  const double phase = 2.0 * omega_l * t;
  return envelope * (alpha_r * v_r * std::sin(phase) +
                     alpha_i * v_r * std::cos(phase) - beta * v_i);
}

std::vector<double> synthesize_fid(const FidModel& model,
                                   const std::vector<double>& times,
                                   double noise_sigma, Rng& rng) {
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("synthesize_fid: times must be sorted");
  std::vector<double> out;
  out.reserve(times.size());
  for (const double t : times) {
    double y = model.evaluate(t);
    if (noise_sigma > 0.0) y += noise_sigma * rng.normal();
    out.push_back(y);
  }
  return out;
}

double spectral_peak_frequency(const std::vector<double>& times,
                               const std::vector<double>& values) {
  const std::size_t n = times.size();
  if (n < 4 || values.size() != n)
    throw std::invalid_argument("spectrum: need at least 4 samples");
  const double span = times.back() - times.front();
  double mean = 0.0;
  for (const double y : values) mean += y;
  mean /= static_cast<double>(n);

  double best_power = -1.0;
  double best_freq = 0.0;
  const std::size_t n_bins = n / 2;
  for (std::size_t k = 1; k <= n_bins; ++k) {
    const double f = static_cast<double>(k) / span;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double arg = constants::two_pi * f * (times[j] - times.front());
      const double y = values[j] - mean;
      re += y * std::cos(arg);
      im -= y * std::sin(arg);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_freq = f;
    }
  }
  return best_freq;
}

namespace {

void jacobian_row(const FidModel& m, double t,
                  std::array<double, FidModel::n_params>& row) {
  const double envelope = std::exp(-m.gamma * t);
  const double phase = 2.0 * m.omega_l * t;
  const double s = std::sin(phase);
  const double c = std::cos(phase);
  const double core = m.alpha_r * m.v_r * s + m.alpha_i * m.v_r * c -
                      m.beta * m.v_i;
  row[0] = envelope * core;                                        // chi
  row[1] = -t * m.chi * envelope * core;                           // gamma
  row[2] = m.chi * envelope * 2.0 * t * m.v_r *
           (m.alpha_r * c - m.alpha_i * s);                        // omega_L
  row[3] = m.chi * envelope * m.v_r * s;                           // alpha_R
  row[4] = m.chi * envelope * m.v_r * c;                           // alpha_I
  row[5] = -m.chi * envelope * m.v_i;                              // beta
  row[6] = m.chi * envelope * (m.alpha_r * s + m.alpha_i * c);     // V_R
  row[7] = -m.chi * envelope * m.beta;                             // V_I
}

double sum_squared_residuals(const FidModel& m,
                             const std::vector<double>& times,
                             const std::vector<double>& values) {
  double ssr = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double r = m.evaluate(times[j]) - values[j];
    ssr += r * r;
  }
  return ssr;
}

}  // namespace

std::array<bool, FidModel::n_params> default_frozen_mask() {
  std::array<bool, FidModel::n_params> frozen{};
  frozen[0] = true;  // chi
  frozen[6] = true;  // V_R
  frozen[7] = true;  // V_I
  return frozen;
}

FitResult fit_fid(const std::vector<double>& times,
                  const std::vector<double>& values, FidModel guess,
                  const std::array<bool, FidModel::n_params>& frozen) {
  const std::size_t n = times.size();
  if (values.size() != n)
    throw std::invalid_argument("fit_fid: times/values size mismatch");

  std::vector<int> free_idx;
  for (int i = 0; i < FidModel::n_params; ++i)
    if (!frozen[i]) free_idx.push_back(i);
  if (free_idx.empty())
    throw std::domain_error("fit_fid: every parameter is frozen");
  const std::size_t k = free_idx.size();
  if (n < 8 * k)
    throw std::invalid_argument(
        "fit_fid: need at least 8 samples per free parameter");

  if (!frozen[2] && guess.omega_l <= 0.0)
    guess.omega_l = constants::pi * spectral_peak_frequency(times, values);

  FidModel model = guess;
  double ssr = sum_squared_residuals(model, times, values);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  Eigen::MatrixXd jac(n, k);
  Eigen::VectorXd resid(n);
  std::array<double, FidModel::n_params> row{};

  for (iter = 0; iter < 200; ++iter) {
    for (std::size_t j = 0; j < n; ++j) {
      jacobian_row(model, times[j], row);
      for (std::size_t c = 0; c < k; ++c) jac(j, c) = row[free_idx[c]];
      resid(j) = model.evaluate(times[j]) - values[j];
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * resid;

    const double y_scale = std::sqrt(ssr / static_cast<double>(n));
    if (g.lpNorm<Eigen::Infinity>() <
        1e-12 * std::max(1e-300, y_scale) * static_cast<double>(n)) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = jtj(c, c);
        damped(c, c) += lambda * (d > 0.0 ? d : 1.0);
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      FidModel trial = model;
      for (std::size_t c = 0; c < k; ++c)
        trial.set_param(free_idx[c],
                        model.param(free_idx[c]) + delta(c));
      const double trial_ssr = sum_squared_residuals(trial, times, values);
      if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
        double rel_step = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double scale =
              std::max(std::abs(model.param(free_idx[c])), 1e-12);
          rel_step = std::max(rel_step, std::abs(delta(c)) / scale);
        }
        const double rel_drop = (ssr - trial_ssr) / std::max(ssr, 1e-300);
        model = trial;
        ssr = trial_ssr;
        lambda = std::max(lambda / 3.0, 1e-14);
        stepped = true;
        if (rel_step < 1e-12 || rel_drop < 1e-14) converged = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e14) break;
    }
    if (!stepped || converged) {
      converged = converged || ssr == 0.0;
      break;
    }
  }

  FitResult result;
  result.model = model;
  result.converged = converged;
  result.iterations = iter;
  result.residual_rms = std::sqrt(ssr / static_cast<double>(n));

  // Parameter covariance from the (undamped) normal equations.
  for (std::size_t j = 0; j < n; ++j) {
    jacobian_row(model, times[j], row);
    for (std::size_t c = 0; c < k; ++c) jac(j, c) = row[free_idx[c]];
  }
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double dof = static_cast<double>(n > k ? n - k : 1);
  const double sigma_sq = ssr / dof;
  const Eigen::MatrixXd cov =
      sigma_sq * jtj.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  result.std_errors.fill(0.0);
  for (std::size_t c = 0; c < k; ++c)
    result.std_errors[free_idx[c]] = std::sqrt(std::max(0.0, cov(c, c)));
  return result;
}

nlohmann::json fit_result_to_json(const FitResult& result) {
  nlohmann::json j;
  const auto& names = FidModel::param_names();
  for (int i = 0; i < FidModel::n_params; ++i) {
    j["parameters"][names[i]] = result.model.param(i);
    j["std_errors"][names[i]] = result.std_errors[i];
  }
  j["residual_rms"] = result.residual_rms;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  return j;
}

std::vector<AmplitudeVsTauRow> amplitude_vs_tau(
    const AmplitudeVsTauConfig& config) {
  std::vector<double> times(static_cast<std::size_t>(config.n_samples));
  for (std::size_t j = 0; j < times.size(); ++j)
    times[j] = config.duration * static_cast<double>(j) /
               static_cast<double>(times.size() - 1);

  const auto n_rows = config.taus.size();
  std::vector<AmplitudeVsTauRow> rows(n_rows);

  auto run_point = [&](std::size_t idx) {
    CircuitParams params = config.circuit;
    params.pulse_length = config.taus[idx];
    const CurrentTrace trace = simulate_pulse(params);
    const PhasePair phases =
        phases_from_trace(trace, config.field_per_ampere, config.coeffs);
    const PipelineExpectations expect =
        appendix_pipeline(phases.phi2, config.a_scale, config.b_scale);

    FidModel truth = config.probe;
    truth.alpha_r = expect.alpha_r;
    truth.alpha_i = expect.alpha_i;
    truth.beta = expect.beta;

    Rng rng = Rng::stream(config.seed, idx);
    const std::vector<double> series =
        synthesize_fid(truth, times, config.noise_sigma, rng);

    FidModel guess = config.probe;
    guess.alpha_r = 0.25 * config.a_scale;
    guess.alpha_i = 0.0;
    guess.beta = 0.0;
    const FitResult fit = fit_fid(times, series, guess, default_frozen_mask());

    AmplitudeVsTauRow row;
    row.tau = config.taus[idx];
    row.phi2 = phases.phi2;
    row.alpha_r_direct = expect.alpha_r;
    row.alpha_r_fit = fit.model.alpha_r;
    rows[idx] = row;
  };

  if (config.threads <= 1) {
    for (std::size_t i = 0; i < n_rows; ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> work;
    const int workers =
        std::min<int>(config.threads, static_cast<int>(n_rows));
    for (int w = 0; w < workers; ++w)
      work.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t i = next.fetch_add(1); i < n_rows;
             i = next.fetch_add(1))
          run_point(i);
      }));
    for (auto& f : work) f.get();
  }
  return rows;
}

}  // namespace qzeeman
