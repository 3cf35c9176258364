#include "qzeeman/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "qzeeman/constants.hpp"

namespace qzeeman {

std::vector<double> SweepSection::taus() const {
  if (!tau_list.empty()) return tau_list;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(tau_count));
  for (int i = 0; i < tau_count; ++i)
    out.push_back(tau_min + (tau_max - tau_min) * static_cast<double>(i) /
                                static_cast<double>(std::max(1, tau_count - 1)));
  return out;
}

double ExperimentConfig::effective_field_per_ampere() const {
  if (field_per_ampere > 0.0) return field_per_ampere;
  return center_field_per_ampere(coils);
}

void ExperimentConfig::validate() const {
  if (schema_version != 1)
    throw std::invalid_argument("config: unsupported schema_version");
  species.validate();
  circuit.validate();
  coils.validate();
  cell.validate();
  montecarlo.validate();
  if (!(signal.probe.gamma >= 0.0))
    throw std::invalid_argument("config signal: gamma must be >= 0");
  if (signal.n_samples < 16)
    throw std::invalid_argument("config signal: n_samples too small");
  if (!(signal.duration > 0.0))
    throw std::invalid_argument("config signal: duration must be > 0");
  if (signal.noise_sigma < 0.0)
    throw std::invalid_argument("config signal: noise_sigma must be >= 0");
  if (sweep.tau_count < 2)
    throw std::invalid_argument("config sweep: tau_count must be >= 2");
  if (sweep.n_pi_max < 1)
    throw std::invalid_argument("config sweep: n_pi_max must be >= 1");
  for (double tau : sweep.taus())
    if (tau < 0.0)
      throw std::invalid_argument("config sweep: pulse lengths must be >= 0");
  if (mode != "motionless" && mode != "montecarlo")
    throw std::invalid_argument(
        "config pipeline: mode must be 'motionless' or 'montecarlo'");
}

nlohmann::json default_config_json() {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["seed"] = 20260809;
  j["output_dir"] = "out";
  j["species"] = {{"name", "87Rb"},
                  {"I", 1.5},
                  {"gI", -0.0009951414},
                  {"gJ", 2.00233113},
                  {"dE_hfs_Hz", 6.834682610904e9},
                  {"mass_u", 86.909180527}};
  j["circuit"] = {{"R_ohm", 3.3},
                  {"extra_R_ohm", 0.0},
                  {"L_H", 25e-6},
                  {"C_F", 10e-9},
                  {"V_volts", 23.0},
                  {"drive_frequency_hz", 326e3},
                  {"pulse_length_s", 100e-6},
                  {"tail_length_s", -1.0},
                  {"sample_rate_hz", -1.0}};
  j["coils"] = {{"loop_radius_m", 0.025},
                {"turns_per_coil", 10},
                {"separation_m", 0.025},
                {"axis", {0.0, 1.0, 0.0}},
                {"center", {0.0, 0.0, 0.0}}};
  j["cell"] = {{"radius_m", 0.0185}, {"center", {0.0, 0.0, 0.0}}};
  j["montecarlo"] = {{"n_particles", 10000},
                     {"temperature_C", 38.0},
                     {"steps_per_cycle", 200},
                     {"homogeneous_field", false},
                     {"linear_full_vector", true},
                     {"interleaved_quadratic", false},
                     {"cosine_law_walls", false},
                     {"evolution_window_s", -1.0},
                     {"threads", 1}};
  j["signal"] = {{"chi", 1.0},
                 {"gamma_per_s", 50.0},
                 {"omega_L_rad_per_s", constants::two_pi * 2.5e3},
                 {"V_R", 1.0},
                 {"V_I", 1.0},
                 {"A_scale", 1.0},
                 {"B_scale", 1.0},
                 {"noise_sigma", 0.0},
                 {"n_samples", 2000},
                 {"duration_s", 0.1},
                 {"fid_phi2_rad", 0.0}};
  j["pipeline"] = {{"field_per_ampere_T_per_A", -1.0}, {"mode", "motionless"}};
  j["sweep"] = {{"tau_list_s", nlohmann::json::array()},
                {"tau_min_s", 0.0},
                {"tau_max_s", 1.2e-4},
                {"tau_count", 61},
                {"voltage_list_V", {12.0, 24.0}},
                {"frequency_list_hz", {100e3, 140e3, 200e3, 326e3}},
                {"n_pi_max", 6},
                {"retune_capacitance", true},
                {"tau_solve_max_s", 1e-3}};
  return j;
}

namespace {

void merge_strict(nlohmann::json& base, const nlohmann::json& user,
                  const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key()))
      throw std::invalid_argument("config: unknown key '" + key_path + "'");
    if (base[it.key()].is_object() && it.value().is_object())
      merge_strict(base[it.key()], it.value(), key_path);
    else
      base[it.key()] = it.value();
  }
}

Eigen::Vector3d vec3_from(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("config: " + what + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

nlohmann::json effective_config_json(const nlohmann::json& user) {
  nlohmann::json merged = default_config_json();
  if (!user.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");
  merge_strict(merged, user, "");
  return merged;
}

ExperimentConfig parse_config(const nlohmann::json& user) {
  const nlohmann::json j = effective_config_json(user);
  ExperimentConfig cfg;
  cfg.schema_version = j.at("schema_version").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.output_dir = j.at("output_dir").get<std::string>();
  cfg.species = species_from_json(j.at("species"));

  const auto& c = j.at("circuit");
  cfg.circuit.resistance = c.at("R_ohm").get<double>();
  cfg.circuit.extra_resistance = c.at("extra_R_ohm").get<double>();
  cfg.circuit.inductance = c.at("L_H").get<double>();
  cfg.circuit.capacitance = c.at("C_F").get<double>();
  cfg.circuit.supply_voltage = c.at("V_volts").get<double>();
  cfg.circuit.drive_frequency = c.at("drive_frequency_hz").get<double>();
  cfg.circuit.pulse_length = c.at("pulse_length_s").get<double>();
  cfg.circuit.tail_length = c.at("tail_length_s").get<double>();
  cfg.circuit.sample_rate = c.at("sample_rate_hz").get<double>();

  const auto& co = j.at("coils");
  cfg.coils.loop_radius = co.at("loop_radius_m").get<double>();
  cfg.coils.turns_per_coil = co.at("turns_per_coil").get<int>();
  cfg.coils.separation = co.at("separation_m").get<double>();
  cfg.coils.axis = vec3_from(co.at("axis"), "coils.axis");
  cfg.coils.center = vec3_from(co.at("center"), "coils.center");

  const auto& ce = j.at("cell");
  cfg.cell.radius = ce.at("radius_m").get<double>();
  cfg.cell.center = vec3_from(ce.at("center"), "cell.center");

  const auto& m = j.at("montecarlo");
  cfg.montecarlo.n_particles = m.at("n_particles").get<int>();
  cfg.montecarlo.temperature =
      constants::celsius_to_kelvin(m.at("temperature_C").get<double>());
  cfg.montecarlo.steps_per_cycle = m.at("steps_per_cycle").get<int>();
  cfg.montecarlo.homogeneous_field = m.at("homogeneous_field").get<bool>();
  cfg.montecarlo.linear_full_vector = m.at("linear_full_vector").get<bool>();
  cfg.montecarlo.interleaved_quadratic =
      m.at("interleaved_quadratic").get<bool>();
  cfg.montecarlo.cosine_law_walls = m.at("cosine_law_walls").get<bool>();
  cfg.montecarlo.evolution_window = m.at("evolution_window_s").get<double>();
  cfg.montecarlo.threads = m.at("threads").get<int>();
  cfg.montecarlo.species = cfg.species;
  cfg.montecarlo.cell = cfg.cell;
  cfg.montecarlo.coils = cfg.coils;
  cfg.montecarlo.circuit = cfg.circuit;
  cfg.montecarlo.rng_seed = cfg.seed;

  const auto& s = j.at("signal");
  cfg.signal.probe.chi = s.at("chi").get<double>();
  cfg.signal.probe.gamma = s.at("gamma_per_s").get<double>();
  cfg.signal.probe.omega_l = s.at("omega_L_rad_per_s").get<double>();
  cfg.signal.probe.v_r = s.at("V_R").get<double>();
  cfg.signal.probe.v_i = s.at("V_I").get<double>();
  cfg.signal.a_scale = s.at("A_scale").get<double>();
  cfg.signal.b_scale = s.at("B_scale").get<double>();
  cfg.signal.noise_sigma = s.at("noise_sigma").get<double>();
  cfg.signal.n_samples = s.at("n_samples").get<int>();
  cfg.signal.duration = s.at("duration_s").get<double>();
  cfg.signal.fid_phi2 = s.at("fid_phi2_rad").get<double>();

  const auto& p = j.at("pipeline");
  cfg.field_per_ampere = p.at("field_per_ampere_T_per_A").get<double>();
  cfg.mode = p.at("mode").get<std::string>();

  const auto& sw = j.at("sweep");
  cfg.sweep.tau_list = sw.at("tau_list_s").get<std::vector<double>>();
  cfg.sweep.tau_min = sw.at("tau_min_s").get<double>();
  cfg.sweep.tau_max = sw.at("tau_max_s").get<double>();
  cfg.sweep.tau_count = sw.at("tau_count").get<int>();
  cfg.sweep.voltage_list = sw.at("voltage_list_V").get<std::vector<double>>();
  cfg.sweep.frequency_list =
      sw.at("frequency_list_hz").get<std::vector<double>>();
  cfg.sweep.n_pi_max = sw.at("n_pi_max").get<int>();
  cfg.sweep.retune_capacitance = sw.at("retune_capacitance").get<bool>();
  cfg.sweep.tau_solve_max = sw.at("tau_solve_max_s").get<double>();

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json user;
  try {
    user = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    std::size_t line = 1;
    const std::size_t limit = std::min(err.byte, text.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (text[i] == '\n') ++line;
    throw std::invalid_argument(path + ":" + std::to_string(line) + ": " +
                                err.what());
  }
  return parse_config(user);
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like section.key=value");
  const std::string dotted = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty())
      throw std::invalid_argument("override: empty key in '" + dotted + "'");
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string sha256_hex(const std::string& payload) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(payload.data(), payload.size(), digest, &length, EVP_sha256(),
             nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace qzeeman
