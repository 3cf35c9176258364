#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qzeeman/config.hpp"
#include "qzeeman/runner.hpp"

namespace {

nlohmann::json read_user_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    std::size_t line = 1;
    const std::size_t limit = std::min<std::size_t>(err.byte, text.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (text[i] == '\n') ++line;
    throw std::invalid_argument(path + ":" + std::to_string(line) + ": " +
                                err.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pulsed quadratic-Zeeman simulator: switched RLC coil driver, spin-1 "
      "phase pipeline, thermal-vapor Monte Carlo, and FID fitting"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  app.add_option("--config", config_path, "experiment config JSON");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--override", overrides,
                 "dotted-path config override, e.g. circuit.V_volts=24");
  app.add_option_function<std::uint64_t>(
      "--seed",
      [&](std::uint64_t value) {
        seed = value;
        seed_set = true;
      },
      "seed override (beats the config seed)");
  app.add_option("--threads", threads, "worker threads (0 = config value)");

  for (const auto& name : qzeeman::known_subcommands())
    app.add_subcommand(name)->silent();
  app.add_subcommand("print-config", "print the effective config and exit")
      ->silent();

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json user = nlohmann::json::object();
    if (!config_path.empty()) user = read_user_config(config_path);
    for (const auto& assignment : overrides)
      qzeeman::apply_override(user, assignment);
    const nlohmann::json effective = qzeeman::effective_config_json(user);

    if (subcommand == "print-config") {
      std::cout << effective.dump(2) << '\n';
      return 0;
    }

    qzeeman::RunOptions options;
    options.subcommand = subcommand;
    options.output_dir = out_dir;
    options.has_seed_override = seed_set;
    options.seed_override = seed;
    options.threads = threads;

    const qzeeman::RunReport report = qzeeman::run_subcommand(effective, options);
    for (const auto& file : report.files) std::cout << file << '\n';
    if (!report.ok) {
      std::cerr << "some stages failed; see manifest.json\n";
      return 2;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
