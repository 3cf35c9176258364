#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qzeeman/config.hpp"

// Figure-reproduction subcommands. Each run emits CSV artifacts, a gnuplot
// script, and a JSON manifest (config hash, seed, file list) written last;
// a run is reproducible from the manifest's config hash and seed alone.

namespace qzeeman {

struct RunOptions {
  std::string subcommand;              // circuit, phases, alpha-vs-tau,
                                       // phase-scaling, dephasing, fid,
                                       // fieldmap, all
  std::string output_dir;              // overrides config when non-empty
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  int threads = 0;                     // 0 -> config value
};

struct RunReport {
  std::vector<std::string> files;  // artifacts, relative to output dir
  nlohmann::json manifest;
  bool ok = true;
};

const std::vector<std::string>& known_subcommands();

// Runs one subcommand (or every one for "all") from an already validated
// effective config document. Throws on invalid input; records per-stage
// failures of an "all" run in the manifest instead of aborting the rest.
RunReport run_subcommand(const nlohmann::json& effective_config,
                         const RunOptions& options);

}  // namespace qzeeman
