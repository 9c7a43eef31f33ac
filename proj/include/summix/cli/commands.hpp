#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "summix/bench/measure.hpp"

namespace summix {

enum ExitCode : int { kExitOk = 0, kExitCheckFailure = 1, kExitUsage = 2 };

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> config_paths;
  std::vector<std::string> presets;
  std::uint64_t seed = 0;
  std::string out_dir = "summix-out";
  std::optional<std::string> precision;  // per-command default when absent
  std::optional<std::size_t> repeats;
  std::vector<double> l_grid;            // seconds; per-command default when empty
  std::size_t threads = 1;
  std::size_t warmup = 2;
  // gradcheck
  std::string filter;
  bool corrupt_gradient = false;
  // train-toy
  std::size_t steps = 500;
  std::size_t batch = 16;
  double learning_rate = 0.1;
  std::string optimizer = "sgd";
  // rtf: decode with trained parameters instead of a random init
  std::string checkpoint;
  // verify-report
  std::string report;
  std::string csv;
};

// Parses "a,b,c" into positive durations; throws ConfigError.
std::vector<double> parse_grid(const std::string& text);

// Configs from --config files (id = file stem) then --preset names, or the
// command's defaults when neither is given.
std::vector<NamedConfig> resolve_configs(const RunConfig& run, const std::vector<std::string>& default_presets);

// Each returns an ExitCode. Library errors propagate as exceptions; the
// driver maps ConfigError to kExitUsage and NumericError to kExitCheckFailure.
int cmd_gradcheck(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_rtf(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_train_toy(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_verify_report(const RunConfig& run, std::ostream& out, std::ostream& err);

// Dispatches on run.subcommand and applies the exception mapping.
int run_command(const RunConfig& run, std::ostream& out, std::ostream& err);

}  // namespace summix
