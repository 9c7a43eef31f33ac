#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "summix/bench/measure.hpp"

namespace summix {

inline constexpr double kGradcheckTolerance = 1e-5;
inline constexpr double kEncoderGradcheckTolerance = 1e-4;

struct CheckResult {
  std::string name;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = false;
};

struct SuiteOptions {
  std::string filter;       // substring of the check name; empty keeps all
  bool corrupt_gradient = false;
  std::uint64_t seed = 0;
};

// Names of the checks the configs imply, in run order: one per distinct
// mixer, one per distinct block, one full depth-2 encoder per config through
// the CTC loss, plus the frontend, cgMLP, chunked dense layer and CTC loss.
// Dimensions are shrunk to toy size; only the kinds are taken from the configs.
std::vector<std::string> gradcheck_suite_names(const std::vector<NamedConfig>& configs);

std::vector<CheckResult> run_gradcheck_suite(const std::vector<NamedConfig>& configs, const SuiteOptions& options);

}  // namespace summix
