#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "summix/numcore/tape.hpp"

namespace summix {

enum class DifferenceMode { kCentral };

struct GradcheckOptions {
  double step = 1e-5;
  DifferenceMode mode = DifferenceMode::kCentral;
  // Coordinates sampled per parameter; parameters at or below this many
  // entries are checked exhaustively.
  std::size_t coords_per_parameter = 24;
  std::uint64_t seed = 0;
  // Negative-control hook: skews every analytic gradient before comparison.
  bool corrupt_analytic = false;
};

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

using LossFunction = std::function<Var<double>(Tape<double>&)>;

// Compares tape gradients of a scalar loss against central differences.
// Error per coordinate is |g_tape - g_fd| / max(1e-8, |g_tape| + |g_fd|).
// An empty parameter list is a vacuous pass. Throws NumericError when the
// loss is not finite.
GradcheckResult finite_difference_check(const LossFunction& loss_fn,
                                        const ParameterList<double>& params,
                                        const GradcheckOptions& options = {});

}  // namespace summix
