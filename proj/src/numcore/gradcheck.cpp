#include "summix/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "summix/numcore/error.hpp"
#include "summix/numcore/rng.hpp"

namespace summix {
namespace {

double evaluate(const LossFunction& loss_fn) {
  Tape<double> tape(false);
  const Var<double> loss = loss_fn(tape);
  const double v = loss.value()[0];
  if (!std::isfinite(v)) throw NumericError("finite_difference_check: loss is not finite (" + std::to_string(v) + ")");
  return v;
}

std::vector<std::size_t> sample_coordinates(std::size_t size, std::size_t budget, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size <= budget) return idx;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < budget; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(size - 1)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(budget);
  return idx;
}

}  // namespace

GradcheckResult finite_difference_check(const LossFunction& loss_fn,
                                        const ParameterList<double>& params,
                                        const GradcheckOptions& options) {
  GradcheckResult result;
  if (params.empty()) return result;

  std::vector<Tensor<double>> analytic;
  {
    Tape<double> tape(true);
    const Var<double> loss = loss_fn(tape);
    if (!std::isfinite(loss.value()[0])) {
      throw NumericError("finite_difference_check: loss is not finite");
    }
    tape.backward(loss);
    for (const Parameter<double>* p : params) analytic.push_back(tape.grad(*p));
  }

  Rng rng(options.seed);
  const double h = options.step;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<double>& p = *params[pi];
    for (std::size_t i : sample_coordinates(p.value.size(), options.coords_per_parameter, rng)) {
      const double original = p.value[i];
      p.value[i] = original + h;
      const double up = evaluate(loss_fn);
      p.value[i] = original - h;
      const double down = evaluate(loss_fn);
      p.value[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      double g = analytic[pi][i];
      if (options.corrupt_analytic) g += 1e-3 * (1.0 + std::abs(g));
      const double err = std::abs(g - numeric) / std::max(1e-8, std::abs(g) + std::abs(numeric));
      ++result.coordinates_checked;
      if (err > result.max_relative_error || result.coordinates_checked == 1) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        if (err >= result.max_relative_error) {
          result.worst_parameter = p.name;
          result.worst_index = i;
          result.worst_analytic = g;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace summix
