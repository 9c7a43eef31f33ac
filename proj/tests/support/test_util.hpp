#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "summix/numcore/gradcheck.hpp"
#include "summix/numcore/ops.hpp"
#include "support/oracles.hpp"

namespace summix::testing {

// Fills every parameter with N(0, scale^2); layer-norm gains centred on 1.
inline void randomize(const ParameterList<double>& params, Rng& rng, double scale = 0.5) {
  for (Parameter<double>* p : params) {
    const bool gain = p->name.size() >= 4 && p->name.compare(p->name.size() - 4, 4, "gain") == 0;
    for (auto& v : p->value.vec()) v = (gain ? 1.0 : 0.0) + scale * rng.normal();
  }
}

// Random linear scalar loss over a sequence's valid frames.
inline Var<double> linear_loss(Tape<double>& tape, const Sequence<double>& y, const Tensor<double>& w) {
  return weighted_sum(tape, y.values, w);
}

// Gradcheck assertion that names the worst coordinate on failure.
inline ::testing::AssertionResult within(const GradcheckResult& r, double tolerance) {
  std::ostringstream os;
  os << "max relative error " << r.max_relative_error << " at " << r.worst_parameter << "[" << r.worst_index
     << "] analytic " << r.worst_analytic << " numeric " << r.worst_numeric;
  if (r.max_relative_error <= tolerance) return ::testing::AssertionSuccess() << os.str();
  return ::testing::AssertionFailure() << os.str() << " exceeds " << tolerance;
}

}  // namespace summix::testing
