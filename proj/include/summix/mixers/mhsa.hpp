#pragma once

#include <cstddef>
#include <string>

#include "summix/numcore/ops.hpp"

namespace summix {

// Multi-head self-attention. The per-head [D -> D/h] query/key/value maps are
// stored side by side as one [D -> D] projection each. The key projection has
// no bias.
template <typename Real>
struct MhsaParams {
  DenseGelu<Real> query;
  DenseGelu<Real> key;
  DenseGelu<Real> value;
  DenseGelu<Real> output;
  std::size_t heads = 4;

  static MhsaParams create(std::size_t dim, std::size_t heads, Rng& rng, const std::string& name);

  std::size_t num_parameters() const {
    return query.num_parameters() + key.num_parameters() + value.num_parameters() +
           output.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    query.collect(out);
    key.collect(out);
    value.collect(out);
    output.collect(out);
  }
};

template <typename Real>
Sequence<Real> mhsa_forward(Tape<Real>& tape, const Sequence<Real>& x, const MhsaParams<Real>& params);

}  // namespace summix
