#pragma once

#include <cstddef>
#include <vector>

#include "summix/numcore/tape.hpp"
#include "summix/numcore/tensor.hpp"

namespace summix {

// Batch of variable-length feature sequences, values shaped [B, T_max, D].
// Frames at t >= lengths[b] carry no meaning; library ops never read them and
// always write zeros there.
template <typename Real>
struct MaskedBatch {
  Tensor<Real> values;
  std::vector<int> lengths;

  std::size_t batch() const { return values.dim(0); }
  std::size_t time() const { return values.dim(1); }
  std::size_t features() const { return values.dim(2); }
};

// On-tape counterpart of MaskedBatch.
template <typename Real>
struct Sequence {
  Var<Real> values;
  std::vector<int> lengths;

  std::size_t batch() const { return values.shape()[0]; }
  std::size_t time() const { return values.shape()[1]; }
  std::size_t features() const { return values.shape()[2]; }
};

// Throws unless values is rank 3 with one length per row, each in [1, T].
void validate_lengths(const Shape& shape, const std::vector<int>& lengths,
                      const char* where);

template <typename Real>
void validate(const MaskedBatch<Real>& batch) {
  validate_lengths(batch.values.shape(), batch.lengths, "MaskedBatch");
}

// Writes zeros into every padded frame.
template <typename Real>
void zero_padding(Tensor<Real>& values, const std::vector<int>& lengths) {
  const std::size_t T = values.dim(1), D = values.dim(2);
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    for (std::size_t t = static_cast<std::size_t>(lengths[b]); t < T; ++t) {
      Real* row = values.data() + (b * T + t) * D;
      std::fill(row, row + D, Real(0));
    }
  }
}

template <typename Real>
Sequence<Real> as_constant(Tape<Real>& tape, const MaskedBatch<Real>& batch) {
  validate(batch);
  Tensor<Real> v = batch.values;
  zero_padding(v, batch.lengths);
  return {tape.constant(std::move(v)), batch.lengths};
}

// Input whose values are a parameter, so the tape reports input gradients.
template <typename Real>
Sequence<Real> as_tracked(Tape<Real>& tape, const Parameter<Real>& values,
                          const std::vector<int>& lengths) {
  validate_lengths(values.value.shape(), lengths, "as_tracked");
  return {tape.param(values), lengths};
}

template <typename Real>
MaskedBatch<Real> to_batch(const Sequence<Real>& seq) {
  return {seq.values.value(), seq.lengths};
}

}  // namespace summix
