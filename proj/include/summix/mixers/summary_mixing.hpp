#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "summix/numcore/ops.hpp"

namespace summix {

// n untied dense layers applied to n equal slices of the feature dimension,
// outputs concatenated. One chunk is an ordinary dense layer.
template <typename Real>
struct ChunkedDense {
  std::vector<DenseGelu<Real>> chunks;

  // Throws ConfigError unless `num_chunks` divides both dims.
  static ChunkedDense create(std::size_t in, std::size_t out, std::size_t num_chunks,
                             Activation act, Rng& rng, const std::string& name);

  std::size_t num_chunks() const { return chunks.size(); }
  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t num_weights() const;
  std::size_t num_parameters() const;
  void collect(ParameterList<Real>& out);
};

template <typename Real>
Sequence<Real> chunked_dense_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                     const ChunkedDense<Real>& layer);

struct SummaryMixingDims {
  std::size_t input = 0;
  std::size_t local = 0;    // f output; 0 means `input`
  std::size_t summary = 0;  // s output; 0 means `input`
  std::size_t output = 0;   // c output; 0 means `input`
  std::size_t chunks = 4;
};

// f, s and c of the summary-mixing cell, each a dense layer followed by GeLU.
// f and s may be input-chunked; c sees the full concatenation [f(x_t) | s_bar].
template <typename Real>
struct SummaryMixingParams {
  ChunkedDense<Real> local;
  ChunkedDense<Real> summary;
  DenseGelu<Real> combiner;

  static SummaryMixingParams create(const SummaryMixingDims& dims, Rng& rng,
                                    const std::string& name);

  std::size_t num_chunks() const { return local.num_chunks(); }
  std::size_t num_parameters() const {
    return local.num_parameters() + summary.num_parameters() + combiner.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    local.collect(out);
    summary.collect(out);
    combiner.collect(out);
  }
};

// h_t = c([f(x_t) | s_bar]) with s_bar the mean of s(x_t) over the valid
// frames of each sequence. Linear in T.
template <typename Real>
Sequence<Real> summary_mixing_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                      const SummaryMixingParams<Real>& params);

// The combine step on its own: c([local_t | mean_t s(summary_input_t)]).
// The lite Branchformer feeds its cgMLP output in as `local`.
template <typename Real>
Sequence<Real> summary_mixing_combine(Tape<Real>& tape, const Sequence<Real>& local,
                                      const Sequence<Real>& summary_input,
                                      const ChunkedDense<Real>& summary,
                                      const DenseGelu<Real>& combiner);

// Weights (biases excluded) of one chunked [dim -> dim] layer: (dim/n)^2 * n.
std::size_t summary_mixing_chunked_param_count(std::size_t dim, std::size_t chunks);

}  // namespace summix
