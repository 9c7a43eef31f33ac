#pragma once

#include <cstddef>
#include <string>

#include "summix/numcore/ops.hpp"

namespace summix {

inline constexpr std::size_t kFrontendMinFrames = 4;

// Two stride-2 convolutions along time (kernel 3, GeLU) with 64 and 32
// filters, then a linear map to the model dim. Features enter as channels.
template <typename Real>
struct FrontendParams {
  Parameter<Real> conv1_weight;  // [3 * input_dim, 64]
  Parameter<Real> conv1_bias;
  Parameter<Real> conv2_weight;  // [3 * 64, 32]
  Parameter<Real> conv2_bias;
  DenseGelu<Real> projection;

  static constexpr std::size_t kKernel = 3;
  static constexpr std::size_t kStride = 2;
  static constexpr std::size_t kFilters1 = 64;
  static constexpr std::size_t kFilters2 = 32;

  static FrontendParams create(std::size_t input_dim, std::size_t model_dim, Rng& rng,
                               const std::string& name);

  std::size_t num_parameters() const {
    return conv1_weight.value.size() + conv1_bias.value.size() + conv2_weight.value.size() +
           conv2_bias.value.size() + projection.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    out.push_back(&conv1_weight);
    out.push_back(&conv1_bias);
    out.push_back(&conv2_weight);
    out.push_back(&conv2_bias);
    projection.collect(out);
  }
};

// ceil(ceil(T / 2) / 2).
std::size_t frontend_output_length(std::size_t frames);

// Throws ConfigError naming the sequence when any length is below 4.
template <typename Real>
Sequence<Real> frontend_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                const FrontendParams<Real>& params);

}  // namespace summix
