#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace summix {

enum class MixerKind { kSummaryMixing, kSummaryMixingLite, kHyperMixer, kMhsa };

std::string to_string(MixerKind kind);
// Accepts the snake_case names used in configs; throws ConfigError otherwise.
MixerKind parse_mixer_kind(std::string_view name);

// Closed-form forward cost of one mixer over one sequence of T frames.
//
// flops counts multiply-accumulates plus one op per bias add, mean
// accumulation, exponential or normalisation. activation_floats counts every
// tensor the forward materialises, including those kept for backward.
// pairwise_floats is the part of activation_floats that couples distinct
// frames (attention weights off the diagonal, h * T * (T - 1)).
struct MixerCost {
  std::uint64_t flops = 0;
  std::uint64_t activation_floats = 0;
  std::uint64_t pairwise_floats = 0;

  MixerCost& operator+=(const MixerCost& o) {
    flops += o.flops;
    activation_floats += o.activation_floats;
    pairwise_floats += o.pairwise_floats;
    return *this;
  }
};

// `heads` is the head count for MHSA and the input-chunk count for the
// summary-mixing kinds; the HyperMixer ignores it. For the lite kind only the
// summary and combiner are counted (its local function is the cgMLP branch).
MixerCost mixer_cost(MixerKind kind, std::size_t dim, std::size_t time, std::size_t heads);

// Building blocks of the cost model, shared with the encoder-level model.
MixerCost dense_cost(std::size_t time, std::size_t in, std::size_t out, bool gelu);
MixerCost chunked_dense_cost(std::size_t time, std::size_t in, std::size_t out, std::size_t chunks);

}  // namespace summix
