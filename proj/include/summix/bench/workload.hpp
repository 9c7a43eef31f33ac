#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "summix/ctc/ctc.hpp"
#include "summix/numcore/sequence.hpp"

namespace summix {

// Synthetic utterances: L seconds of standard-normal features at a fixed frame
// rate, each with a random label sequence.
struct Workload {
  double seconds = 1.0;
  std::size_t frames_per_second = 100;
  std::size_t feature_dim = 80;
  std::size_t batch = 1;
  std::size_t target_tokens = 100;
  std::size_t vocab = 1000;
  std::uint64_t seed = 0;

  std::size_t frames() const;
  void validate() const;
};

template <typename Real>
struct WorkloadBatch {
  MaskedBatch<Real> features;  // [batch, frames, feature_dim], all full length
  std::vector<LabelSequence> targets;
};

// `output_frames` is the length the CTC head will see (after any frontend);
// targets are shortened to half of it so they are always feasible. Zero means
// the input length.
template <typename Real>
WorkloadBatch<Real> generate_workload(const Workload& spec, std::size_t output_frames = 0);

}  // namespace summix
