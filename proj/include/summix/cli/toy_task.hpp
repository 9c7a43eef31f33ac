#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "summix/bench/workload.hpp"
#include "summix/blocks/encoder.hpp"

namespace summix {

// Synthetic copy task. Each label l in 1..vocab owns a fixed random embedding;
// an utterance shows every label of its target for a few frames (embedding
// plus small noise), with pure-noise distractor frames between labels and at
// both ends.
struct ToyTaskSpec {
  std::size_t vocab = 8;
  std::size_t feature_dim = 80;
  std::size_t min_labels = 2;
  std::size_t max_labels = 6;
  std::size_t frames_per_label = 3;
  std::size_t max_gap = 3;  // distractor frames between labels: 1..max_gap
  double label_noise = 0.3;
  std::uint64_t seed = 0;
};

class ToyTask {
 public:
  explicit ToyTask(const ToyTaskSpec& spec);

  const ToyTaskSpec& spec() const { return spec_; }
  // Padded batch of `count` utterances drawn from `rng`.
  template <typename Real>
  WorkloadBatch<Real> sample(std::size_t count, Rng& rng) const;

 private:
  ToyTaskSpec spec_;
  std::vector<std::vector<double>> embeddings_;  // [vocab + 1][feature_dim], row 0 unused
};

enum class OptimizerKind { kSgd, kAdam };
std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

struct TrainOptions {
  std::size_t steps = 500;
  std::size_t batch = 16;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double learning_rate = 0.1;
  double clip_norm = 5.0;  // global gradient norm cap; 0 disables
  std::size_t eval_size = 200;
  std::uint64_t seed = 0;
};

struct TrainResult {
  EncoderConfig config;
  ToyTaskSpec task;
  TrainOptions options;
  std::vector<double> loss_curve;  // one mean CTC loss per step
  double exact_match = 0.0;        // greedy decode on the held-out set
  double held_out_loss = 0.0;
};

// Encoder config a preset gets for the toy task: the task's feature width and
// vocabulary, everything else unchanged.
EncoderConfig toy_encoder_config(const EncoderConfig& config, const ToyTaskSpec& task);

// Trains a fresh encoder (parameters seeded by options.seed) with a fixed
// step size. Throws NumericError on a non-finite loss. `on_step` sees
// (step, loss) after each update.
template <typename Real>
TrainResult train_toy(const EncoderConfig& config, const ToyTaskSpec& task, const TrainOptions& options,
                      Encoder<Real>* trained = nullptr,
                      const std::function<void(std::size_t, double)>& on_step = {});

// Fraction of utterances whose greedy decode equals the target exactly.
template <typename Real>
double exact_match_rate(const Encoder<Real>& encoder, const WorkloadBatch<Real>& data);

}  // namespace summix
