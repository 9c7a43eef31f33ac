#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "summix/blocks/frontend.hpp"
#include "summix/blocks/layers.hpp"

namespace summix {

struct EncoderConfig {
  BlockKind block_kind = BlockKind::kBranchformer;
  MixerKind mixer_kind = MixerKind::kSummaryMixing;
  std::size_t depth = 2;
  std::size_t model_dim = 32;
  std::size_t heads = 4;
  std::size_t cg_dim = 128;
  std::size_t conv_kernel = 31;
  bool frontend = false;
  std::size_t input_dim = 80;
  std::size_t vocab_size = 1000;  // labels 1..V; the head emits V + 1 with blank 0
  double dropout = 0.0;
  PositionalEncoding positional_encoding = PositionalEncoding::kOff;

  // Throws ConfigError on any inconsistent field.
  void validate() const;
  BlockDims block_dims() const { return {model_dim, heads, cg_dim, conv_kernel}; }
  bool operator==(const EncoderConfig&) const = default;
};

// Sinusoidal positions for MHSA, none otherwise.
PositionalEncoding default_positional_encoding(MixerKind mixer);

// snake_case keys matching the field names. Missing keys keep their defaults
// (positional_encoding defaults per mixer); unknown keys are rejected.
std::string to_json(const EncoderConfig& config, int indent = 2);
EncoderConfig encoder_config_from_json(std::string_view text);
EncoderConfig load_encoder_config(const std::string& path);

// "toy-branchformer-<mixer>" and "toy-conformer-<mixer>"; lite exists for the
// Branchformer only.
std::vector<std::string> preset_names();
// Throws ConfigError listing the valid names.
EncoderConfig preset(std::string_view name);

template <typename Real>
struct Encoder {
  EncoderConfig config;
  std::optional<FrontendParams<Real>> frontend;
  std::optional<DenseGelu<Real>> input_projection;  // used when the frontend is off
  std::vector<Block<Real>> blocks;
  std::optional<LayerNormParams<Real>> output_norm;  // Branchformer stacks only
  DenseGelu<Real> head;                              // D -> V + 1

  static Encoder create(const EncoderConfig& config, std::uint64_t seed);

  std::size_t num_parameters() const;
  void collect(ParameterList<Real>& out);
  ParameterList<Real> parameters() {
    ParameterList<Real> out;
    collect(out);
    return out;
  }
};

// Frontend or input projection, positions, then the block stack.
template <typename Real>
Sequence<Real> encoder_forward(Tape<Real>& tape, const Sequence<Real>& features,
                               const Encoder<Real>& encoder);

// encoder_forward followed by the CTC head; [B, T', V + 1] unnormalised.
template <typename Real>
Sequence<Real> encoder_logits(Tape<Real>& tape, const Sequence<Real>& features,
                              const Encoder<Real>& encoder);

struct EncoderCost {
  MixerCost blocks;  // the block stack alone
  MixerCost total;   // plus frontend or input projection, positions and head
  std::size_t frames = 0;  // frames seen by the blocks
};

// Closed-form forward cost for `time` input frames, using the mixer_cost
// conventions.
EncoderCost encoder_cost(const EncoderConfig& config, std::size_t time);

}  // namespace summix
