#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "summix/blocks/cgmlp.hpp"
#include "summix/mixers/mixer.hpp"

namespace summix {

enum class BlockKind { kBranchformer, kConformer };

std::string to_string(BlockKind kind);
BlockKind parse_block_kind(std::string_view name);

// [2D -> 2D -> D], GeLU after both layers.
template <typename Real>
struct MergeMlp {
  DenseGelu<Real> hidden;
  DenseGelu<Real> output;

  static MergeMlp create(std::size_t dim, Rng& rng, const std::string& name);
  std::size_t num_parameters() const { return hidden.num_parameters() + output.num_parameters(); }
  void collect(ParameterList<Real>& out) {
    hidden.collect(out);
    output.collect(out);
  }
};

// y = x + merge([cgMLP(LN(x)) | mixer(LN(x))]), one LN shared by both branches.
template <typename Real>
struct BranchformerBlock {
  LayerNormParams<Real> norm;
  CgMlpParams<Real> cgmlp;
  MixerParams<Real> mixer;
  MergeMlp<Real> merge;

  std::size_t num_parameters() const {
    return norm.num_parameters() + cgmlp.num_parameters() + summix::num_parameters(mixer) +
           merge.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    norm.collect(out);
    cgmlp.collect(out);
    summix::collect(mixer, out);
    merge.collect(out);
  }
};

// y = x + c([u_t | mean_t s(LN(x)_t)]) with u = cgMLP(LN(x)) standing in for
// the local function. No merge MLP.
template <typename Real>
struct BranchformerLiteBlock {
  LayerNormParams<Real> norm;
  CgMlpParams<Real> cgmlp;
  ChunkedDense<Real> summary;
  DenseGelu<Real> combiner;

  std::size_t num_parameters() const {
    return norm.num_parameters() + cgmlp.num_parameters() + summary.num_parameters() +
           combiner.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    norm.collect(out);
    cgmlp.collect(out);
    summary.collect(out);
    combiner.collect(out);
  }
};

// D -> D_ff (GeLU) -> D.
template <typename Real>
struct FeedForward {
  DenseGelu<Real> up;
  DenseGelu<Real> down;

  static FeedForward create(std::size_t dim, std::size_t hidden, Rng& rng, const std::string& name);
  std::size_t num_parameters() const { return up.num_parameters() + down.num_parameters(); }
  void collect(ParameterList<Real>& out) {
    up.collect(out);
    down.collect(out);
  }
};

// Pointwise D -> 2D, GLU, depthwise conv, LN, GeLU, pointwise D -> D.
template <typename Real>
struct ConvModule {
  DenseGelu<Real> expand;
  Parameter<Real> depthwise;  // [D, K]
  LayerNormParams<Real> norm;
  DenseGelu<Real> project;

  static ConvModule create(std::size_t dim, std::size_t kernel, Rng& rng, const std::string& name);
  std::size_t num_parameters() const {
    return expand.num_parameters() + depthwise.value.size() + norm.num_parameters() +
           project.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    expand.collect(out);
    out.push_back(&depthwise);
    norm.collect(out);
    project.collect(out);
  }
};

// Macaron layer: x + FFN1/2, + mixer, + conv, + FFN2/2, final LN; every
// sub-module sees a pre-LN of its input.
template <typename Real>
struct ConformerBlock {
  LayerNormParams<Real> ffn1_norm;
  FeedForward<Real> ffn1;
  LayerNormParams<Real> mixer_norm;
  MixerParams<Real> mixer;
  LayerNormParams<Real> conv_norm;
  ConvModule<Real> conv;
  LayerNormParams<Real> ffn2_norm;
  FeedForward<Real> ffn2;
  LayerNormParams<Real> final_norm;

  std::size_t num_parameters() const {
    return ffn1_norm.num_parameters() + ffn1.num_parameters() + mixer_norm.num_parameters() +
           summix::num_parameters(mixer) + conv_norm.num_parameters() + conv.num_parameters() +
           ffn2_norm.num_parameters() + ffn2.num_parameters() + final_norm.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    ffn1_norm.collect(out);
    ffn1.collect(out);
    mixer_norm.collect(out);
    summix::collect(mixer, out);
    conv_norm.collect(out);
    conv.collect(out);
    ffn2_norm.collect(out);
    ffn2.collect(out);
    final_norm.collect(out);
  }
};

struct BlockDims {
  std::size_t model_dim = 32;
  std::size_t heads = 4;  // heads for MHSA, input chunks for summary mixing
  std::size_t cg_dim = 128;
  std::size_t conv_kernel = 31;
};

template <typename Real>
BranchformerBlock<Real> make_branchformer_block(MixerKind mixer, const BlockDims& dims, Rng& rng,
                                                const std::string& name);
template <typename Real>
BranchformerLiteBlock<Real> make_branchformer_lite_block(const BlockDims& dims, Rng& rng,
                                                         const std::string& name);
// The feed-forward modules use cg_dim as their hidden width.
template <typename Real>
ConformerBlock<Real> make_conformer_block(MixerKind mixer, const BlockDims& dims, Rng& rng,
                                          const std::string& name);

template <typename Real>
Sequence<Real> branchformer_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                          const BranchformerBlock<Real>& block);
template <typename Real>
Sequence<Real> branchformer_lite_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                               const BranchformerLiteBlock<Real>& block);
template <typename Real>
Sequence<Real> conformer_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                       const ConformerBlock<Real>& block);

template <typename Real>
using Block = std::variant<BranchformerBlock<Real>, BranchformerLiteBlock<Real>, ConformerBlock<Real>>;

template <typename Real>
Sequence<Real> block_forward(Tape<Real>& tape, const Sequence<Real>& x, const Block<Real>& block);

}  // namespace summix
