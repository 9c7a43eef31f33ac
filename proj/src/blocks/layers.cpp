#include "summix/blocks/layers.hpp"

#include "summix/numcore/error.hpp"

namespace summix {

std::string to_string(BlockKind kind) {
  return kind == BlockKind::kBranchformer ? "branchformer" : "conformer";
}

BlockKind parse_block_kind(std::string_view name) {
  if (name == "branchformer") return BlockKind::kBranchformer;
  if (name == "conformer") return BlockKind::kConformer;
  throw ConfigError("unknown block kind '" + std::string(name) + "' (expected branchformer or conformer)");
}

template <typename Real>
MergeMlp<Real> MergeMlp<Real>::create(std::size_t dim, Rng& rng, const std::string& name) {
  return {DenseGelu<Real>::create(2 * dim, 2 * dim, Activation::kGelu, rng, name + ".hidden"),
          DenseGelu<Real>::create(2 * dim, dim, Activation::kGelu, rng, name + ".output")};
}

template <typename Real>
FeedForward<Real> FeedForward<Real>::create(std::size_t dim, std::size_t hidden, Rng& rng,
                                            const std::string& name) {
  return {DenseGelu<Real>::create(dim, hidden, Activation::kGelu, rng, name + ".up"),
          DenseGelu<Real>::create(hidden, dim, Activation::kIdentity, rng, name + ".down")};
}

template <typename Real>
ConvModule<Real> ConvModule<Real>::create(std::size_t dim, std::size_t kernel, Rng& rng,
                                          const std::string& name) {
  ConvModule m;
  m.expand = DenseGelu<Real>::create(dim, 2 * dim, Activation::kIdentity, rng, name + ".expand");
  m.depthwise = make_depthwise_kernels<Real>(dim, kernel, rng, name + ".depthwise");
  m.norm = LayerNormParams<Real>::create(dim, name + ".norm");
  m.project = DenseGelu<Real>::create(dim, dim, Activation::kIdentity, rng, name + ".project");
  return m;
}

template <typename Real>
BranchformerBlock<Real> make_branchformer_block(MixerKind mixer, const BlockDims& dims, Rng& rng,
                                                const std::string& name) {
  const std::size_t D = dims.model_dim;
  BranchformerBlock<Real> b{
      LayerNormParams<Real>::create(D, name + ".norm"),
      CgMlpParams<Real>::create(D, dims.cg_dim, dims.conv_kernel, rng, name + ".cgmlp"),
      create_mixer<Real>(mixer, D, dims.heads, PositionalEncoding::kOff, rng, name + ".mixer"),
      MergeMlp<Real>::create(D, rng, name + ".merge")};
  return b;
}

template <typename Real>
BranchformerLiteBlock<Real> make_branchformer_lite_block(const BlockDims& dims, Rng& rng,
                                                         const std::string& name) {
  const std::size_t D = dims.model_dim;
  BranchformerLiteBlock<Real> b;
  b.norm = LayerNormParams<Real>::create(D, name + ".norm");
  b.cgmlp = CgMlpParams<Real>::create(D, dims.cg_dim, dims.conv_kernel, rng, name + ".cgmlp");
  b.summary = ChunkedDense<Real>::create(D, D, dims.heads, Activation::kGelu, rng, name + ".summary");
  b.combiner = DenseGelu<Real>::create(2 * D, D, Activation::kGelu, rng, name + ".combiner");
  return b;
}

template <typename Real>
ConformerBlock<Real> make_conformer_block(MixerKind mixer, const BlockDims& dims, Rng& rng,
                                          const std::string& name) {
  const std::size_t D = dims.model_dim;
  ConformerBlock<Real> b{
      LayerNormParams<Real>::create(D, name + ".ffn1_norm"),
      FeedForward<Real>::create(D, dims.cg_dim, rng, name + ".ffn1"),
      LayerNormParams<Real>::create(D, name + ".mixer_norm"),
      create_mixer<Real>(mixer, D, dims.heads, PositionalEncoding::kOff, rng, name + ".mixer"),
      LayerNormParams<Real>::create(D, name + ".conv_norm"),
      ConvModule<Real>::create(D, dims.conv_kernel, rng, name + ".conv"),
      LayerNormParams<Real>::create(D, name + ".ffn2_norm"),
      FeedForward<Real>::create(D, dims.cg_dim, rng, name + ".ffn2"),
      LayerNormParams<Real>::create(D, name + ".final_norm")};
  return b;
}

template <typename Real>
Sequence<Real> branchformer_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                          const BranchformerBlock<Real>& block) {
  Sequence<Real> n = layernorm_forward(tape, x, block.norm);
  Sequence<Real> local = cgmlp_forward(tape, n, block.cgmlp);
  Sequence<Real> global = mixer_forward(tape, n, block.mixer);
  Sequence<Real> merged = concat_features<Real>(tape, {local, global});
  merged = dense_gelu_forward(tape, dense_gelu_forward(tape, merged, block.merge.hidden), block.merge.output);
  return add(tape, x, merged);
}

template <typename Real>
Sequence<Real> branchformer_lite_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                               const BranchformerLiteBlock<Real>& block) {
  Sequence<Real> n = layernorm_forward(tape, x, block.norm);
  Sequence<Real> local = cgmlp_forward(tape, n, block.cgmlp);
  return add(tape, x, summary_mixing_combine(tape, local, n, block.summary, block.combiner));
}

namespace {

template <typename Real>
Sequence<Real> feed_forward(Tape<Real>& tape, const Sequence<Real>& x, const FeedForward<Real>& f) {
  return dense_gelu_forward(tape, dense_gelu_forward(tape, x, f.up), f.down);
}

template <typename Real>
Sequence<Real> conv_module(Tape<Real>& tape, const Sequence<Real>& x, const ConvModule<Real>& m) {
  const std::size_t D = m.project.in_dim();
  Sequence<Real> e = dense_gelu_forward(tape, x, m.expand);
  Sequence<Real> glu = multiply(tape, slice_features(tape, e, 0, D), sigmoid(tape, slice_features(tape, e, D, 2 * D)));
  Sequence<Real> c = layernorm_forward(tape, depthwise_conv1d_forward(tape, glu, m.depthwise), m.norm);
  Sequence<Real> act{gelu(tape, c.values), c.lengths};
  return dense_gelu_forward(tape, act, m.project);
}

}  // namespace

template <typename Real>
Sequence<Real> conformer_block_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                       const ConformerBlock<Real>& block) {
  const Real half(0.5);
  Sequence<Real> y =
      add(tape, x, scale(tape, feed_forward(tape, layernorm_forward(tape, x, block.ffn1_norm), block.ffn1), half));
  y = add(tape, y, mixer_forward(tape, layernorm_forward(tape, y, block.mixer_norm), block.mixer));
  y = add(tape, y, conv_module(tape, layernorm_forward(tape, y, block.conv_norm), block.conv));
  y = add(tape, y, scale(tape, feed_forward(tape, layernorm_forward(tape, y, block.ffn2_norm), block.ffn2), half));
  return layernorm_forward(tape, y, block.final_norm);
}

template <typename Real>
Sequence<Real> block_forward(Tape<Real>& tape, const Sequence<Real>& x, const Block<Real>& block) {
  struct Visitor {
    Tape<Real>& tape;
    const Sequence<Real>& x;
    Sequence<Real> operator()(const BranchformerBlock<Real>& b) const {
      return branchformer_block_forward(tape, x, b);
    }
    Sequence<Real> operator()(const BranchformerLiteBlock<Real>& b) const {
      return branchformer_lite_block_forward(tape, x, b);
    }
    Sequence<Real> operator()(const ConformerBlock<Real>& b) const { return conformer_block_forward(tape, x, b); }
  };
  return std::visit(Visitor{tape, x}, block);
}

#define SUMMIX_INSTANTIATE(R)                                                                         \
  template struct MergeMlp<R>;                                                                        \
  template struct FeedForward<R>;                                                                     \
  template struct ConvModule<R>;                                                                      \
  template BranchformerBlock<R> make_branchformer_block<R>(MixerKind, const BlockDims&, Rng&,         \
                                                           const std::string&);                       \
  template BranchformerLiteBlock<R> make_branchformer_lite_block<R>(const BlockDims&, Rng&,           \
                                                                    const std::string&);              \
  template ConformerBlock<R> make_conformer_block<R>(MixerKind, const BlockDims&, Rng&, const std::string&); \
  template Sequence<R> branchformer_block_forward(Tape<R>&, const Sequence<R>&, const BranchformerBlock<R>&); \
  template Sequence<R> branchformer_lite_block_forward(Tape<R>&, const Sequence<R>&,                  \
                                                       const BranchformerLiteBlock<R>&);              \
  template Sequence<R> conformer_block_forward(Tape<R>&, const Sequence<R>&, const ConformerBlock<R>&); \
  template Sequence<R> block_forward(Tape<R>&, const Sequence<R>&, const Block<R>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
