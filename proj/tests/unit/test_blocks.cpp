#include <gtest/gtest.h>

#include <numeric>

#include "summix/blocks/encoder.hpp"
#include "summix/numcore/error.hpp"
#include "summix/numcore/gradcheck.hpp"
#include "support/mixer_oracles.hpp"
#include "support/test_util.hpp"

namespace summix {
namespace {

using oracle::Matrix;
using oracle::random_batch;
using testing::randomize;
using testing::within;

template <typename T>
ParameterList<double> params_of(T& m) {
  ParameterList<double> ps;
  m.collect(ps);
  return ps;
}

void zero(DenseGelu<double>& layer) {
  layer.weight.value.fill(0.0);
  layer.bias.value.fill(0.0);
}

using Forward = std::function<Sequence<double>(Tape<double>&, const Sequence<double>&)>;

GradcheckResult gradcheck_error(const Forward& fwd, ParameterList<double> params, const MaskedBatch<double>& batch,
                       Rng& rng) {
  Parameter<double> input{"input", batch.values};
  Tape<double> probe(false);
  const auto shape = fwd(probe, as_constant(probe, batch));
  const auto w = oracle::random_loss_weights(shape.values.shape(), shape.lengths, rng);
  auto loss = [&](Tape<double>& tape) {
    return weighted_sum(tape, fwd(tape, as_tracked(tape, input, batch.lengths)).values, w);
  };
  params.push_back(&input);
  return finite_difference_check(loss, params);
}

void expect_padding_invariant(const Forward& fwd, const MaskedBatch<double>& batch, Rng& rng) {
  Tape<double> tape(false);
  const auto a = fwd(tape, as_constant(tape, batch));
  const auto garbage = oracle::repad(batch, rng);
  const auto b = fwd(tape, Sequence<double>{tape.constant(garbage.values), garbage.lengths});
  EXPECT_EQ(a.values.value(), b.values.value());
  Tensor<double> masked = a.values.value();
  zero_padding(masked, a.lengths);
  EXPECT_EQ(masked, a.values.value());
}

Matrix cgmlp_oracle(const Matrix& x, const CgMlpParams<double>& p) {
  const std::size_t half = p.cg_dim() / 2;
  Matrix a, b;
  for (const auto& row : x) {
    const auto u = oracle::dense(row, p.up);
    a.emplace_back(u.begin(), u.begin() + half);
    b.push_back(oracle::layernorm(std::vector<double>(u.begin() + half, u.end()), p.gate_norm.gain.value,
                                  p.gate_norm.bias.value));
  }
  const Matrix gate = oracle::depthwise_conv(b, p.gate_conv.value);
  Matrix out;
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::vector<double> g(half);
    for (std::size_t j = 0; j < half; ++j) g[j] = a[t][j] * gate[t][j];
    out.push_back(oracle::dense(g, p.down));
  }
  return out;
}

double max_diff(const Matrix& want, const Tensor<double>& got, std::size_t b) {
  double m = 0;
  for (std::size_t t = 0; t < want.size(); ++t)
    for (std::size_t d = 0; d < want[t].size(); ++d) m = std::max(m, std::abs(want[t][d] - got(b, t, d)));
  return m;
}

const MixerKind kFullMixers[] = {MixerKind::kSummaryMixing, MixerKind::kHyperMixer, MixerKind::kMhsa};

BlockDims small_dims(std::size_t kernel = 3) { return {.model_dim = 8, .heads = 4, .cg_dim = 12, .conv_kernel = kernel}; }

// --- cgMLP ---

TEST(CgMlp, ZeroInputZeroBiasGivesZero) {
  Rng rng(1);
  auto p = CgMlpParams<double>::create(6, 8, 5, rng, "cg");
  MaskedBatch<double> batch{Tensor<double>({2, 4, 6}), {4, 3}};
  Tape<double> tape(false);
  const auto y = cgmlp_forward(tape, as_constant(tape, batch), p);
  for (double v : y.values.value().vec()) EXPECT_EQ(v, 0.0);
}

TEST(CgMlp, UnitKernelIsGatedMlp) {
  Rng rng(2);
  auto p = CgMlpParams<double>::create(6, 8, 1, rng, "cg");
  randomize(params_of(p), rng);
  p.gate_conv.value.fill(1.0);
  const auto batch = random_batch(2, 5, 6, rng);
  Tape<double> tape(false);
  const auto y = cgmlp_forward(tape, as_constant(tape, batch), p);
  for (std::size_t b = 0; b < 2; ++b) {
    Matrix want;
    for (const auto& row : oracle::sequence_rows(batch.values, b, batch.lengths[b])) {
      const auto u = oracle::dense(row, p.up);
      const auto n = oracle::layernorm(std::vector<double>(u.begin() + 4, u.end()), p.gate_norm.gain.value,
                                       p.gate_norm.bias.value);
      std::vector<double> g(4);
      for (std::size_t j = 0; j < 4; ++j) g[j] = u[j] * n[j];
      want.push_back(oracle::dense(g, p.down));
    }
    EXPECT_LE(max_diff(want, y.values.value(), b), 1e-12);
  }
}

TEST(CgMlp, MatchesScalarLoop) {
  Rng rng(3);
  auto p = CgMlpParams<double>::create(6, 10, 3, rng, "cg");
  randomize(params_of(p), rng);
  const auto batch = random_batch(3, 7, 6, rng);
  Tape<double> tape(false);
  const auto y = cgmlp_forward(tape, as_constant(tape, batch), p);
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_LE(max_diff(cgmlp_oracle(oracle::sequence_rows(batch.values, b, batch.lengths[b]), p), y.values.value(), b),
              1e-12);
  }
}

TEST(CgMlp, PaddingInvariantAndGradcheck) {
  Rng rng(4);
  auto p = CgMlpParams<double>::create(6, 8, 3, rng, "cg");
  randomize(params_of(p), rng);
  Forward fwd = [&](auto& t, const auto& x) { return cgmlp_forward(t, x, p); };
  expect_padding_invariant(fwd, random_batch(3, 6, 6, rng), rng);
  EXPECT_TRUE(within(gradcheck_error(fwd, params_of(p), random_batch(2, 5, 6, rng), rng), 1e-5));
}

TEST(CgMlp, RejectsOddWidthAndEvenKernel) {
  Rng rng(5);
  EXPECT_THROW(CgMlpParams<double>::create(6, 7, 3, rng, "cg"), ConfigError);
  EXPECT_THROW(CgMlpParams<double>::create(6, 8, 4, rng, "cg"), ConfigError);
}

// --- blocks ---

TEST(Branchformer, ZeroMergeIsIdentity) {
  Rng rng(10);
  for (MixerKind kind : kFullMixers) {
    auto block = make_branchformer_block<double>(kind, small_dims(), rng, "bf");
    randomize(params_of(block), rng);
    zero(block.merge.output);
    const auto batch = random_batch(2, 5, 8, rng);
    Tape<double> tape(false);
    EXPECT_EQ(branchformer_block_forward(tape, as_constant(tape, batch), block).values.value(), batch.values)
        << to_string(kind);
  }
}

TEST(Branchformer, LiteZeroCombinerIsIdentity) {
  Rng rng(11);
  auto block = make_branchformer_lite_block<double>(small_dims(), rng, "lite");
  randomize(params_of(block), rng);
  zero(block.combiner);
  const auto batch = random_batch(2, 5, 8, rng);
  Tape<double> tape(false);
  EXPECT_EQ(branchformer_lite_block_forward(tape, as_constant(tape, batch), block).values.value(), batch.values);
}

TEST(Conformer, ZeroSubmoduleOutputsGiveFinalNorm) {
  Rng rng(12);
  for (MixerKind kind : kFullMixers) {
    auto block = make_conformer_block<double>(kind, small_dims(), rng, "cf");
    randomize(params_of(block), rng);
    zero(block.ffn1.down);
    zero(block.ffn2.down);
    zero(block.conv.project);
    std::visit(
        [](auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, SummaryMixingParams<double>>) zero(m.combiner);
          if constexpr (std::is_same_v<M, HyperMixerParams<double>>) zero(m.local.output);
          if constexpr (std::is_same_v<M, MhsaParams<double>>) zero(m.output);
        },
        block.mixer);
    const auto batch = random_batch(2, 5, 8, rng);
    Tape<double> tape(false);
    const auto y = conformer_block_forward(tape, as_constant(tape, batch), block).values.value();
    const auto want = layernorm_forward(tape, as_constant(tape, batch), block.final_norm).values.value();
    if (kind == MixerKind::kSummaryMixing) {
      // gelu(0) from the zeroed combiner is exactly 0.
      EXPECT_EQ(y, want) << to_string(kind);
    } else {
      EXPECT_LE(oracle::max_abs_diff_valid(y, want, batch.lengths), 0.0) << to_string(kind);
    }
  }
}

TEST(Branchformer, LiteSingleFrame) {
  Rng rng(13);
  auto block = make_branchformer_lite_block<double>(small_dims(), rng, "lite");
  randomize(params_of(block), rng);
  const auto batch = random_batch(1, 1, 8, rng);
  Tape<double> tape(false);
  const auto y = branchformer_lite_block_forward(tape, as_constant(tape, batch), block);
  const auto x = oracle::sequence_rows(batch.values, 0, 1)[0];
  const auto n = oracle::layernorm(x, block.norm.gain.value, block.norm.bias.value);
  const auto u = cgmlp_oracle({n}, block.cgmlp)[0];
  auto want = oracle::dense(oracle::concat(u, oracle::chunked(n, block.summary)), block.combiner);
  for (std::size_t d = 0; d < 8; ++d) want[d] += x[d];
  EXPECT_LE(max_diff({want}, y.values.value(), 0), 1e-12);
}

TEST(Blocks, ParameterCountsFollowFormulas) {
  const std::size_t D = 16, n = 4, cg = 24, K = 5;
  const BlockDims dims{D, n, cg, K};
  const std::size_t ln = 2 * D;
  const std::size_t cgmlp = D * cg + cg + cg + (cg / 2) * K + (cg / 2) * D + D;
  const std::size_t merge = (2 * D) * (2 * D) + 2 * D + (2 * D) * D + D;
  const std::size_t sm = 2 * (D * D / n + D) + 2 * D * D + D;
  const std::size_t mhsa = 4 * D * D + 3 * D;
  const std::size_t lite = ln + cgmlp + (D * D / n + D) + 2 * D * D + D;
  Rng rng(14);
  const auto bf_sm = make_branchformer_block<double>(MixerKind::kSummaryMixing, dims, rng, "a");
  const auto bf_mhsa = make_branchformer_block<double>(MixerKind::kMhsa, dims, rng, "b");
  const auto bf_lite = make_branchformer_lite_block<double>(dims, rng, "c");
  EXPECT_EQ(bf_sm.num_parameters(), ln + cgmlp + sm + merge);
  EXPECT_EQ(bf_mhsa.num_parameters(), ln + cgmlp + mhsa + merge);
  EXPECT_EQ(bf_lite.num_parameters(), lite);
  EXPECT_LT(bf_lite.num_parameters(), bf_sm.num_parameters());
  EXPECT_LT(bf_sm.num_parameters(), bf_mhsa.num_parameters());
}

TEST(Blocks, GradcheckEveryKind) {
  Rng rng(15);
  const auto batch = random_batch(2, 5, 8, rng);
  for (MixerKind kind : kFullMixers) {
    auto bf = make_branchformer_block<double>(kind, small_dims(), rng, "bf");
    randomize(params_of(bf), rng, 0.4);
    EXPECT_TRUE(within(gradcheck_error([&](auto& t, const auto& x) { return branchformer_block_forward(t, x, bf); },
                              params_of(bf), batch, rng),
              1e-5))
        << "branchformer " << to_string(kind);
    auto cf = make_conformer_block<double>(kind, small_dims(), rng, "cf");
    randomize(params_of(cf), rng, 0.4);
    EXPECT_TRUE(within(gradcheck_error([&](auto& t, const auto& x) { return conformer_block_forward(t, x, cf); },
                              params_of(cf), batch, rng),
              1e-5))
        << "conformer " << to_string(kind);
  }
  auto lite = make_branchformer_lite_block<double>(small_dims(), rng, "lite");
  randomize(params_of(lite), rng, 0.4);
  EXPECT_TRUE(within(gradcheck_error([&](auto& t, const auto& x) { return branchformer_lite_block_forward(t, x, lite); },
                            params_of(lite), batch, rng),
            1e-5));
}

std::vector<Block<double>> every_block(const BlockDims& dims, Rng& rng) {
  std::vector<Block<double>> out;
  for (MixerKind kind : kFullMixers) {
    out.emplace_back(make_branchformer_block<double>(kind, dims, rng, "bf"));
    out.emplace_back(make_conformer_block<double>(kind, dims, rng, "cf"));
  }
  out.emplace_back(make_branchformer_lite_block<double>(dims, rng, "lite"));
  for (auto& b : out) {
    ParameterList<double> ps;
    std::visit([&](auto& blk) { blk.collect(ps); }, b);
    randomize(ps, rng);
  }
  return out;
}

TEST(Blocks, PaddingInvariant) {
  Rng rng(16);
  for (const auto& block : every_block(small_dims(), rng)) {
    expect_padding_invariant([&](auto& t, const auto& x) { return block_forward(t, x, block); },
                             random_batch(3, 7, 8, rng), rng);
  }
}

TEST(Blocks, PermutationEquivariantWithPointwiseConvolutions) {
  // Depthwise convolutions are local in time; with K = 1 nothing else in a
  // block depends on frame order.
  Rng rng(17);
  for (const auto& block : every_block(small_dims(1), rng)) {
    if (std::holds_alternative<BranchformerBlock<double>>(block) &&
        std::holds_alternative<MhsaParams<double>>(std::get<BranchformerBlock<double>>(block).mixer)) {
      // Attention without positions is also equivariant; kept in the sweep.
    }
    const auto batch = random_batch(2, 7, 8, rng);
    std::vector<std::size_t> perm(static_cast<std::size_t>(batch.lengths[0]));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[2]);
    MaskedBatch<double> permuted = batch;
    for (std::size_t t = 0; t < perm.size(); ++t)
      for (std::size_t d = 0; d < 8; ++d) permuted.values(0, t, d) = batch.values(0, perm[t], d);
    Tape<double> tape(false);
    const auto y = block_forward(tape, as_constant(tape, batch), block).values.value();
    const auto yp = block_forward(tape, as_constant(tape, permuted), block).values.value();
    double m = 0;
    for (std::size_t t = 0; t < perm.size(); ++t)
      for (std::size_t d = 0; d < 8; ++d) m = std::max(m, std::abs(yp(0, t, d) - y(0, perm[t], d)));
    EXPECT_LE(m, 1e-12);
  }
}

TEST(Blocks, StackPreservesShape) {
  Rng rng(18);
  auto blocks = every_block(small_dims(), rng);
  const auto batch = random_batch(2, 6, 8, rng);
  Tape<double> tape(false);
  Sequence<double> x = as_constant(tape, batch);
  for (const auto& b : blocks) x = block_forward(tape, x, b);
  EXPECT_EQ(x.values.shape(), batch.values.shape());
  EXPECT_EQ(x.lengths, batch.lengths);
}

// --- frontend ---

TEST(Frontend, OutputLengths) {
  EXPECT_EQ(frontend_output_length(4), 1u);
  EXPECT_EQ(frontend_output_length(100), 25u);
  EXPECT_EQ(frontend_output_length(57), 15u);
  EXPECT_EQ(frontend_output_length(5), 2u);
  Rng rng(20);
  const auto p = FrontendParams<double>::create(80, 8, rng, "fe");
  MaskedBatch<double> batch{oracle::random_tensor({2, 100, 80}, rng), {100, 57}};
  zero_padding(batch.values, batch.lengths);
  Tape<double> tape(false);
  const auto y = frontend_forward(tape, as_constant(tape, batch), p);
  EXPECT_EQ(y.values.shape(), (Shape{2, 25, 8}));
  EXPECT_EQ(y.lengths, (std::vector<int>{25, 15}));
}

TEST(Frontend, RejectsShortSequences) {
  Rng rng(21);
  const auto p = FrontendParams<double>::create(5, 8, rng, "fe");
  MaskedBatch<double> batch{Tensor<double>({2, 6, 5}), {6, 3}};
  Tape<double> tape(false);
  try {
    frontend_forward(tape, as_constant(tape, batch), p);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sequence 1 has 3 frames"), std::string::npos) << e.what();
  }
}

TEST(Frontend, PaddingInvariantAndGradcheck) {
  Rng rng(22);
  auto p = FrontendParams<double>::create(5, 6, rng, "fe");
  Forward fwd = [&](auto& t, const auto& x) { return frontend_forward(t, x, p); };
  MaskedBatch<double> batch{oracle::random_tensor({3, 11, 5}, rng), {11, 4, 8}};
  zero_padding(batch.values, batch.lengths);
  expect_padding_invariant(fwd, batch, rng);
  EXPECT_TRUE(within(gradcheck_error(fwd, params_of(p), batch, rng), 1e-5));
}

// --- encoder ---

EncoderConfig tiny(BlockKind block, MixerKind mixer, bool frontend) {
  EncoderConfig c;
  c.block_kind = block;
  c.mixer_kind = mixer;
  c.depth = 2;
  c.model_dim = 8;
  c.heads = 4;
  c.cg_dim = 12;
  c.conv_kernel = 3;
  c.frontend = frontend;
  c.input_dim = 5;
  c.vocab_size = 4;
  c.positional_encoding = default_positional_encoding(mixer);
  return c;
}

TEST(Encoder, FullStackGradcheck) {
  Rng rng(30);
  for (BlockKind block : {BlockKind::kBranchformer, BlockKind::kConformer}) {
    for (MixerKind mixer : {MixerKind::kSummaryMixing, MixerKind::kSummaryMixingLite, MixerKind::kHyperMixer,
                            MixerKind::kMhsa}) {
      if (mixer == MixerKind::kSummaryMixingLite && block == BlockKind::kConformer) continue;
      auto enc = Encoder<double>::create(tiny(block, mixer, true), 7);
      MaskedBatch<double> batch{oracle::random_tensor({2, 6, 5}, rng), {6, 5}};
      zero_padding(batch.values, batch.lengths);
      const auto err = gradcheck_error([&](auto& t, const auto& x) { return encoder_logits(t, x, enc); },
                                         enc.parameters(), batch, rng);
      EXPECT_TRUE(within(err, 1e-4)) << to_string(block) << " " << to_string(mixer);
    }
  }
}

TEST(Encoder, ShapesAndDepthZero) {
  Rng rng(31);
  MaskedBatch<double> batch{oracle::random_tensor({2, 16, 5}, rng), {16, 9}};
  zero_padding(batch.values, batch.lengths);
  auto cfg = tiny(BlockKind::kBranchformer, MixerKind::kSummaryMixing, true);
  const auto enc = Encoder<double>::create(cfg, 1);
  Tape<double> tape(false);
  const auto y = encoder_forward(tape, as_constant(tape, batch), enc);
  EXPECT_EQ(y.values.shape(), (Shape{2, 4, 8}));
  EXPECT_EQ(y.lengths, (std::vector<int>{4, 3}));
  EXPECT_EQ(encoder_logits(tape, as_constant(tape, batch), enc).values.shape(), (Shape{2, 4, 5}));

  cfg.depth = 0;
  const auto bare = Encoder<double>::create(cfg, 1);
  EXPECT_TRUE(bare.blocks.empty());
  const auto y0 = encoder_forward(tape, as_constant(tape, batch), bare);
  const auto want = frontend_forward(tape, as_constant(tape, batch), *bare.frontend);
  EXPECT_EQ(y0.values.value(), want.values.value());
}

TEST(Encoder, SeededConstructionIsDeterministic) {
  auto cfg = tiny(BlockKind::kConformer, MixerKind::kHyperMixer, false);
  auto a = Encoder<double>::create(cfg, 42), b = Encoder<double>::create(cfg, 42), c = Encoder<double>::create(cfg, 43);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    EXPECT_EQ(pa[i]->value, pb[i]->value);
    differs = differs || !(pa[i]->value == pc[i]->value);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.num_parameters(), [&] {
    std::size_t n = 0;
    for (auto* p : pa) n += p->value.size();
    return n;
  }());
}

TEST(EncoderConfig, JsonRoundTrip) {
  for (const auto& name : preset_names()) {
    const EncoderConfig c = preset(name);
    EXPECT_EQ(encoder_config_from_json(to_json(c)), c) << name;
  }
  const auto c = encoder_config_from_json(R"({"mixer_kind": "mhsa", "depth": 3})");
  EXPECT_EQ(c.depth, 3u);
  EXPECT_EQ(c.positional_encoding, PositionalEncoding::kSinusoidal);
  EXPECT_EQ(c.model_dim, 32u);
}

TEST(EncoderConfig, RejectsBadDocuments) {
  EXPECT_THROW(encoder_config_from_json(R"({"block_kind": "conformer", "mixer_kind": "summary_mixing_lite"})"),
               ConfigError);
  EXPECT_THROW(encoder_config_from_json(R"({"depht": 2})"), ConfigError);
  EXPECT_THROW(encoder_config_from_json(R"({"cg_dim": 7})"), ConfigError);
  EXPECT_THROW(encoder_config_from_json(R"({"model_dim": 30, "heads": 4})"), ConfigError);
  EXPECT_THROW(encoder_config_from_json(R"({"dropout": 0.1})"), ConfigError);
  EXPECT_THROW(encoder_config_from_json(R"({"depth": "two"})"), ConfigError);
  EXPECT_THROW(encoder_config_from_json("{not json"), ConfigError);
  EXPECT_THROW(load_encoder_config("/nonexistent/config.json"), ConfigError);
}

TEST(Presets, NamesAndErrors) {
  const auto names = preset_names();
  EXPECT_EQ(names.size(), 7u);
  const auto sm = preset("toy-branchformer-summary_mixing");
  EXPECT_EQ(sm.model_dim, 32u);
  EXPECT_EQ(sm.depth, 2u);
  EXPECT_EQ(sm.conv_kernel, 31u);
  EXPECT_FALSE(sm.frontend);
  try {
    preset("toy-conformer-summary_mixing_lite");
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& n : names) EXPECT_NE(std::string(e.what()).find(n), std::string::npos);
  }
}

TEST(EncoderCost, DepthIsLinearAndFrontendDownsamples) {
  for (const auto& name : preset_names()) {
    EncoderConfig c = preset(name);
    const auto a = encoder_cost(c, 1000);
    c.depth *= 2;
    const auto b = encoder_cost(c, 1000);
    EXPECT_NEAR(static_cast<double>(b.blocks.flops) / a.blocks.flops, 2.0, 0.01) << name;
    EXPECT_GT(b.total.flops, a.total.flops);
  }
  EncoderConfig c = preset("toy-conformer-mhsa");
  c.frontend = true;
  EXPECT_EQ(encoder_cost(c, 1000).frames, 250u);
}

TEST(EncoderCost, AttentionGrowsFaster) {
  const auto sm = preset("toy-branchformer-summary_mixing"), mh = preset("toy-branchformer-mhsa");
  const double r_sm = static_cast<double>(encoder_cost(sm, 2048).blocks.flops) / encoder_cost(sm, 1024).blocks.flops;
  const double r_mh = static_cast<double>(encoder_cost(mh, 2048).blocks.flops) / encoder_cost(mh, 1024).blocks.flops;
  EXPECT_DOUBLE_EQ(r_sm, 2.0);
  EXPECT_GT(r_mh, r_sm);
}

TEST(EncoderCost, TapeRetentionTracksModel) {
  // The analytic activation count and the tape's saved floats scale alike.
  for (const char* name : {"toy-branchformer-summary_mixing", "toy-branchformer-mhsa"}) {
    auto enc = Encoder<double>::create(preset(name), 3);
    auto retained = [&](std::size_t T) {
      Rng rng(4);
      Parameter<double> in{"x", oracle::random_tensor({1, T, 80}, rng)};
      Tape<double> tape;
      encoder_logits(tape, as_tracked(tape, in, {static_cast<int>(T)}), enc);
      return static_cast<double>(tape.retained_floats());
    };
    const double tape_ratio = retained(256) / retained(128);
    const double model_ratio = static_cast<double>(encoder_cost(enc.config, 256).total.activation_floats) /
                               encoder_cost(enc.config, 128).total.activation_floats;
    EXPECT_NEAR(tape_ratio, model_ratio, 0.15 * model_ratio) << name;
  }
}

}  // namespace
}  // namespace summix
