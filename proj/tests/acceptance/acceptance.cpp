// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "summix/bench/measure.hpp"
#include "summix/blocks/encoder.hpp"
#include "summix/cli/gradcheck_suite.hpp"
#include "summix/cli/toy_task.hpp"
#include "summix/ctc/ctc.hpp"
#include "summix/mixers/mixer.hpp"
#include "summix/numcore/gradcheck.hpp"
#include "support/mixer_oracles.hpp"

namespace summix {
namespace {

using oracle::random_batch;
using Clock = std::chrono::steady_clock;
using Forward = std::function<Sequence<double>(Tape<double>&, const Sequence<double>&)>;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// N(0, scale^2) everywhere, layer-norm gains centred on 1.
void randomize(const ParameterList<double>& params, Rng& rng, double scale = 0.5) {
  for (Parameter<double>* p : params) {
    const bool gain = p->name.size() >= 4 && p->name.compare(p->name.size() - 4, 4, "gain") == 0;
    for (auto& v : p->value.vec()) v = (gain ? 1.0 : 0.0) + scale * rng.normal();
  }
}

template <typename T>
ParameterList<double> params_of(T& m) {
  ParameterList<double> ps;
  m.collect(ps);
  return ps;
}

ParameterList<double> params_of(Block<double>& b) {
  ParameterList<double> ps;
  std::visit([&](auto& blk) { blk.collect(ps); }, b);
  return ps;
}

void zero(DenseGelu<double>& layer) {
  layer.weight.value.fill(0.0);
  if (layer.has_bias()) layer.bias.value.fill(0.0);
}

const MixerKind kFullMixers[] = {MixerKind::kSummaryMixing, MixerKind::kHyperMixer, MixerKind::kMhsa};

NamedConfig named(const std::string& id) { return {id, preset(id)}; }

const char* kSmPreset = "toy-branchformer-summary_mixing";
const char* kMhsaPreset = "toy-branchformer-mhsa";

// --- 1 ---

Outcome gradient_suite() {
  std::vector<NamedConfig> configs;
  for (const auto& name : preset_names()) configs.push_back(named(name));
  const auto start = Clock::now();
  const auto results = run_gradcheck_suite(configs, {});
  const double elapsed = seconds_since(start);

  bool all = true;
  double worst_ratio = 0;
  std::string worst, failed;
  for (const auto& r : results) {
    all = all && r.passed;
    if (!r.passed) failed += " " + r.name;
    const double ratio = r.max_relative_error / r.tolerance;
    if (ratio >= worst_ratio) worst_ratio = ratio, worst = r.name + " " + fmt("%.2e", r.max_relative_error);
  }
  std::set<std::string> groups;
  for (const auto& r : results) groups.insert(r.name.substr(0, r.name.find('/')));
  const bool covered = groups.count("mixer") && groups.count("block") && groups.count("encoder") &&
                       groups.count("frontend") && groups.count("ctc_loss");
  std::string detail = std::to_string(results.size()) + " checks, worst " + worst + ", " + fmt("%.1f s", elapsed) +
                       " (limit 120 s)";
  if (!covered) detail += ", missing a check group";
  if (!failed.empty()) detail += ", failed:" + failed;
  return {all && covered && elapsed <= 120.0, detail};
}

// --- 2 ---

Outcome hypermixer_dual_forms() {
  Rng rng(202);
  const auto start = Clock::now();
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto T = static_cast<std::size_t>(rng.uniform_int(1, 32));
    const auto D = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto P = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto B = static_cast<std::size_t>(rng.uniform_int(1, 3));
    const auto pe = trial % 2 ? PositionalEncoding::kSinusoidal : PositionalEncoding::kOff;
    auto p = HyperMixerParams<double>::create(D, P, pe, rng, "hm");
    randomize(params_of(p), rng, 0.3);
    if (trial % 5 == 4) p.sigma = Activation::kIdentity;
    const auto batch = random_batch(B, T, D, rng);
    Tape<double> tape(false);
    const auto a = hypermixer_forward_linear(tape, as_constant(tape, batch), p);
    const auto b = hypermixer_forward_mixerform(tape, as_constant(tape, batch), p);
    worst = std::max(worst, oracle::max_abs_diff_valid(a.values.value(), b.values.value(), batch.lengths));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-10 && elapsed <= 30.0,
          "100 trials, T <= 32, max |linear - mixerform| " + fmt("%.2e", worst) + " (limit 1e-10), " +
              fmt("%.2f s", elapsed) + " (limit 30 s)"};
}

// --- 3 ---

Outcome summary_mixing_oracle() {
  Rng rng(303);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t chunks = std::size_t{1} << rng.uniform_int(0, 2);
    SummaryMixingDims dims;
    dims.chunks = chunks;
    dims.input = chunks * static_cast<std::size_t>(rng.uniform_int(1, 4));
    dims.local = chunks * static_cast<std::size_t>(rng.uniform_int(1, 4));
    dims.summary = chunks * static_cast<std::size_t>(rng.uniform_int(1, 4));
    dims.output = static_cast<std::size_t>(rng.uniform_int(1, 9));
    auto p = SummaryMixingParams<double>::create(dims, rng, "sm");
    randomize(params_of(p), rng);
    const auto B = static_cast<std::size_t>(rng.uniform_int(1, 3));
    const auto T = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const auto batch = random_batch(B, T, dims.input, rng);
    Tape<double> tape(false);
    const auto y = summary_mixing_forward(tape, as_constant(tape, batch), p).values.value();
    for (std::size_t b = 0; b < B; ++b) {
      const auto want = oracle::summary_mixing(oracle::sequence_rows(batch.values, b, batch.lengths[b]), p);
      for (std::size_t t = 0; t < want.size(); ++t)
        for (std::size_t d = 0; d < want[t].size(); ++d) worst = std::max(worst, std::abs(want[t][d] - y(b, t, d)));
    }
  }
  return {worst <= 1e-12, "100 random shapes, max |library - scalar loop| " + fmt("%.2e", worst) + " (limit 1e-12)"};
}

// --- 4 ---

Outcome ctc_oracle() {
  Rng rng(404);
  double worst = 0;
  std::size_t sequences = 0, infinite = 0;
  bool agree_on_infinite = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto V = static_cast<std::size_t>(rng.uniform_int(1, 3));
    const auto T = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto B = static_cast<std::size_t>(rng.uniform_int(1, 3));
    MaskedBatch<double> logits{oracle::random_tensor({B, T, V + 1}, rng, 2.0), oracle::random_lengths(B, T, rng)};
    zero_padding(logits.values, logits.lengths);
    std::vector<LabelSequence> targets(B);
    for (auto& t : targets) {
      t.resize(static_cast<std::size_t>(rng.uniform_int(0, 3)));
      for (int& l : t) l = static_cast<int>(rng.uniform_int(1, static_cast<std::int64_t>(V)));
    }
    Tape<double> tape(false);
    const auto loss = ctc_loss(tape, as_constant(tape, logits), targets);
    const auto brute = ctc_brute_force(logits, targets);
    for (std::size_t b = 0; b < B; ++b, ++sequences) {
      const double got = loss.per_sequence.value()[b];
      if (std::isinf(brute[b]) || std::isinf(got)) {
        ++infinite;
        agree_on_infinite = agree_on_infinite && got == brute[b] && loss.infeasible[b];
        continue;
      }
      worst = std::max(worst, std::abs(got - brute[b]));
    }
  }
  return {worst <= 1e-12 && agree_on_infinite,
          "200 trials (" + std::to_string(sequences) + " sequences, " + std::to_string(infinite) +
              " infeasible), max |ctc_loss - brute force| " + fmt("%.2e", worst) + " (limit 1e-12)" +
              (agree_on_infinite ? "" : ", infeasible disagreement")};
}

// --- 5 ---

Outcome analytic_exponents() {
  const std::vector<std::size_t> grid = {512, 1024, 2048, 4096, 8192};
  auto slope = [&](const std::function<std::uint64_t(std::size_t)>& floats) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t T : grid) pts.emplace_back(double(T), double(floats(T)));
    return fit_exponent(pts);
  };
  bool ok = true;
  std::ostringstream detail;
  detail << "activation exponent over T 512..8192:";
  struct Case {
    MixerKind kind;
    double lo, hi;
  };
  for (const Case c : {Case{MixerKind::kSummaryMixing, 0.95, 1.05}, Case{MixerKind::kSummaryMixingLite, 0.95, 1.05},
                       Case{MixerKind::kHyperMixer, 0.95, 1.05}, Case{MixerKind::kMhsa, 1.7, 2.05}}) {
    const double mixer = slope([&](std::size_t T) { return mixer_cost(c.kind, 32, T, 4).activation_floats; });
    const EncoderConfig config = preset("toy-branchformer-" + to_string(c.kind));
    const double encoder = slope([&](std::size_t T) { return encoder_cost(config, T).blocks.activation_floats; });
    ok = ok && mixer >= c.lo && mixer <= c.hi && encoder >= c.lo && encoder <= c.hi;
    detail << ' ' << to_string(c.kind) << " mixer " << fmt("%.3f", mixer) << " encoder " << fmt("%.3f", encoder) << " in ["
           << c.lo << ", " << c.hi << "];";
  }
  return {ok, detail.str()};
}

// --- 6 ---

Outcome wallclock_exponents() {
  set_compute_threads(1);
  const std::vector<double> durations = {10.24, 20.48, 40.96, 81.92};  // 1024..8192 frames at 100 fps
  Workload base;
  MeasureOptions options;
  options.repeats = 3;
  options.warmup = 1;
  const auto start = Clock::now();
  const BenchReport report = training_sweep<float>({named(kSmPreset), named(kMhsaPreset)}, durations, base, options);
  const double elapsed = seconds_since(start);

  auto series = [&](const std::string& id) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : report.rows)
      if (r.config_id == id) pts.emplace_back(double(r.frames), r.wall->median_ms);
    return pts;
  };
  const auto sm = series(kSmPreset), mhsa = series(kMhsaPreset);
  const double sm_slope = fit_exponent(sm), mhsa_slope = fit_exponent(mhsa);
  const double ratio = mhsa.back().second / sm.back().second;
  const bool frames_ok = sm.size() == 4 && sm.front().first == 1024 && sm.back().first == 8192;
  return {frames_ok && sm_slope <= 1.3 && mhsa_slope >= 1.5 && ratio >= 2.0 && elapsed <= 600.0,
          "f32, 1 thread, D=32, depth 2, T 1024..8192: summary_mixing slope " + fmt("%.3f", sm_slope) +
              " (<= 1.3), mhsa slope " + fmt("%.3f", mhsa_slope) + " (>= 1.5), time ratio at 8192 " +
              fmt("%.2f", ratio) + " (>= 2.0), " + fmt("%.0f s", elapsed) + " (limit 600 s)"};
}

// --- 7 ---

Outcome rtf_asymptote() {
  set_compute_threads(1);
  const std::vector<double> durations = {10, 20, 30, 40, 50, 60};
  Workload base;
  MeasureOptions options;
  options.repeats = 3;
  options.warmup = 1;
  const BenchReport report = rtf_sweep<float>({named(kSmPreset), named(kMhsaPreset)}, durations, base, options);
  const auto growth = rtf_growth(report.rows, kSmPreset);
  const bool increasing = rtf_strictly_increasing(report.rows, kMhsaPreset);
  std::ostringstream detail;
  detail << "summary_mixing RTF(60)/RTF(10) " << (growth ? fmt("%.3f", *growth) : "n/a") << " (<= 1.5); mhsa RTF";
  for (const auto& r : report.rows)
    if (r.config_id == kMhsaPreset) detail << ' ' << fmt("%.2e", *r.rtf);
  detail << (increasing ? " strictly increasing" : " not strictly increasing");
  return {growth && *growth <= kRtfFlatnessLimit && increasing, detail.str()};
}

// --- 8 ---

// Bit-identical output under new garbage in the padded frames, zeros there.
bool padding_exact(const Forward& fwd, const MaskedBatch<double>& batch, Rng& rng) {
  Tape<double> tape(false);
  const auto a = fwd(tape, as_constant(tape, batch));
  const auto garbage = oracle::repad(batch, rng);
  const auto b = fwd(tape, Sequence<double>{tape.constant(garbage.values), garbage.lengths});
  Tensor<double> masked = a.values.value();
  zero_padding(masked, a.lengths);
  return a.values.value() == b.values.value() && masked == a.values.value();
}

// Largest deviation from y(P x) = P y(x) on sequence 0.
double permutation_error(const Forward& fwd, const MaskedBatch<double>& batch, Rng& rng) {
  std::vector<std::size_t> perm(static_cast<std::size_t>(batch.lengths[0]));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(0, i - 1)]);
  MaskedBatch<double> permuted = batch;
  for (std::size_t t = 0; t < perm.size(); ++t)
    for (std::size_t d = 0; d < batch.features(); ++d) permuted.values(0, t, d) = batch.values(0, perm[t], d);
  Tape<double> tape(false);
  const auto y = fwd(tape, as_constant(tape, batch)).values.value();
  const auto yp = fwd(tape, as_constant(tape, permuted)).values.value();
  double m = 0;
  for (std::size_t t = 0; t < perm.size(); ++t)
    for (std::size_t d = 0; d < y.dim(2); ++d) m = std::max(m, std::abs(yp(0, t, d) - y(0, perm[t], d)));
  return m;
}

std::vector<Block<double>> every_block(const BlockDims& dims, Rng& rng) {
  std::vector<Block<double>> out;
  for (MixerKind kind : kFullMixers) {
    out.emplace_back(make_branchformer_block<double>(kind, dims, rng, "bf"));
    out.emplace_back(make_conformer_block<double>(kind, dims, rng, "cf"));
  }
  out.emplace_back(make_branchformer_lite_block<double>(dims, rng, "lite"));
  for (auto& b : out) randomize(params_of(b), rng);
  return out;
}

Outcome invariance_suite() {
  Rng rng(808);
  std::size_t padding_cases = 0, padding_failures = 0, permutation_cases = 0, identity_cases = 0,
              identity_failures = 0;
  double worst_perm = 0;
  auto check = [&](const Forward& fwd, std::size_t D, bool positional) {
    ++padding_cases;
    if (!padding_exact(fwd, random_batch(3, 9, D, rng), rng)) ++padding_failures;
    if (positional) return;
    ++permutation_cases;
    worst_perm = std::max(worst_perm, permutation_error(fwd, random_batch(2, 9, D, rng), rng));
  };

  // Mixers on their own.
  for (MixerKind kind : kFullMixers) {
    for (PositionalEncoding pe : {PositionalEncoding::kOff, PositionalEncoding::kSinusoidal}) {
      if (pe == PositionalEncoding::kSinusoidal && kind != MixerKind::kHyperMixer) continue;
      auto mixer = create_mixer<double>(kind, 8, kind == MixerKind::kSummaryMixing ? 2 : 4, pe, rng, "m");
      ParameterList<double> ps;
      collect(mixer, ps);
      randomize(ps, rng);
      check([&](auto& t, const auto& x) { return mixer_forward(t, x, mixer); }, 8,
            pe == PositionalEncoding::kSinusoidal);
    }
  }
  // Blocks: kernel 3 for padding, pointwise convolutions for permutation.
  for (std::size_t kernel : {3u, 1u}) {
    for (const auto& block : every_block({8, 4, 12, kernel}, rng)) {
      const Forward fwd = [&](auto& t, const auto& x) { return block_forward(t, x, block); };
      if (kernel == 3) {
        ++padding_cases;
        if (!padding_exact(fwd, random_batch(3, 9, 8, rng), rng)) ++padding_failures;
      } else {
        ++permutation_cases;
        worst_perm = std::max(worst_perm, permutation_error(fwd, random_batch(2, 9, 8, rng), rng));
      }
    }
  }
  // Full encoders built from every preset at small width.
  for (const auto& name : preset_names()) {
    for (bool frontend : {false, true}) {
      EncoderConfig c = preset(name);
      c.model_dim = 8;
      c.heads = 2;
      c.cg_dim = 12;
      c.input_dim = 6;
      c.vocab_size = 5;
      c.frontend = frontend;
      const auto enc = Encoder<double>::create(c, 17);
      auto batch = random_batch(3, frontend ? 24 : 9, 6, rng);
      if (frontend)  // the frontend needs at least 4 frames; the extra ones stay zero
        for (int& l : batch.lengths) l = std::max(l, 8);
      ++padding_cases;
      if (!padding_exact([&](auto& t, const auto& x) { return encoder_logits(t, x, enc); }, batch, rng))
        ++padding_failures;
      if (frontend || c.positional_encoding != PositionalEncoding::kOff) continue;
      c.conv_kernel = 1;
      const auto pointwise = Encoder<double>::create(c, 18);
      ++permutation_cases;
      worst_perm = std::max(worst_perm, permutation_error([&](auto& t, const auto& x) {
        return encoder_logits(t, x, pointwise);
      }, random_batch(2, 9, 6, rng), rng));
    }
  }

  // Zero-initialised residual branches leave the input untouched (Branchformer)
  // or reduce the block to its final norm (Conformer).
  const BlockDims dims{8, 4, 12, 3};
  auto identity = [&](bool ok) {
    ++identity_cases;
    if (!ok) ++identity_failures;
  };
  for (MixerKind kind : kFullMixers) {
    auto bf = make_branchformer_block<double>(kind, dims, rng, "bf");
    randomize(params_of(bf), rng);
    zero(bf.merge.output);
    const auto batch = random_batch(2, 6, 8, rng);
    Tape<double> tape(false);
    identity(branchformer_block_forward(tape, as_constant(tape, batch), bf).values.value() == batch.values);

    auto cf = make_conformer_block<double>(kind, dims, rng, "cf");
    randomize(params_of(cf), rng);
    zero(cf.ffn1.down);
    zero(cf.ffn2.down);
    zero(cf.conv.project);
    std::visit(
        [](auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, SummaryMixingParams<double>>) zero(m.combiner);
          if constexpr (std::is_same_v<M, HyperMixerParams<double>>) zero(m.local.output);
          if constexpr (std::is_same_v<M, MhsaParams<double>>) zero(m.output);
        },
        cf.mixer);
    const auto y = conformer_block_forward(tape, as_constant(tape, batch), cf).values.value();
    const auto want = layernorm_forward(tape, as_constant(tape, batch), cf.final_norm).values.value();
    identity(oracle::max_abs_diff_valid(y, want, batch.lengths) == 0.0);
  }
  {
    auto lite = make_branchformer_lite_block<double>(dims, rng, "lite");
    randomize(params_of(lite), rng);
    zero(lite.combiner);
    const auto batch = random_batch(2, 6, 8, rng);
    Tape<double> tape(false);
    identity(branchformer_lite_block_forward(tape, as_constant(tape, batch), lite).values.value() == batch.values);
  }

  return {padding_failures == 0 && worst_perm <= 1e-12 && identity_failures == 0,
          "padding exact " + std::to_string(padding_cases - padding_failures) + "/" + std::to_string(padding_cases) +
              ", permutation max error " + fmt("%.2e", worst_perm) + " over " + std::to_string(permutation_cases) +
              " configs (limit 1e-12), zero-init identity " + std::to_string(identity_cases - identity_failures) +
              "/" + std::to_string(identity_cases)};
}

// --- 9 ---

Outcome chunking() {
  Rng rng(909);
  const std::size_t formula = summary_mixing_chunked_param_count(1024, 4);
  const auto big = ChunkedDense<double>::create(1024, 1024, 4, Activation::kGelu, rng, "big");
  const bool count_ok = formula == 262144 && big.num_weights() == 262144;

  SummaryMixingDims one{.input = 16, .chunks = 1}, four{.input = 16, .chunks = 4};
  const auto p1 = SummaryMixingParams<double>::create(one, rng, "sm1");
  const auto p4 = SummaryMixingParams<double>::create(four, rng, "sm4");
  const auto batch = random_batch(3, 7, 16, rng);
  Tape<double> tape(false);
  const auto y1 = summary_mixing_forward(tape, as_constant(tape, batch), p1);
  const auto y4 = summary_mixing_forward(tape, as_constant(tape, batch), p4);
  const bool shapes_ok = y1.values.shape() == y4.values.shape() && y1.lengths == y4.lengths;

  auto layer = ChunkedDense<double>::create(8, 12, 4, Activation::kGelu, rng, "chunked");
  auto ps = params_of(layer);
  randomize(ps, rng);
  const auto x = random_batch(2, 5, 8, rng);
  Parameter<double> input{"input", x.values};
  const auto w = oracle::random_loss_weights({2, 5, 12}, x.lengths, rng);
  ps.push_back(&input);
  const auto r = finite_difference_check(
      [&](Tape<double>& t) {
        return weighted_sum(t, chunked_dense_forward(t, as_tracked(t, input, x.lengths), layer).values, w);
      },
      ps);
  const bool grad_ok = r.max_relative_error <= kGradcheckTolerance;
  return {count_ok && shapes_ok && grad_ok,
          "D=1024 n=4 weights " + std::to_string(big.num_weights()) + " (formula " + std::to_string(formula) +
              ", expected 262144), chunked vs unchunked shapes " + (shapes_ok ? "identical" : "differ") +
              ", gradcheck " + fmt("%.2e", r.max_relative_error) + " (limit 1e-5)"};
}

// --- 10 ---

Outcome toy_training() {
  bool ok = true;
  std::ostringstream detail;
  detail << "500 steps, seed 0:";
  for (const char* name : {kSmPreset, kMhsaPreset}) {
    const auto start = Clock::now();
    const TrainResult r = train_toy<double>(preset(name), ToyTaskSpec{}, TrainOptions{});
    const double elapsed = seconds_since(start);
    ok = ok && r.exact_match >= 0.95 && elapsed <= 300.0;
    detail << ' ' << name << " exact match " << fmt("%.3f", r.exact_match) << " in " << fmt("%.0f s", elapsed)
           << ';';
  }
  detail << " (need >= 0.95, <= 300 s each)";
  return {ok, detail.str()};
}

struct Criterion {
  int number;
  const char* title;
  Outcome (*run)();
};

}  // namespace
}  // namespace summix

int main(int argc, char** argv) {
  using namespace summix;
  const Criterion criteria[] = {
      {1, "gradient suite", gradient_suite},
      {2, "hypermixer dual forms", hypermixer_dual_forms},
      {3, "summary mixing oracle", summary_mixing_oracle},
      {4, "ctc oracle", ctc_oracle},
      {5, "analytic complexity", analytic_exponents},
      {6, "wall-clock complexity", wallclock_exponents},
      {7, "rtf asymptote", rtf_asymptote},
      {8, "invariance suite", invariance_suite},
      {9, "chunking", chunking},
      {10, "toy training", toy_training},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s %2d %s: %s\n", o.passed ? "PASS" : "FAIL", c.number, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
