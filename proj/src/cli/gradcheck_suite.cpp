#include "summix/cli/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "summix/numcore/gradcheck.hpp"

namespace summix {

namespace {

using Forward = std::function<Sequence<double>(Tape<double>&, const Sequence<double>&)>;

constexpr std::size_t kDim = 8;

BlockDims toy_dims() { return {kDim, 2, 16, 3}; }

// Keeps the initialiser's weights; moves gains and biases off 1 and 0 so no
// path is exactly linear or exactly zero.
void perturb_affine(const ParameterList<double>& params, Rng& rng) {
  auto ends_with = [](const std::string& s, const std::string& tail) {
    return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
  };
  for (Parameter<double>* p : params) {
    if (ends_with(p->name, ".gain")) {
      for (double& v : p->value.vec()) v = 1.0 + 0.1 * rng.normal();
    } else if (ends_with(p->name, ".bias")) {
      for (double& v : p->value.vec()) v = 0.1 * rng.normal();
    }
  }
}

MaskedBatch<double> random_batch(std::size_t B, std::size_t T, std::size_t D, Rng& rng) {
  MaskedBatch<double> batch{Tensor<double>({B, T, D}), std::vector<int>(B, static_cast<int>(T))};
  for (double& v : batch.values.vec()) v = rng.normal();
  for (std::size_t b = 1; b < B; ++b) batch.lengths[b] = static_cast<int>(T) - static_cast<int>(b);
  zero_padding(batch.values, batch.lengths);
  return batch;
}

// Random linear functional of the valid outputs of fwd, differentiated with
// respect to the parameters and the input.
GradcheckResult check_forward(const Forward& fwd, ParameterList<double> params, const MaskedBatch<double>& batch,
                              Rng& rng, const GradcheckOptions& options) {
  Parameter<double> input{"input", batch.values};
  Tape<double> probe(false);
  const auto out = fwd(probe, as_constant(probe, batch));
  Tensor<double> w(out.values.shape());
  for (double& v : w.vec()) v = rng.normal();
  zero_padding(w, out.lengths);
  auto loss = [&](Tape<double>& tape) {
    return weighted_sum(tape, fwd(tape, as_tracked(tape, input, batch.lengths)).values, w);
  };
  params.push_back(&input);
  return finite_difference_check(loss, params, options);
}

template <typename M>
ParameterList<double> params_of(M& m) {
  ParameterList<double> ps;
  m.collect(ps);
  return ps;
}

EncoderConfig toy_encoder(const EncoderConfig& c) {
  EncoderConfig t = c;
  t.depth = 2;
  t.model_dim = kDim;
  t.heads = 2;
  t.cg_dim = 16;
  t.conv_kernel = 3;
  t.frontend = true;
  t.input_dim = 5;
  t.vocab_size = 4;
  return t;
}

std::string block_name(const EncoderConfig& c) {
  return "block/" + to_string(c.block_kind) + "-" + to_string(c.mixer_kind);
}

struct Check {
  std::string name;
  double tolerance;
  std::function<GradcheckResult(Rng&, const GradcheckOptions&)> run;
};

std::vector<Check> build_checks(const std::vector<NamedConfig>& configs) {
  std::vector<Check> checks;
  auto has = [&](const std::string& name) {
    return std::any_of(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
  };

  for (const auto& nc : configs) {
    const EncoderConfig c = nc.config;
    const std::string mixer = "mixer/" + to_string(c.mixer_kind);
    if (c.mixer_kind != MixerKind::kSummaryMixingLite && !has(mixer)) {
      checks.push_back({mixer, kGradcheckTolerance, [c](Rng& rng, const GradcheckOptions& o) {
                          const std::size_t heads = c.mixer_kind == MixerKind::kMhsa ? 2 : 1;
                          auto m = create_mixer<double>(c.mixer_kind, kDim, heads, c.positional_encoding, rng, "m");
                          ParameterList<double> ps;
                          collect(m, ps);
                          perturb_affine(ps, rng);
                          const auto batch = random_batch(2, 5, kDim, rng);
                          return check_forward([&](auto& t, const auto& x) { return mixer_forward(t, x, m); }, ps,
                                               batch, rng, o);
                        }});
    }
  }
  for (const auto& nc : configs) {
    const EncoderConfig c = nc.config;
    if (has(block_name(c))) continue;
    checks.push_back({block_name(c), kGradcheckTolerance, [c](Rng& rng, const GradcheckOptions& o) {
                        Block<double> block = [&]() -> Block<double> {
                          if (c.block_kind == BlockKind::kConformer)
                            return make_conformer_block<double>(c.mixer_kind, toy_dims(), rng, "b");
                          if (c.mixer_kind == MixerKind::kSummaryMixingLite)
                            return make_branchformer_lite_block<double>(toy_dims(), rng, "b");
                          return make_branchformer_block<double>(c.mixer_kind, toy_dims(), rng, "b");
                        }();
                        ParameterList<double> ps;
                        std::visit([&](auto& b) { b.collect(ps); }, block);
                        perturb_affine(ps, rng);
                        const auto batch = random_batch(2, 5, kDim, rng);
                        return check_forward([&](auto& t, const auto& x) { return block_forward(t, x, block); }, ps,
                                             batch, rng, o);
                      }});
  }
  for (const auto& nc : configs) {
    const EncoderConfig c = toy_encoder(nc.config);
    const std::string name = "encoder/" + nc.id;
    if (has(name)) continue;
    checks.push_back({name, kEncoderGradcheckTolerance, [c](Rng& rng, const GradcheckOptions& o) {
                        auto enc = Encoder<double>::create(c, rng.next());
                        auto ps = enc.parameters();
                        perturb_affine(ps, rng);
                        MaskedBatch<double> batch = random_batch(2, 14, c.input_dim, rng);
                        Parameter<double> input{"input", batch.values};
                        const std::vector<LabelSequence> targets = {{1, 3}, {2}};
                        auto loss = [&](Tape<double>& tape) {
                          auto logits = encoder_logits(tape, as_tracked(tape, input, batch.lengths), enc);
                          return ctc_loss(tape, logits, targets).mean;
                        };
                        ps.push_back(&input);
                        return finite_difference_check(loss, ps, o);
                      }});
  }
  if (configs.empty()) return checks;

  checks.push_back({"frontend", kGradcheckTolerance, [](Rng& rng, const GradcheckOptions& o) {
                      auto fe = FrontendParams<double>::create(3, kDim, rng, "fe");
                      auto ps = params_of(fe);
                      perturb_affine(ps, rng);
                      const auto batch = random_batch(2, 9, 3, rng);
                      return check_forward([&](auto& t, const auto& x) { return frontend_forward(t, x, fe); }, ps,
                                           batch, rng, o);
                    }});
  checks.push_back({"cgmlp", kGradcheckTolerance, [](Rng& rng, const GradcheckOptions& o) {
                      auto p = CgMlpParams<double>::create(kDim, 16, 3, rng, "cg");
                      auto ps = params_of(p);
                      perturb_affine(ps, rng);
                      const auto batch = random_batch(2, 5, kDim, rng);
                      return check_forward([&](auto& t, const auto& x) { return cgmlp_forward(t, x, p); }, ps, batch,
                                           rng, o);
                    }});
  checks.push_back({"chunked_dense", kGradcheckTolerance, [](Rng& rng, const GradcheckOptions& o) {
                      auto p = ChunkedDense<double>::create(kDim, kDim, 4, Activation::kGelu, rng, "chunk");
                      auto ps = params_of(p);
                      perturb_affine(ps, rng);
                      const auto batch = random_batch(2, 4, kDim, rng);
                      return check_forward([&](auto& t, const auto& x) { return chunked_dense_forward(t, x, p); }, ps,
                                           batch, rng, o);
                    }});
  checks.push_back({"ctc_loss", kGradcheckTolerance, [](Rng& rng, const GradcheckOptions& o) {
                      const auto batch = random_batch(3, 7, 4, rng);
                      Parameter<double> logits{"logits", batch.values};
                      const std::vector<LabelSequence> targets = {{1, 2, 2}, {3}, {}};
                      auto loss = [&](Tape<double>& tape) {
                        return ctc_loss(tape, as_tracked(tape, logits, batch.lengths), targets).mean;
                      };
                      return finite_difference_check(loss, {&logits}, o);
                    }});
  return checks;
}

}  // namespace

std::vector<std::string> gradcheck_suite_names(const std::vector<NamedConfig>& configs) {
  std::vector<std::string> names;
  for (const auto& c : build_checks(configs)) names.push_back(c.name);
  return names;
}

std::vector<CheckResult> run_gradcheck_suite(const std::vector<NamedConfig>& configs, const SuiteOptions& options) {
  std::vector<CheckResult> results;
  std::uint64_t index = 0;
  for (const auto& check : build_checks(configs)) {
    ++index;
    if (!options.filter.empty() && check.name.find(options.filter) == std::string::npos) continue;
    // Each check draws from its own stream, so filtering does not change it.
    Rng rng(options.seed * 1000003 + index);
    GradcheckOptions o;
    o.seed = options.seed;
    o.corrupt_analytic = options.corrupt_gradient;
    const GradcheckResult r = check.run(rng, o);
    results.push_back({check.name, r.max_relative_error, check.tolerance, r.coordinates_checked, r.worst_parameter,
                       r.worst_index, r.worst_analytic, r.worst_numeric, r.max_relative_error <= check.tolerance});
  }
  return results;
}

}  // namespace summix
