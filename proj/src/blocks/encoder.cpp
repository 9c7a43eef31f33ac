#include "summix/blocks/encoder.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "summix/numcore/error.hpp"

namespace summix {

using nlohmann::json;

void EncoderConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("encoder config: " + msg); };
  if (model_dim == 0) fail("model_dim must be positive");
  if (heads == 0 || model_dim % heads != 0) {
    fail("heads " + std::to_string(heads) + " must divide model_dim " + std::to_string(model_dim));
  }
  if (cg_dim == 0 || cg_dim % 2 != 0) fail("cg_dim " + std::to_string(cg_dim) + " must be even and positive");
  if (conv_kernel % 2 == 0) fail("conv_kernel " + std::to_string(conv_kernel) + " must be odd");
  if (input_dim == 0) fail("input_dim must be positive");
  if (vocab_size == 0) fail("vocab_size must be positive");
  if (dropout != 0.0) fail("dropout is fixed at 0");
  if (mixer_kind == MixerKind::kSummaryMixingLite && block_kind != BlockKind::kBranchformer) {
    fail("summary_mixing_lite requires block_kind branchformer");
  }
}

PositionalEncoding default_positional_encoding(MixerKind mixer) {
  return mixer == MixerKind::kMhsa ? PositionalEncoding::kSinusoidal : PositionalEncoding::kOff;
}

namespace {

std::string positional_name(PositionalEncoding pe) {
  return pe == PositionalEncoding::kSinusoidal ? "sinusoidal" : "off";
}

PositionalEncoding parse_positional(const std::string& s) {
  if (s == "off") return PositionalEncoding::kOff;
  if (s == "sinusoidal") return PositionalEncoding::kSinusoidal;
  throw ConfigError("encoder config: positional_encoding must be off or sinusoidal, got '" + s + "'");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"block_kind", "mixer_kind", "depth",      "model_dim",
                                          "heads",      "cg_dim",     "conv_kernel", "frontend",
                                          "input_dim",  "vocab_size", "dropout",    "positional_encoding"};
  return keys;
}

}  // namespace

std::string to_json(const EncoderConfig& c, int indent) {
  json j{{"block_kind", to_string(c.block_kind)},
         {"mixer_kind", to_string(c.mixer_kind)},
         {"depth", c.depth},
         {"model_dim", c.model_dim},
         {"heads", c.heads},
         {"cg_dim", c.cg_dim},
         {"conv_kernel", c.conv_kernel},
         {"frontend", c.frontend},
         {"input_dim", c.input_dim},
         {"vocab_size", c.vocab_size},
         {"dropout", c.dropout},
         {"positional_encoding", positional_name(c.positional_encoding)}};
  return j.dump(indent);
}

EncoderConfig encoder_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("encoder config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("encoder config: expected a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) throw ConfigError("encoder config: unknown key '" + item.key() + "'");
  }
  EncoderConfig c;
  try {
    if (j.contains("block_kind")) c.block_kind = parse_block_kind(j["block_kind"].get<std::string>());
    if (j.contains("mixer_kind")) c.mixer_kind = parse_mixer_kind(j["mixer_kind"].get<std::string>());
    c.positional_encoding = default_positional_encoding(c.mixer_kind);
    auto read = [&](const char* key, std::size_t& out) {
      if (!j.contains(key)) return;
      const auto v = j[key].get<long long>();
      if (v < 0) throw ConfigError(std::string("encoder config: ") + key + " must be non-negative");
      out = static_cast<std::size_t>(v);
    };
    read("depth", c.depth);
    read("model_dim", c.model_dim);
    read("heads", c.heads);
    read("cg_dim", c.cg_dim);
    read("conv_kernel", c.conv_kernel);
    read("input_dim", c.input_dim);
    read("vocab_size", c.vocab_size);
    if (j.contains("frontend")) c.frontend = j["frontend"].get<bool>();
    if (j.contains("dropout")) c.dropout = j["dropout"].get<double>();
    if (j.contains("positional_encoding")) {
      c.positional_encoding = parse_positional(j["positional_encoding"].get<std::string>());
    }
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("encoder config: wrong value type: ") + e.what());
  }
  c.validate();
  return c;
}

EncoderConfig load_encoder_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read encoder config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return encoder_config_from_json(ss.str());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (BlockKind b : {BlockKind::kBranchformer, BlockKind::kConformer}) {
    for (MixerKind m : {MixerKind::kSummaryMixing, MixerKind::kSummaryMixingLite, MixerKind::kHyperMixer,
                        MixerKind::kMhsa}) {
      if (m == MixerKind::kSummaryMixingLite && b != BlockKind::kBranchformer) continue;
      names.push_back("toy-" + to_string(b) + "-" + to_string(m));
    }
  }
  return names;
}

EncoderConfig preset(std::string_view name) {
  for (BlockKind b : {BlockKind::kBranchformer, BlockKind::kConformer}) {
    for (MixerKind m : {MixerKind::kSummaryMixing, MixerKind::kSummaryMixingLite, MixerKind::kHyperMixer,
                        MixerKind::kMhsa}) {
      if (m == MixerKind::kSummaryMixingLite && b != BlockKind::kBranchformer) continue;
      if (name != "toy-" + to_string(b) + "-" + to_string(m)) continue;
      EncoderConfig c;
      c.block_kind = b;
      c.mixer_kind = m;
      c.positional_encoding = default_positional_encoding(m);
      return c;
    }
  }
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

template <typename Real>
Encoder<Real> Encoder<Real>::create(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Encoder e;
  e.config = config;
  const std::size_t D = config.model_dim;
  if (config.frontend) {
    e.frontend = FrontendParams<Real>::create(config.input_dim, D, rng, "frontend");
  } else {
    e.input_projection = DenseGelu<Real>::create(config.input_dim, D, Activation::kIdentity, rng, "input");
  }
  const BlockDims dims = config.block_dims();
  for (std::size_t i = 0; i < config.depth; ++i) {
    const std::string name = "blocks." + std::to_string(i);
    if (config.block_kind == BlockKind::kConformer) {
      e.blocks.emplace_back(make_conformer_block<Real>(config.mixer_kind, dims, rng, name));
    } else if (config.mixer_kind == MixerKind::kSummaryMixingLite) {
      e.blocks.emplace_back(make_branchformer_lite_block<Real>(dims, rng, name));
    } else {
      e.blocks.emplace_back(make_branchformer_block<Real>(config.mixer_kind, dims, rng, name));
    }
  }
  if (config.block_kind == BlockKind::kBranchformer && config.depth > 0) {
    e.output_norm = LayerNormParams<Real>::create(D, "output_norm");
  }
  e.head = DenseGelu<Real>::create(D, config.vocab_size + 1, Activation::kIdentity, rng, "head");
  return e;
}

template <typename Real>
std::size_t Encoder<Real>::num_parameters() const {
  std::size_t n = head.num_parameters();
  if (frontend) n += frontend->num_parameters();
  if (input_projection) n += input_projection->num_parameters();
  if (output_norm) n += output_norm->num_parameters();
  for (const auto& b : blocks) n += std::visit([](const auto& blk) { return blk.num_parameters(); }, b);
  return n;
}

template <typename Real>
void Encoder<Real>::collect(ParameterList<Real>& out) {
  if (frontend) frontend->collect(out);
  if (input_projection) input_projection->collect(out);
  for (auto& b : blocks) std::visit([&](auto& blk) { blk.collect(out); }, b);
  if (output_norm) output_norm->collect(out);
  head.collect(out);
}

template <typename Real>
Sequence<Real> encoder_forward(Tape<Real>& tape, const Sequence<Real>& features, const Encoder<Real>& e) {
  Sequence<Real> x = e.frontend ? frontend_forward(tape, features, *e.frontend)
                                : dense_gelu_forward(tape, features, *e.input_projection);
  if (e.config.positional_encoding == PositionalEncoding::kSinusoidal) x = add_sinusoidal_positions(tape, x);
  for (const auto& block : e.blocks) x = block_forward(tape, x, block);
  if (e.output_norm) x = layernorm_forward(tape, x, *e.output_norm);
  return x;
}

template <typename Real>
Sequence<Real> encoder_logits(Tape<Real>& tape, const Sequence<Real>& features, const Encoder<Real>& e) {
  return dense_gelu_forward(tape, encoder_forward(tape, features, e), e.head);
}

// --- cost model ---

namespace {

MixerCost layernorm_cost(std::uint64_t T, std::uint64_t D) {
  // mean, variance, normalise, gain, bias; normalised copy kept for backward.
  return {5 * T * D, 2 * T * D, 0};
}

MixerCost elementwise_cost(std::uint64_t T, std::uint64_t D) { return {T * D, T * D, 0}; }

MixerCost depthwise_cost(std::uint64_t T, std::uint64_t D, std::uint64_t K) { return {T * D * K, T * D, 0}; }

MixerCost cgmlp_cost(std::uint64_t T, const EncoderConfig& c) {
  const std::uint64_t half = c.cg_dim / 2;
  MixerCost m = dense_cost(T, c.model_dim, c.cg_dim, true);
  m.activation_floats += T * c.cg_dim;  // two slices
  m += layernorm_cost(T, half);
  m += depthwise_cost(T, half, c.conv_kernel);
  m += elementwise_cost(T, half);  // gating product
  m += dense_cost(T, half, c.model_dim, false);
  return m;
}

MixerCost block_cost(std::uint64_t T, const EncoderConfig& c) {
  const std::uint64_t D = c.model_dim;
  MixerCost m;
  if (c.block_kind == BlockKind::kBranchformer) {
    m += layernorm_cost(T, D);
    m += cgmlp_cost(T, c);
    m += mixer_cost(c.mixer_kind, D, T, c.heads);
    if (c.mixer_kind != MixerKind::kSummaryMixingLite) {
      m.activation_floats += 2 * T * D;  // branch concatenation
      m += dense_cost(T, 2 * D, 2 * D, true);
      m += dense_cost(T, 2 * D, D, true);
    }
    m += elementwise_cost(T, D);  // residual
    return m;
  }
  for (int ffn = 0; ffn < 2; ++ffn) {
    m += layernorm_cost(T, D);
    m += dense_cost(T, D, c.cg_dim, true);
    m += dense_cost(T, c.cg_dim, D, false);
    m += elementwise_cost(T, D);  // half step
    m += elementwise_cost(T, D);  // residual
  }
  m += layernorm_cost(T, D);
  m += mixer_cost(c.mixer_kind, D, T, c.heads);
  m += elementwise_cost(T, D);
  m += layernorm_cost(T, D);
  m += dense_cost(T, D, 2 * D, false);
  m.activation_floats += 2 * T * D;  // GLU halves
  m += elementwise_cost(T, D);       // sigmoid
  m += elementwise_cost(T, D);       // product
  m += depthwise_cost(T, D, c.conv_kernel);
  m += layernorm_cost(T, D);
  m += elementwise_cost(T, D);  // GeLU
  m += dense_cost(T, D, D, false);
  m += elementwise_cost(T, D);
  m += layernorm_cost(T, D);  // final
  return m;
}

}  // namespace

EncoderCost encoder_cost(const EncoderConfig& c, std::size_t time) {
  c.validate();
  if (time == 0) throw ConfigError("encoder_cost: time must be positive");
  EncoderCost out;
  MixerCost front;
  std::uint64_t T = time;
  if (c.frontend) {
    const std::uint64_t T1 = strided_conv_output_length(time, 3, 2);
    const std::uint64_t T2 = strided_conv_output_length(T1, 3, 2);
    front += dense_cost(T1, 3 * c.input_dim, FrontendParams<double>::kFilters1, true);
    front += dense_cost(T2, 3 * FrontendParams<double>::kFilters1, FrontendParams<double>::kFilters2, true);
    front += dense_cost(T2, FrontendParams<double>::kFilters2, c.model_dim, false);
    T = T2;
  } else {
    front += dense_cost(T, c.input_dim, c.model_dim, false);
  }
  if (c.positional_encoding == PositionalEncoding::kSinusoidal) front += elementwise_cost(T, c.model_dim);
  out.frames = static_cast<std::size_t>(T);
  const MixerCost one = block_cost(T, c);
  for (std::size_t i = 0; i < c.depth; ++i) out.blocks += one;
  out.total = front;
  out.total += out.blocks;
  if (c.block_kind == BlockKind::kBranchformer && c.depth > 0) out.total += layernorm_cost(T, c.model_dim);
  out.total += dense_cost(T, c.model_dim, c.vocab_size + 1, false);
  return out;
}

template struct Encoder<float>;
template struct Encoder<double>;
template Sequence<float> encoder_forward(Tape<float>&, const Sequence<float>&, const Encoder<float>&);
template Sequence<double> encoder_forward(Tape<double>&, const Sequence<double>&, const Encoder<double>&);
template Sequence<float> encoder_logits(Tape<float>&, const Sequence<float>&, const Encoder<float>&);
template Sequence<double> encoder_logits(Tape<double>&, const Sequence<double>&, const Encoder<double>&);

}  // namespace summix
