#include "summix/mixers/cost.hpp"

#include "summix/numcore/error.hpp"

namespace summix {

std::string to_string(MixerKind kind) {
  switch (kind) {
    case MixerKind::kSummaryMixing: return "summary_mixing";
    case MixerKind::kSummaryMixingLite: return "summary_mixing_lite";
    case MixerKind::kHyperMixer: return "hypermixer";
    case MixerKind::kMhsa: return "mhsa";
  }
  throw ConfigError("unknown mixer kind");
}

MixerKind parse_mixer_kind(std::string_view name) {
  for (MixerKind k : {MixerKind::kSummaryMixing, MixerKind::kSummaryMixingLite,
                      MixerKind::kHyperMixer, MixerKind::kMhsa}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown mixer kind '" + std::string(name) +
                    "' (expected summary_mixing, summary_mixing_lite, hypermixer or mhsa)");
}

MixerCost dense_cost(std::size_t time, std::size_t in, std::size_t out, bool gelu) {
  const std::uint64_t T = time, I = in, O = out;
  MixerCost c;
  c.flops = T * (I * O + O) + (gelu ? T * O : 0);
  // Output, plus the pre-activation kept for backward.
  c.activation_floats = T * O * (gelu ? 2 : 1);
  return c;
}

MixerCost chunked_dense_cost(std::size_t time, std::size_t in, std::size_t out, std::size_t chunks) {
  if (chunks == 0 || in % chunks != 0 || out % chunks != 0) {
    throw ConfigError("chunked_dense_cost: chunk count must divide both dims");
  }
  MixerCost c;
  for (std::size_t k = 0; k < chunks; ++k) c += dense_cost(time, in / chunks, out / chunks, true);
  // Input slices and the concatenated output.
  if (chunks > 1) c.activation_floats += static_cast<std::uint64_t>(time) * (in + out);
  return c;
}

namespace {

// Summary branch and combiner shared by both summary-mixing kinds.
MixerCost summary_and_combine(std::uint64_t T, std::size_t D, std::size_t chunks) {
  MixerCost c = chunked_dense_cost(T, D, D, chunks);
  c.flops += T * D;                   // mean accumulation
  c.activation_floats += D;           // summary vector
  c.activation_floats += T * D;       // broadcast
  c.activation_floats += 2 * T * D;   // concatenation
  c += dense_cost(T, 2 * D, D, true);
  return c;
}

}  // namespace

MixerCost mixer_cost(MixerKind kind, std::size_t dim, std::size_t time, std::size_t heads) {
  if (dim == 0 || time == 0 || heads == 0) throw ConfigError("mixer_cost: dims must be positive");
  const std::uint64_t T = time, D = dim, h = heads;
  MixerCost c;
  switch (kind) {
    case MixerKind::kSummaryMixing:
      c = chunked_dense_cost(time, dim, dim, heads);
      c += summary_and_combine(T, dim, heads);
      return c;
    case MixerKind::kSummaryMixingLite:
      return summary_and_combine(T, dim, heads);
    case MixerKind::kHyperMixer:
      for (int mlp = 0; mlp < 2; ++mlp) {
        c += dense_cost(time, dim, dim, true);
        c += dense_cost(time, dim, dim, false);
      }
      c.flops += T * D * D;                  // sum of outer products
      c.activation_floats += D * D;
      c.flops += D * D;                      // sigma on the global matrix
      c.activation_floats += D * D;
      c.flops += T * D * D;                  // projection
      c.activation_floats += T * D;
      return c;
    case MixerKind::kMhsa:
      if (dim % heads != 0) throw ConfigError("mixer_cost: heads must divide the model dim");
      for (int proj = 0; proj < 4; ++proj) c += dense_cost(time, dim, dim, false);
      c.flops += 2 * T * T * D;              // scores and context, h * T^2 * (D / h) each
      c.flops += 2 * h * T * T;              // exponentials and normalisation
      c.activation_floats += h * T * T;      // attention weights
      c.activation_floats += T * D;          // context
      c.pairwise_floats = h * T * (T - 1);
      return c;
  }
  throw ConfigError("mixer_cost: unknown mixer kind");
}

}  // namespace summix
