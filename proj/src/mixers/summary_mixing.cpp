#include "summix/mixers/summary_mixing.hpp"

#include "summix/numcore/error.hpp"

namespace summix {
namespace {

void require_divides(std::size_t chunks, std::size_t dim, const char* what) {
  if (chunks == 0 || dim % chunks != 0) {
    throw ConfigError("summary mixing: " + std::to_string(chunks) + " chunks do not divide " +
                      what + " dim " + std::to_string(dim));
  }
}

}  // namespace

template <typename Real>
ChunkedDense<Real> ChunkedDense<Real>::create(std::size_t in, std::size_t out,
                                              std::size_t num_chunks, Activation act, Rng& rng,
                                              const std::string& name) {
  require_divides(num_chunks, in, "input");
  require_divides(num_chunks, out, "output");
  ChunkedDense layer;
  if (num_chunks == 1) {
    layer.chunks.push_back(DenseGelu<Real>::create(in, out, act, rng, name));
    return layer;
  }
  for (std::size_t c = 0; c < num_chunks; ++c) {
    layer.chunks.push_back(DenseGelu<Real>::create(in / num_chunks, out / num_chunks, act, rng,
                                                   name + ".chunk" + std::to_string(c)));
  }
  return layer;
}

template <typename Real>
std::size_t ChunkedDense<Real>::in_dim() const {
  return chunks.front().in_dim() * chunks.size();
}

template <typename Real>
std::size_t ChunkedDense<Real>::out_dim() const {
  return chunks.front().out_dim() * chunks.size();
}

template <typename Real>
std::size_t ChunkedDense<Real>::num_weights() const {
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.num_weights();
  return n;
}

template <typename Real>
std::size_t ChunkedDense<Real>::num_parameters() const {
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.num_parameters();
  return n;
}

template <typename Real>
void ChunkedDense<Real>::collect(ParameterList<Real>& out) {
  for (auto& c : chunks) c.collect(out);
}

template <typename Real>
Sequence<Real> chunked_dense_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                     const ChunkedDense<Real>& layer) {
  if (x.features() != layer.in_dim()) {
    throw DimensionError("chunked_dense_forward", "input features", x.features(), "layer input",
                         layer.in_dim());
  }
  if (layer.num_chunks() == 1) return dense_gelu_forward(tape, x, layer.chunks.front());
  const std::size_t width = layer.chunks.front().in_dim();
  std::vector<Sequence<Real>> parts;
  parts.reserve(layer.num_chunks());
  for (std::size_t c = 0; c < layer.num_chunks(); ++c) {
    Sequence<Real> slice = slice_features(tape, x, c * width, (c + 1) * width);
    parts.push_back(dense_gelu_forward(tape, slice, layer.chunks[c]));
  }
  return concat_features(tape, parts);
}

template <typename Real>
SummaryMixingParams<Real> SummaryMixingParams<Real>::create(const SummaryMixingDims& dims,
                                                            Rng& rng, const std::string& name) {
  const std::size_t d = dims.input;
  const std::size_t local = dims.local ? dims.local : d;
  const std::size_t summary = dims.summary ? dims.summary : d;
  const std::size_t output = dims.output ? dims.output : d;
  if (d == 0) throw ConfigError("summary mixing: input dim must be positive");
  SummaryMixingParams p;
  p.local = ChunkedDense<Real>::create(d, local, dims.chunks, Activation::kGelu, rng, name + ".local");
  p.summary =
      ChunkedDense<Real>::create(d, summary, dims.chunks, Activation::kGelu, rng, name + ".summary");
  p.combiner = DenseGelu<Real>::create(local + summary, output, Activation::kGelu, rng,
                                       name + ".combiner");
  return p;
}

template <typename Real>
Sequence<Real> summary_mixing_combine(Tape<Real>& tape, const Sequence<Real>& local,
                                      const Sequence<Real>& summary_input,
                                      const ChunkedDense<Real>& summary,
                                      const DenseGelu<Real>& combiner) {
  Sequence<Real> s = chunked_dense_forward(tape, summary_input, summary);
  Var<Real> mean = masked_mean_over_time(tape, s);
  Sequence<Real> spread = broadcast_over_time(tape, mean, s.lengths, s.time());
  return dense_gelu_forward(tape, concat_features<Real>(tape, {local, spread}), combiner);
}

template <typename Real>
Sequence<Real> summary_mixing_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                      const SummaryMixingParams<Real>& params) {
  Sequence<Real> f = chunked_dense_forward(tape, x, params.local);
  return summary_mixing_combine(tape, f, x, params.summary, params.combiner);
}

std::size_t summary_mixing_chunked_param_count(std::size_t dim, std::size_t chunks) {
  require_divides(chunks, dim, "model");
  const std::size_t width = dim / chunks;
  return width * width * chunks;
}

#define SUMMIX_INSTANTIATE(R)                                                                   \
  template struct ChunkedDense<R>;                                                              \
  template struct SummaryMixingParams<R>;                                                       \
  template Sequence<R> chunked_dense_forward(Tape<R>&, const Sequence<R>&,                      \
                                             const ChunkedDense<R>&);                           \
  template Sequence<R> summary_mixing_combine(Tape<R>&, const Sequence<R>&, const Sequence<R>&, \
                                              const ChunkedDense<R>&, const DenseGelu<R>&);     \
  template Sequence<R> summary_mixing_forward(Tape<R>&, const Sequence<R>&,                     \
                                              const SummaryMixingParams<R>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
