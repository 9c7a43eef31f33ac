#pragma once

// Straight scalar-loop re-implementations used as test oracles. Nothing here
// calls into the library's kernels; only plain data types are shared.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "summix/numcore/rng.hpp"
#include "summix/numcore/sequence.hpp"
#include "summix/numcore/tensor.hpp"

namespace summix::oracle {

using Matrix = std::vector<std::vector<double>>;  // [rows][cols]

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline Matrix sequence_rows(const Tensor<double>& values, std::size_t b, int length) {
  const std::size_t D = values.dim(2);
  Matrix rows(static_cast<std::size_t>(length), std::vector<double>(D));
  for (int t = 0; t < length; ++t)
    for (std::size_t d = 0; d < D; ++d) rows[t][d] = values(b, static_cast<std::size_t>(t), d);
  return rows;
}

// act(x W + b) for one row; W is [in, out].
inline std::vector<double> dense(const std::vector<double>& x, const Tensor<double>& W,
                                 const Tensor<double>& bias, bool use_gelu) {
  const std::size_t in = W.dim(0), out = W.dim(1);
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double s = bias.empty() ? 0.0 : bias[o];
    for (std::size_t i = 0; i < in; ++i) s += x[i] * W(i, o);
    y[o] = use_gelu ? gelu(s) : s;
  }
  return y;
}

inline std::vector<double> layernorm(const std::vector<double>& x, const Tensor<double>& gain,
                                     const Tensor<double>& bias, double eps = 1e-5) {
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / std::sqrt(var + eps) * gain[i] + bias[i];
  return y;
}

// Centred depthwise convolution over `rows` (zero outside), kernels [D][K].
inline Matrix depthwise_conv(const Matrix& rows, const Tensor<double>& kernels) {
  const std::size_t D = kernels.dim(0), K = kernels.dim(1);
  const long pad = static_cast<long>(K / 2);
  const long n = static_cast<long>(rows.size());
  Matrix y(rows.size(), std::vector<double>(D, 0.0));
  for (long t = 0; t < n; ++t)
    for (std::size_t c = 0; c < D; ++c)
      for (std::size_t k = 0; k < K; ++k) {
        const long s = t + static_cast<long>(k) - pad;
        if (s >= 0 && s < n) y[t][c] += kernels(c, k) * rows[s][c];
      }
  return y;
}

inline std::vector<double> softmax(const std::vector<double>& x) {
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  double s = 0;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s += (y[i] = std::exp(x[i] - mx));
  for (double& v : y) v /= s;
  return y;
}

inline std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// --- random data ---

inline Tensor<double> random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(shape);
  for (auto& v : t.vec()) v = scale * rng.normal();
  return t;
}

inline std::vector<int> random_lengths(std::size_t batch, std::size_t time, Rng& rng) {
  std::vector<int> lengths(batch);
  for (auto& l : lengths) l = static_cast<int>(rng.uniform_int(1, static_cast<std::int64_t>(time)));
  lengths[0] = static_cast<int>(time);
  return lengths;
}

inline MaskedBatch<double> random_batch(std::size_t B, std::size_t T, std::size_t D, Rng& rng) {
  MaskedBatch<double> batch{random_tensor({B, T, D}, rng), random_lengths(B, T, rng)};
  zero_padding(batch.values, batch.lengths);
  return batch;
}

// Same valid frames, new garbage at every padded frame.
inline MaskedBatch<double> repad(const MaskedBatch<double>& batch, Rng& rng, double magnitude = 1e9) {
  MaskedBatch<double> out = batch;
  const std::size_t T = out.time(), D = out.features();
  for (std::size_t b = 0; b < out.batch(); ++b)
    for (std::size_t t = static_cast<std::size_t>(out.lengths[b]); t < T; ++t)
      for (std::size_t d = 0; d < D; ++d) out.values(b, t, d) = magnitude * rng.normal();
  return out;
}

// Weights for a random linear loss over the valid frames only.
inline Tensor<double> random_loss_weights(const Shape& shape, const std::vector<int>& lengths, Rng& rng) {
  Tensor<double> w = random_tensor(shape, rng);
  zero_padding(w, lengths);
  return w;
}

inline double max_abs_diff_valid(const Tensor<double>& a, const Tensor<double>& b,
                                 const std::vector<int>& lengths) {
  double m = 0;
  const std::size_t T = a.dim(1), D = a.dim(2);
  for (std::size_t s = 0; s < lengths.size(); ++s)
    for (std::size_t t = 0; t < static_cast<std::size_t>(lengths[s]); ++t)
      for (std::size_t d = 0; d < D; ++d) m = std::max(m, std::abs(a(s, t, d) - b(s, t, d)));
  (void)T;
  return m;
}

}  // namespace summix::oracle
