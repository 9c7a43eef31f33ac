#include "summix/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "summix/numcore/error.hpp"

namespace summix {
namespace {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using Map = Eigen::Map<RowMat<Real>, 0, Eigen::OuterStride<>>;
template <typename Real>
using CMap = Eigen::Map<const RowMat<Real>, 0, Eigen::OuterStride<>>;
template <typename Real>
using RowVec = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

template <typename Real>
CMap<Real> cmap(const Real* p, std::size_t rows, std::size_t cols, std::size_t stride) {
  return CMap<Real>(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(stride)));
}
template <typename Real>
Map<Real> map(Real* p, std::size_t rows, std::size_t cols, std::size_t stride) {
  return Map<Real>(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols),
                   Eigen::OuterStride<>(static_cast<Eigen::Index>(stride)));
}

std::size_t len_at(const std::vector<int>& lengths, std::size_t b) {
  return static_cast<std::size_t>(lengths[b]);
}

template <typename Real>
void require_rank3(const Var<Real>& v, const char* where) {
  if (v.shape().size() != 3) {
    throw DimensionError(where, "input rank", v.shape().size(), "expected rank", 3);
  }
}

template <typename Real>
void require_same_layout(const Sequence<Real>& a, const Sequence<Real>& b, const char* where) {
  if (a.batch() != b.batch()) throw DimensionError(where, "batch", a.batch(), "batch", b.batch());
  if (a.time() != b.time()) throw DimensionError(where, "time", a.time(), "time", b.time());
  if (a.lengths != b.lengths) throw Error(std::string(where) + ": sequence lengths differ");
}

inline double sigmoid_value(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Applies f to the value and f' to the gradient at valid rows.
template <typename Real, typename F, typename G>
Sequence<Real> unary_sequence_op(Tape<Real>& tape, const Sequence<Real>& x, F f, G df) {
  require_rank3(x.values, "unary op");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  const Tensor<Real>& xv = x.values.value();
  Tensor<Real> y(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(x.lengths, b) * D;
    const Real* src = xv.data() + b * T * D;
    Real* dst = y.data() + b * T * D;
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<Real>(f(src[i]));
  }
  auto xs = x.values.shared();
  Var<Real> xvar = x.values;
  auto lengths = x.lengths;
  Var<Real> out = tape.record(std::move(y), {&x.values}, {xs.get()},
                              [xs, xvar, lengths, B, T, D, df](Tape<Real>& t, const Tensor<Real>& g) {
                                Tensor<Real>* gx = t.grad_slot(xvar);
                                for (std::size_t b = 0; b < B; ++b) {
                                  const std::size_t n = len_at(lengths, b) * D;
                                  const std::size_t off = b * T * D;
                                  for (std::size_t i = 0; i < n; ++i) {
                                    (*gx)[off + i] += g[off + i] * static_cast<Real>(df((*xs)[off + i]));
                                  }
                                }
                              });
  return {out, x.lengths};
}

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void validate_lengths(const Shape& shape, const std::vector<int>& lengths, const char* where) {
  if (shape.size() != 3) throw DimensionError(where, "values rank", shape.size(), "expected rank", 3);
  if (lengths.size() != shape[0]) {
    throw DimensionError(where, "lengths count", lengths.size(), "batch size", shape[0]);
  }
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    if (lengths[b] < 1 || static_cast<std::size_t>(lengths[b]) > shape[1]) {
      throw ConfigError(std::string(where) + ": length " + std::to_string(lengths[b]) +
                        " of sequence " + std::to_string(b) + " is outside [1, " +
                        std::to_string(shape[1]) + "]");
    }
  }
}

template <typename Real>
DenseGelu<Real> DenseGelu<Real>::create(std::size_t in, std::size_t out, Activation act, Rng& rng,
                                        const std::string& name, bool with_bias) {
  DenseGelu layer;
  layer.weight = {name + ".weight", Tensor<Real>({in, out})};
  if (with_bias) layer.bias = {name + ".bias", Tensor<Real>({out})};
  layer.activation = act;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& w : layer.weight.value.vec()) w = static_cast<Real>(rng.uniform(-limit, limit));
  return layer;
}

template <typename Real>
LayerNormParams<Real> LayerNormParams<Real>::create(std::size_t dim, const std::string& name) {
  return {{name + ".gain", Tensor<Real>({dim}, Real(1))}, {name + ".bias", Tensor<Real>({dim})}};
}

template <typename Real>
Sequence<Real> dense_gelu_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                  const DenseGelu<Real>& layer) {
  require_rank3(x.values, "dense_gelu_forward");
  const std::size_t B = x.batch(), T = x.time(), Din = x.features();
  if (Din != layer.in_dim()) {
    throw DimensionError("dense_gelu_forward", "input feature dim", Din, "layer input dim",
                         layer.in_dim());
  }
  const std::size_t Dout = layer.out_dim();
  const Tensor<Real>& xv = x.values.value();
  const Tensor<Real>& W = layer.weight.value;
  const Tensor<Real>& bias = layer.bias.value;
  const bool gelu_act = layer.activation == Activation::kGelu;

  auto z = std::make_shared<Tensor<Real>>(Shape{B, T, Dout});
  const auto Wm = cmap(W.data(), Din, Dout, Dout);
  const bool has_bias = layer.has_bias();
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(x.lengths, b);
    auto Z = map(z->data() + b * T * Dout, n, Dout, Dout);
    Z.noalias() = cmap(xv.data() + b * T * Din, n, Din, Din) * Wm;
    if (has_bias) Z.rowwise() += cmap(bias.data(), 1, Dout, Dout).row(0);
  }
  Tensor<Real> y = *z;
  if (gelu_act) {
    for (std::size_t b = 0; b < B; ++b) {
      Real* row = y.data() + b * T * Dout;
      for (std::size_t i = 0, n = len_at(x.lengths, b) * Dout; i < n; ++i) {
        row[i] = static_cast<Real>(gelu(static_cast<double>(row[i])));
      }
    }
  } else {
    z.reset();
  }

  Var<Real> wv = tape.param(layer.weight);
  Var<Real> bvar = has_bias ? tape.param(layer.bias) : Var<Real>();
  auto xs = x.values.shared();
  Var<Real> xvar = x.values;
  auto lengths = x.lengths;
  std::shared_ptr<const Tensor<Real>> zs = z;
  Var<Real> out = tape.record(
      std::move(y), {&x.values, &wv, &bvar}, {xs.get(), zs.get()},
      [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gx = t.grad_slot(xvar);
        Tensor<Real>* gw = t.grad_slot(wv);
        Tensor<Real>* gb = has_bias ? t.grad_slot(bvar) : nullptr;
        const auto Wmat = cmap(wv.value().data(), Din, Dout, Dout);
        RowMat<Real> dz;
        for (std::size_t b = 0; b < B; ++b) {
          const std::size_t n = len_at(lengths, b);
          dz = cmap(g.data() + b * T * Dout, n, Dout, Dout);
          if (zs) {
            const Real* zr = zs->data() + b * T * Dout;
            Real* d = dz.data();
            for (std::size_t i = 0; i < n * Dout; ++i) {
              d[i] *= static_cast<Real>(gelu_grad(static_cast<double>(zr[i])));
            }
          }
          const auto X = cmap(xs->data() + b * T * Din, n, Din, Din);
          if (gx) map(gx->data() + b * T * Din, n, Din, Din).noalias() += dz * Wmat.transpose();
          if (gw) map(gw->data(), Din, Dout, Dout).noalias() += X.transpose() * dz;
          if (gb) map(gb->data(), 1, Dout, Dout) += dz.colwise().sum();
        }
      });
  return {out, x.lengths};
}

template <typename Real>
Var<Real> masked_mean_over_time(Tape<Real>& tape, const Sequence<Real>& x) {
  require_rank3(x.values, "masked_mean_over_time");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  const Tensor<Real>& xv = x.values.value();
  Tensor<Real> y({B, D});
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(x.lengths, b);
    Real* out = y.data() + b * D;
    for (std::size_t t = 0; t < n; ++t) {
      const Real* row = xv.data() + (b * T + t) * D;
      for (std::size_t d = 0; d < D; ++d) out[d] += row[d];
    }
    const Real inv = Real(1) / static_cast<Real>(n);
    for (std::size_t d = 0; d < D; ++d) out[d] *= inv;
  }
  Var<Real> xvar = x.values;
  auto lengths = x.lengths;
  return tape.record(std::move(y), {&x.values}, {},
                     [=](Tape<Real>& t, const Tensor<Real>& g) {
                       Tensor<Real>* gx = t.grad_slot(xvar);
                       for (std::size_t b = 0; b < B; ++b) {
                         const std::size_t n = len_at(lengths, b);
                         const Real inv = Real(1) / static_cast<Real>(n);
                         for (std::size_t tt = 0; tt < n; ++tt) {
                           Real* row = gx->data() + (b * T + tt) * D;
                           for (std::size_t d = 0; d < D; ++d) row[d] += g[b * D + d] * inv;
                         }
                       }
                     });
}

template <typename Real>
Sequence<Real> broadcast_over_time(Tape<Real>& tape, const Var<Real>& v,
                                   const std::vector<int>& lengths, std::size_t time) {
  if (v.shape().size() != 2) {
    throw DimensionError("broadcast_over_time", "input rank", v.shape().size(), "expected rank", 2);
  }
  const std::size_t B = v.shape()[0], D = v.shape()[1], T = time;
  validate_lengths({B, T, D}, lengths, "broadcast_over_time");
  Tensor<Real> y({B, T, D});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < len_at(lengths, b); ++t) {
      std::copy_n(v.value().data() + b * D, D, y.data() + (b * T + t) * D);
    }
  }
  Var<Real> vv = v;
  Var<Real> out = tape.record(std::move(y), {&v}, {}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real>* gv = t.grad_slot(vv);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t tt = 0; tt < len_at(lengths, b); ++tt) {
        const Real* row = g.data() + (b * T + tt) * D;
        for (std::size_t d = 0; d < D; ++d) (*gv)[b * D + d] += row[d];
      }
    }
  });
  return {out, lengths};
}

template <typename Real>
Sequence<Real> layernorm_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                 const LayerNormParams<Real>& params) {
  require_rank3(x.values, "layernorm_forward");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  if (params.gain.value.size() != D) {
    throw DimensionError("layernorm_forward", "input feature dim", D, "norm dim",
                         params.gain.value.size());
  }
  const Tensor<Real>& xv = x.values.value();
  const Real* gain = params.gain.value.data();
  const Real* beta = params.bias.value.data();
  auto xhat = std::make_shared<Tensor<Real>>(xv.shape());
  auto rstd = std::make_shared<Tensor<Real>>(Shape{B, T});
  Tensor<Real> y(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < len_at(x.lengths, b); ++t) {
      const std::size_t off = (b * T + t) * D;
      const Real* row = xv.data() + off;
      double mean = 0.0;
      for (std::size_t d = 0; d < D; ++d) mean += row[d];
      mean /= static_cast<double>(D);
      double var = 0.0;
      for (std::size_t d = 0; d < D; ++d) var += (row[d] - mean) * (row[d] - mean);
      var /= static_cast<double>(D);
      const double r = 1.0 / std::sqrt(var + kLayerNormEpsilon);
      (*rstd)[b * T + t] = static_cast<Real>(r);
      for (std::size_t d = 0; d < D; ++d) {
        const Real h = static_cast<Real>((row[d] - mean) * r);
        (*xhat)[off + d] = h;
        y[off + d] = h * gain[d] + beta[d];
      }
    }
  }
  Var<Real> gv = tape.param(params.gain);
  Var<Real> bv = tape.param(params.bias);
  Var<Real> xvar = x.values;
  auto lengths = x.lengths;
  std::shared_ptr<const Tensor<Real>> xh = xhat, rs = rstd;
  Var<Real> out = tape.record(
      std::move(y), {&x.values, &gv, &bv}, {xh.get(), rs.get()},
      [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gx = t.grad_slot(xvar);
        Tensor<Real>* gg = t.grad_slot(gv);
        Tensor<Real>* gb = t.grad_slot(bv);
        const Real* gain_v = gv.value().data();
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t tt = 0; tt < len_at(lengths, b); ++tt) {
            const std::size_t off = (b * T + tt) * D;
            double mean_dh = 0.0, mean_dhh = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
              const double dh = static_cast<double>(g[off + d]) * gain_v[d];
              mean_dh += dh;
              mean_dhh += dh * (*xh)[off + d];
              if (gg) (*gg)[d] += g[off + d] * (*xh)[off + d];
              if (gb) (*gb)[d] += g[off + d];
            }
            if (!gx) continue;
            mean_dh /= static_cast<double>(D);
            mean_dhh /= static_cast<double>(D);
            const double r = (*rs)[b * T + tt];
            for (std::size_t d = 0; d < D; ++d) {
              const double dh = static_cast<double>(g[off + d]) * gain_v[d];
              (*gx)[off + d] += static_cast<Real>(r * (dh - mean_dh - (*xh)[off + d] * mean_dhh));
            }
          }
        }
      });
  return {out, x.lengths};
}

template <typename Real>
Sequence<Real> depthwise_conv1d_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                        const Parameter<Real>& kernels) {
  require_rank3(x.values, "depthwise_conv1d_forward");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  if (kernels.value.rank() != 2 || kernels.value.dim(0) != D) {
    throw DimensionError("depthwise_conv1d_forward", "input feature dim", D, "kernel channels",
                         kernels.value.rank() ? kernels.value.dim(0) : 0);
  }
  const std::size_t K = kernels.value.dim(1);
  if (K % 2 == 0) {
    throw ConfigError("depthwise_conv1d_forward: kernel size " + std::to_string(K) +
                      " must be odd for centred same-length convolution");
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(K / 2);
  // [K, D] copy so the inner loop runs over contiguous channels.
  auto transposed = [](const Tensor<Real>& w, std::size_t D_, std::size_t K_) {
    std::vector<Real> wt(K_ * D_);
    for (std::size_t c = 0; c < D_; ++c)
      for (std::size_t k = 0; k < K_; ++k) wt[k * D_ + c] = w[c * K_ + k];
    return wt;
  };
  const std::vector<Real> wt = transposed(kernels.value, D, K);
  const Tensor<Real>& xv = x.values.value();
  Tensor<Real> y(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len_at(x.lengths, b));
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      Real* out = y.data() + (b * T + static_cast<std::size_t>(t)) * D;
      for (std::size_t k = 0; k < K; ++k) {
        const std::ptrdiff_t s = t + static_cast<std::ptrdiff_t>(k) - pad;
        if (s < 0 || s >= n) continue;
        const Real* in = xv.data() + (b * T + static_cast<std::size_t>(s)) * D;
        const Real* w = wt.data() + k * D;
        for (std::size_t c = 0; c < D; ++c) out[c] += w[c] * in[c];
      }
    }
  }
  Var<Real> kv = tape.param(kernels);
  Var<Real> xvar = x.values;
  auto xs = x.values.shared();
  auto lengths = x.lengths;
  Var<Real> out = tape.record(
      std::move(y), {&x.values, &kv}, {xs.get()}, [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gx = t.grad_slot(xvar);
        Tensor<Real>* gk = t.grad_slot(kv);
        std::vector<Real> wt_b = transposed(kv.value(), D, K);
        std::vector<Real> gkt(K * D, Real(0));
        for (std::size_t b = 0; b < B; ++b) {
          const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(len_at(lengths, b));
          for (std::ptrdiff_t tt = 0; tt < n; ++tt) {
            const Real* gy = g.data() + (b * T + static_cast<std::size_t>(tt)) * D;
            for (std::size_t k = 0; k < K; ++k) {
              const std::ptrdiff_t s = tt + static_cast<std::ptrdiff_t>(k) - pad;
              if (s < 0 || s >= n) continue;
              const std::size_t soff = (b * T + static_cast<std::size_t>(s)) * D;
              if (gx) {
                const Real* w = wt_b.data() + k * D;
                Real* dst = gx->data() + soff;
                for (std::size_t c = 0; c < D; ++c) dst[c] += w[c] * gy[c];
              }
              if (gk) {
                const Real* in = xs->data() + soff;
                Real* dst = gkt.data() + k * D;
                for (std::size_t c = 0; c < D; ++c) dst[c] += in[c] * gy[c];
              }
            }
          }
        }
        if (gk) {
          for (std::size_t c = 0; c < D; ++c)
            for (std::size_t k = 0; k < K; ++k) (*gk)[c * K + k] += gkt[k * D + c];
        }
      });
  return {out, x.lengths};
}

std::size_t strided_conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  const std::size_t pad = kernel / 2;
  return (length + 2 * pad - kernel) / stride + 1;
}

template <typename Real>
Sequence<Real> strided_conv1d_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                      const Parameter<Real>& weight, const Parameter<Real>& bias,
                                      std::size_t kernel, std::size_t stride, Activation act) {
  require_rank3(x.values, "strided_conv1d_forward");
  const std::size_t B = x.batch(), T = x.time(), Cin = x.features();
  if (kernel % 2 == 0) throw ConfigError("strided_conv1d_forward: kernel size must be odd");
  if (stride == 0) throw ConfigError("strided_conv1d_forward: stride must be positive");
  if (weight.value.rank() != 2 || weight.value.dim(0) != kernel * Cin) {
    throw DimensionError("strided_conv1d_forward", "kernel * input channels", kernel * Cin,
                         "weight rows", weight.value.rank() ? weight.value.dim(0) : 0);
  }
  const std::size_t Cout = weight.value.dim(1);
  const std::size_t Tout = strided_conv_output_length(T, kernel, stride);
  std::vector<int> out_lengths(B);
  for (std::size_t b = 0; b < B; ++b) {
    out_lengths[b] = static_cast<int>(strided_conv_output_length(len_at(x.lengths, b), kernel, stride));
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const std::size_t cols = kernel * Cin;

  // im2col for one sequence; frames outside [0, length) are zero.
  auto im2col = [=](const Tensor<Real>& xv, std::size_t b, std::size_t in_len, std::size_t out_len) {
    RowMat<Real> col = RowMat<Real>::Zero(static_cast<Eigen::Index>(out_len),
                                          static_cast<Eigen::Index>(cols));
    for (std::size_t t = 0; t < out_len; ++t) {
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t * stride + k) - pad;
        if (s < 0 || s >= static_cast<std::ptrdiff_t>(in_len)) continue;
        std::copy_n(xv.data() + (b * T + static_cast<std::size_t>(s)) * Cin, Cin,
                    col.data() + t * cols + k * Cin);
      }
    }
    return col;
  };

  const Tensor<Real>& xv = x.values.value();
  const auto Wm = cmap(weight.value.data(), cols, Cout, Cout);
  const auto bv = cmap(bias.value.data(), 1, Cout, Cout);
  auto z = std::make_shared<Tensor<Real>>(Shape{B, Tout, Cout});
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = static_cast<std::size_t>(out_lengths[b]);
    RowMat<Real> col = im2col(xv, b, len_at(x.lengths, b), n);
    auto Z = map(z->data() + b * Tout * Cout, n, Cout, Cout);
    Z.noalias() = col * Wm;
    Z.rowwise() += bv.row(0);
  }
  Tensor<Real> y = *z;
  const bool gelu_act = act == Activation::kGelu;
  if (gelu_act) {
    for (std::size_t b = 0; b < B; ++b) {
      Real* row = y.data() + b * Tout * Cout;
      for (std::size_t i = 0, n = static_cast<std::size_t>(out_lengths[b]) * Cout; i < n; ++i) {
        row[i] = static_cast<Real>(gelu(static_cast<double>(row[i])));
      }
    }
  } else {
    z.reset();
  }
  Var<Real> wv = tape.param(weight);
  Var<Real> bvar = tape.param(bias);
  Var<Real> xvar = x.values;
  auto xs = x.values.shared();
  auto in_lengths = x.lengths;
  std::shared_ptr<const Tensor<Real>> zs = z;
  Var<Real> out = tape.record(
      std::move(y), {&x.values, &wv, &bvar}, {xs.get(), zs.get()},
      [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gx = t.grad_slot(xvar);
        Tensor<Real>* gw = t.grad_slot(wv);
        Tensor<Real>* gb = t.grad_slot(bvar);
        const auto Wmat = cmap(wv.value().data(), cols, Cout, Cout);
        RowMat<Real> dz;
        for (std::size_t b = 0; b < B; ++b) {
          const std::size_t n = static_cast<std::size_t>(out_lengths[b]);
          const std::size_t in_len = len_at(in_lengths, b);
          dz = cmap(g.data() + b * Tout * Cout, n, Cout, Cout);
          if (zs) {
            const Real* zr = zs->data() + b * Tout * Cout;
            for (std::size_t i = 0; i < n * Cout; ++i) {
              dz.data()[i] *= static_cast<Real>(gelu_grad(static_cast<double>(zr[i])));
            }
          }
          if (gw) {
            RowMat<Real> col = im2col(*xs, b, in_len, n);
            map(gw->data(), cols, Cout, Cout).noalias() += col.transpose() * dz;
          }
          if (gb) map(gb->data(), 1, Cout, Cout) += dz.colwise().sum();
          if (gx) {
            RowMat<Real> dcol = dz * Wmat.transpose();
            for (std::size_t tt = 0; tt < n; ++tt) {
              for (std::size_t k = 0; k < kernel; ++k) {
                const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(tt * stride + k) - pad;
                if (s < 0 || s >= static_cast<std::ptrdiff_t>(in_len)) continue;
                Real* dst = gx->data() + (b * T + static_cast<std::size_t>(s)) * Cin;
                const Real* src = dcol.data() + tt * cols + k * Cin;
                for (std::size_t c = 0; c < Cin; ++c) dst[c] += src[c];
              }
            }
          }
        }
      });
  return {out, out_lengths};
}

template <typename Real>
Sequence<Real> concat_features(Tape<Real>& tape, const std::vector<Sequence<Real>>& parts) {
  if (parts.empty()) throw ConfigError("concat_features: no inputs");
  const std::size_t B = parts[0].batch(), T = parts[0].time();
  std::vector<std::size_t> widths, offsets;
  std::size_t D = 0;
  std::vector<const Var<Real>*> inputs;
  for (const auto& p : parts) {
    require_rank3(p.values, "concat_features");
    require_same_layout(parts[0], p, "concat_features");
    offsets.push_back(D);
    widths.push_back(p.features());
    D += p.features();
    inputs.push_back(&p.values);
  }
  const std::vector<int>& lengths = parts[0].lengths;
  Tensor<Real> y({B, T, D});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor<Real>& v = parts[i].values.value();
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t r = b * T, e = b * T + len_at(lengths, b); r < e; ++r) {
        std::copy_n(v.data() + r * widths[i], widths[i], y.data() + r * D + offsets[i]);
      }
    }
  }
  std::vector<Var<Real>> vars;
  for (const auto& p : parts) vars.push_back(p.values);
  Var<Real> out = tape.record_many(std::move(y), inputs, {},
                                   [=](Tape<Real>& t, const Tensor<Real>& g) {
                                     for (std::size_t i = 0; i < vars.size(); ++i) {
                                       Tensor<Real>* gi = t.grad_slot(vars[i]);
                                       if (!gi) continue;
                                       for (std::size_t b = 0; b < B; ++b) {
                                         for (std::size_t r = b * T, e = b * T + len_at(lengths, b); r < e; ++r) {
                                           const Real* src = g.data() + r * D + offsets[i];
                                           Real* dst = gi->data() + r * widths[i];
                                           for (std::size_t d = 0; d < widths[i]; ++d) dst[d] += src[d];
                                         }
                                       }
                                     }
                                   });
  return {out, parts[0].lengths};
}

template <typename Real>
Sequence<Real> slice_features(Tape<Real>& tape, const Sequence<Real>& x, std::size_t begin,
                              std::size_t end) {
  require_rank3(x.values, "slice_features");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  if (begin >= end || end > D) {
    throw DimensionError("slice_features", "slice end", end, "feature dim", D);
  }
  const std::size_t W = end - begin;
  Tensor<Real> y({B, T, W});
  const Tensor<Real>& xv = x.values.value();
  const std::vector<int> lengths = x.lengths;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t r = b * T, e = b * T + len_at(lengths, b); r < e; ++r) {
      std::copy_n(xv.data() + r * D + begin, W, y.data() + r * W);
    }
  }
  Var<Real> xvar = x.values;
  Var<Real> out = tape.record(std::move(y), {&x.values}, {}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real>* gx = t.grad_slot(xvar);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t r = b * T, e = b * T + len_at(lengths, b); r < e; ++r) {
        Real* dst = gx->data() + r * D + begin;
        const Real* src = g.data() + r * W;
        for (std::size_t d = 0; d < W; ++d) dst[d] += src[d];
      }
    }
  });
  return {out, x.lengths};
}

template <typename Real>
Sequence<Real> add(Tape<Real>& tape, const Sequence<Real>& a, const Sequence<Real>& b) {
  require_same_layout(a, b, "add");
  if (a.values.shape() != b.values.shape()) {
    throw DimensionError("add", "lhs features", a.features(), "rhs features", b.features());
  }
  Tensor<Real> y = a.values.value();
  const Tensor<Real>& bv = b.values.value();
  const std::size_t T = a.time(), D = a.features();
  for (std::size_t s = 0; s < a.batch(); ++s) {
    const std::size_t off = s * T * D;
    for (std::size_t i = 0, n = len_at(a.lengths, s) * D; i < n; ++i) y[off + i] += bv[off + i];
  }
  zero_padding(y, a.lengths);
  Var<Real> av = a.values, bvar = b.values;
  Var<Real> out = tape.record(std::move(y), {&a.values, &b.values}, {},
                              [av, bvar](Tape<Real>& t, const Tensor<Real>& g) {
                                for (const Var<Real>* v : {&av, &bvar}) {
                                  Tensor<Real>* gi = t.grad_slot(*v);
                                  if (!gi) continue;
                                  for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
                                }
                              });
  return {out, a.lengths};
}

template <typename Real>
Sequence<Real> scale(Tape<Real>& tape, const Sequence<Real>& a, Real factor) {
  return unary_sequence_op(
      tape, a, [factor](Real v) { return factor * v; }, [factor](Real) { return factor; });
}

template <typename Real>
Sequence<Real> multiply(Tape<Real>& tape, const Sequence<Real>& a, const Sequence<Real>& b) {
  require_same_layout(a, b, "multiply");
  if (a.values.shape() != b.values.shape()) {
    throw DimensionError("multiply", "lhs features", a.features(), "rhs features", b.features());
  }
  const std::size_t B = a.batch(), T = a.time(), D = a.features();
  const Tensor<Real>& av = a.values.value();
  const Tensor<Real>& bv = b.values.value();
  Tensor<Real> y(av.shape());
  for (std::size_t s = 0; s < B; ++s) {
    const std::size_t off = s * T * D;
    for (std::size_t i = 0, n = len_at(a.lengths, s) * D; i < n; ++i) y[off + i] = av[off + i] * bv[off + i];
  }
  Var<Real> avar = a.values, bvar = b.values;
  auto as = a.values.shared(), bs = b.values.shared();
  Var<Real> out = tape.record(std::move(y), {&a.values, &b.values}, {as.get(), bs.get()},
                              [=](Tape<Real>& t, const Tensor<Real>& g) {
                                Tensor<Real>* ga = t.grad_slot(avar);
                                Tensor<Real>* gb = t.grad_slot(bvar);
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                  if (ga) (*ga)[i] += g[i] * (*bs)[i];
                                  if (gb) (*gb)[i] += g[i] * (*as)[i];
                                }
                              });
  return {out, a.lengths};
}

template <typename Real>
Sequence<Real> sigmoid(Tape<Real>& tape, const Sequence<Real>& a) {
  return unary_sequence_op(
      tape, a, [](Real v) { return sigmoid_value(v); },
      [](Real v) {
        const double s = sigmoid_value(v);
        return s * (1.0 - s);
      });
}

template <typename Real>
Sequence<Real> log_softmax_features(Tape<Real>& tape, const Sequence<Real>& x) {
  require_rank3(x.values, "log_softmax_features");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  const Tensor<Real>& xv = x.values.value();
  auto y = std::make_shared<Tensor<Real>>(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < len_at(x.lengths, b); ++t) {
      const Real* row = xv.data() + (b * T + t) * D;
      Real* out = y->data() + (b * T + t) * D;
      const double mx = *std::max_element(row, row + D);
      double s = 0.0;
      for (std::size_t d = 0; d < D; ++d) s += std::exp(row[d] - mx);
      const double lse = mx + std::log(s);
      for (std::size_t d = 0; d < D; ++d) out[d] = static_cast<Real>(row[d] - lse);
    }
  }
  Var<Real> xvar = x.values;
  auto lengths = x.lengths;
  std::shared_ptr<const Tensor<Real>> ys = y;
  Var<Real> out = tape.record_shared(
      ys, {&x.values}, {ys.get()}, [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gx = t.grad_slot(xvar);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t tt = 0; tt < len_at(lengths, b); ++tt) {
            const std::size_t off = (b * T + tt) * D;
            double gsum = 0.0;
            for (std::size_t d = 0; d < D; ++d) gsum += g[off + d];
            for (std::size_t d = 0; d < D; ++d) {
              (*gx)[off + d] += static_cast<Real>(g[off + d] - std::exp((*ys)[off + d]) * gsum);
            }
          }
        }
      });
  return {out, x.lengths};
}

template <typename Real>
Var<Real> outer_sum_over_time(Tape<Real>& tape, const Sequence<Real>& a, const Sequence<Real>& x) {
  require_rank3(a.values, "outer_sum_over_time");
  require_rank3(x.values, "outer_sum_over_time");
  require_same_layout(a, x, "outer_sum_over_time");
  const std::size_t B = a.batch(), T = a.time(), P = a.features(), D = x.features();
  Tensor<Real> y({B, P, D});
  const Tensor<Real>& av = a.values.value();
  const Tensor<Real>& xv = x.values.value();
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(a.lengths, b);
    map(y.data() + b * P * D, P, D, D).noalias() =
        cmap(av.data() + b * T * P, n, P, P).transpose() * cmap(xv.data() + b * T * D, n, D, D);
  }
  Var<Real> avar = a.values, xvar = x.values;
  auto as = a.values.shared(), xs = x.values.shared();
  auto lengths = a.lengths;
  return tape.record(std::move(y), {&a.values, &x.values}, {as.get(), xs.get()},
                     [=](Tape<Real>& t, const Tensor<Real>& g) {
                       Tensor<Real>* ga = t.grad_slot(avar);
                       Tensor<Real>* gx = t.grad_slot(xvar);
                       for (std::size_t b = 0; b < B; ++b) {
                         const std::size_t n = len_at(lengths, b);
                         const auto G = cmap(g.data() + b * P * D, P, D, D);
                         if (ga) {
                           map(ga->data() + b * T * P, n, P, P).noalias() +=
                               cmap(xs->data() + b * T * D, n, D, D) * G.transpose();
                         }
                         if (gx) {
                           map(gx->data() + b * T * D, n, D, D).noalias() +=
                               cmap(as->data() + b * T * P, n, P, P) * G;
                         }
                       }
                     });
}

template <typename Real>
Sequence<Real> project_rows(Tape<Real>& tape, const Sequence<Real>& u, const Var<Real>& s) {
  require_rank3(u.values, "project_rows");
  if (s.shape().size() != 3 || s.shape()[0] != u.batch() || s.shape()[1] != u.features()) {
    throw DimensionError("project_rows", "row dim", u.features(), "projection rows",
                         s.shape().size() == 3 ? s.shape()[1] : 0);
  }
  const std::size_t B = u.batch(), T = u.time(), P = u.features(), D = s.shape()[2];
  Tensor<Real> y({B, T, D});
  const Tensor<Real>& uv = u.values.value();
  const Tensor<Real>& sv = s.value();
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(u.lengths, b);
    map(y.data() + b * T * D, n, D, D).noalias() =
        cmap(uv.data() + b * T * P, n, P, P) * cmap(sv.data() + b * P * D, P, D, D);
  }
  Var<Real> uvar = u.values, svar = s;
  auto us = u.values.shared();
  auto ss = s.shared();
  auto lengths = u.lengths;
  Var<Real> out = tape.record(std::move(y), {&u.values, &s}, {us.get(), ss.get()},
                              [=](Tape<Real>& t, const Tensor<Real>& g) {
                                Tensor<Real>* gu = t.grad_slot(uvar);
                                Tensor<Real>* gs = t.grad_slot(svar);
                                for (std::size_t b = 0; b < B; ++b) {
                                  const std::size_t n = len_at(lengths, b);
                                  const auto G = cmap(g.data() + b * T * D, n, D, D);
                                  if (gu) {
                                    map(gu->data() + b * T * P, n, P, P).noalias() +=
                                        G * cmap(ss->data() + b * P * D, P, D, D).transpose();
                                  }
                                  if (gs) {
                                    map(gs->data() + b * P * D, P, D, D).noalias() +=
                                        cmap(us->data() + b * T * P, n, P, P).transpose() * G;
                                  }
                                }
                              });
  return {out, u.lengths};
}

template <typename Real>
Sequence<Real> scaled_dot_attention(Tape<Real>& tape, const Sequence<Real>& q,
                                    const Sequence<Real>& k, const Sequence<Real>& v,
                                    std::size_t heads) {
  require_rank3(q.values, "scaled_dot_attention");
  require_same_layout(q, k, "scaled_dot_attention");
  require_same_layout(q, v, "scaled_dot_attention");
  const std::size_t B = q.batch(), T = q.time(), D = q.features();
  if (k.features() != D || v.features() != D) {
    throw DimensionError("scaled_dot_attention", "query dim", D, "key/value dim", k.features());
  }
  if (heads == 0 || D % heads != 0) {
    throw ConfigError("scaled_dot_attention: heads " + std::to_string(heads) +
                      " must divide model dim " + std::to_string(D));
  }
  const std::size_t dh = D / heads;
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dh));
  const bool keep = tape.recording() && (q.values.tracked() || k.values.tracked() || v.values.tracked());

  // Attention weights laid out per (b, head) as len_b x len_b blocks.
  std::vector<std::size_t> prob_offset(B + 1, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(q.lengths, b);
    prob_offset[b + 1] = prob_offset[b] + heads * n * n;
  }
  std::shared_ptr<Tensor<Real>> probs;
  RowMat<Real> scratch;
  if (keep) probs = std::make_shared<Tensor<Real>>(Shape{prob_offset[B]});

  const Tensor<Real>& qv = q.values.value();
  const Tensor<Real>& kv = k.values.value();
  const Tensor<Real>& vv = v.values.value();
  Tensor<Real> y({B, T, D});
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = len_at(q.lengths, b);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t col = b * T * D + h * dh;
      Real* pbuf;
      if (keep) {
        pbuf = probs->data() + prob_offset[b] + h * n * n;
      } else {
        scratch.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        pbuf = scratch.data();
      }
      auto P = map(pbuf, n, n, n);
      P.noalias() = (cmap(qv.data() + col, n, dh, D) * cmap(kv.data() + col, n, dh, D).transpose());
      for (std::size_t i = 0; i < n; ++i) {
        Real* row = pbuf + i * n;
        Real mx = row[0] * inv_sqrt;
        for (std::size_t j = 0; j < n; ++j) {
          row[j] *= inv_sqrt;
          mx = std::max(mx, row[j]);
        }
        Real s = 0;
        for (std::size_t j = 0; j < n; ++j) {
          row[j] = std::exp(row[j] - mx);
          s += row[j];
        }
        const Real inv = Real(1) / s;
        for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
      }
      map(y.data() + col, n, dh, D).noalias() = P * cmap(vv.data() + col, n, dh, D);
    }
  }
  Var<Real> qvar = q.values, kvar = k.values, vvar = v.values;
  auto qs = q.values.shared(), ks = k.values.shared(), vs = v.values.shared();
  std::shared_ptr<const Tensor<Real>> ps = probs;
  auto lengths = q.lengths;
  Var<Real> out = tape.record(
      std::move(y), {&q.values, &k.values, &v.values}, {qs.get(), ks.get(), vs.get(), ps.get()},
      [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* gq = t.grad_slot(qvar);
        Tensor<Real>* gk = t.grad_slot(kvar);
        Tensor<Real>* gv = t.grad_slot(vvar);
        RowMat<Real> dp;
        for (std::size_t b = 0; b < B; ++b) {
          const std::size_t n = len_at(lengths, b);
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t col = b * T * D + h * dh;
            const auto P = cmap(ps->data() + prob_offset[b] + h * n * n, n, n, n);
            const auto G = cmap(g.data() + col, n, dh, D);
            if (gv) map(gv->data() + col, n, dh, D).noalias() += P.transpose() * G;
            if (!gq && !gk) continue;
            dp.noalias() = G * cmap(vs->data() + col, n, dh, D).transpose();
            // softmax VJP, then the 1/sqrt(dh) scale
            for (std::size_t i = 0; i < n; ++i) {
              Real* drow = dp.data() + i * n;
              const Real* prow = P.data() + i * n;
              Real dot = 0;
              for (std::size_t j = 0; j < n; ++j) dot += drow[j] * prow[j];
              for (std::size_t j = 0; j < n; ++j) drow[j] = prow[j] * (drow[j] - dot) * inv_sqrt;
            }
            if (gq) map(gq->data() + col, n, dh, D).noalias() += dp * cmap(ks->data() + col, n, dh, D);
            if (gk) {
              map(gk->data() + col, n, dh, D).noalias() += dp.transpose() * cmap(qs->data() + col, n, dh, D);
            }
          }
        }
      });
  return {out, q.lengths};
}

template <typename Real>
Tensor<Real> sinusoidal_positions(std::size_t time, std::size_t dim) {
  Tensor<Real> pe({time, dim});
  for (std::size_t t = 0; t < time; ++t) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(dim));
      pe(t, i) = static_cast<Real>(std::sin(static_cast<double>(t) * freq));
      if (i + 1 < dim) pe(t, i + 1) = static_cast<Real>(std::cos(static_cast<double>(t) * freq));
    }
  }
  return pe;
}

template <typename Real>
Sequence<Real> add_sinusoidal_positions(Tape<Real>& tape, const Sequence<Real>& x) {
  require_rank3(x.values, "add_sinusoidal_positions");
  const std::size_t B = x.batch(), T = x.time(), D = x.features();
  const Tensor<Real> table = sinusoidal_positions<Real>(T, D);
  Tensor<Real> pe(x.values.shape());
  for (std::size_t b = 0; b < B; ++b) {
    std::copy(table.data(), table.data() + len_at(x.lengths, b) * D, pe.data() + b * T * D);
  }
  return add(tape, x, Sequence<Real>{tape.constant(std::move(pe)), x.lengths});
}

template <typename Real>
Var<Real> softmax_rows(Tape<Real>& tape, const Var<Real>& x) {
  if (x.shape().size() != 2) {
    throw DimensionError("softmax_rows", "input rank", x.shape().size(), "expected rank", 2);
  }
  const std::size_t R = x.shape()[0], C = x.shape()[1];
  auto y = std::make_shared<Tensor<Real>>(x.shape());
  for (std::size_t r = 0; r < R; ++r) {
    const Real* row = x.value().data() + r * C;
    Real* out = y->data() + r * C;
    const Real mx = *std::max_element(row, row + C);
    Real s = 0;
    for (std::size_t c = 0; c < C; ++c) {
      out[c] = std::exp(row[c] - mx);
      s += out[c];
    }
    for (std::size_t c = 0; c < C; ++c) out[c] /= s;
  }
  Var<Real> xvar = x;
  std::shared_ptr<const Tensor<Real>> ys = y;
  return tape.record_shared(ys, {&x}, {ys.get()}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real>* gx = t.grad_slot(xvar);
    for (std::size_t r = 0; r < R; ++r) {
      Real dot = 0;
      for (std::size_t c = 0; c < C; ++c) dot += g[r * C + c] * (*ys)[r * C + c];
      for (std::size_t c = 0; c < C; ++c) (*gx)[r * C + c] += (*ys)[r * C + c] * (g[r * C + c] - dot);
    }
  });
}

template <typename Real>
Var<Real> gelu(Tape<Real>& tape, const Var<Real>& x) {
  Tensor<Real> y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<Real>(gelu(static_cast<double>(x.value()[i])));
  Var<Real> xvar = x;
  auto xs = x.shared();
  return tape.record(std::move(y), {&x}, {xs.get()}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real>* gx = t.grad_slot(xvar);
    for (std::size_t i = 0; i < g.size(); ++i) {
      (*gx)[i] += g[i] * static_cast<Real>(gelu_grad(static_cast<double>((*xs)[i])));
    }
  });
}

template <typename Real>
Var<Real> weighted_sum(Tape<Real>& tape, const Var<Real>& x, const Tensor<Real>& weights) {
  if (weights.shape() != x.shape()) {
    throw DimensionError("weighted_sum", "input size", x.value().size(), "weight size", weights.size());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += static_cast<double>(x.value()[i]) * weights[i];
  Var<Real> xvar = x;
  auto w = std::make_shared<const Tensor<Real>>(weights);
  return tape.record(Tensor<Real>({1}, static_cast<Real>(s)), {&x}, {},
                     [=](Tape<Real>& t, const Tensor<Real>& g) {
                       Tensor<Real>* gx = t.grad_slot(xvar);
                       for (std::size_t i = 0; i < w->size(); ++i) (*gx)[i] += g[0] * (*w)[i];
                     });
}

template <typename Real>
Var<Real> sum(Tape<Real>& tape, const Var<Real>& x) {
  double s = 0.0;
  for (Real v : x.value().vec()) s += v;
  Var<Real> xvar = x;
  return tape.record(Tensor<Real>({1}, static_cast<Real>(s)), {&x}, {},
                     [=](Tape<Real>& t, const Tensor<Real>& g) {
                       Tensor<Real>* gx = t.grad_slot(xvar);
                       for (auto& v : gx->vec()) v += g[0];
                     });
}

template <typename Real>
Var<Real> add_scalars(Tape<Real>& tape, const Var<Real>& a, const Var<Real>& b) {
  if (a.value().size() != 1 || b.value().size() != 1) {
    throw DimensionError("add_scalars", "lhs size", a.value().size(), "rhs size", b.value().size());
  }
  Var<Real> av = a, bv = b;
  return tape.record(Tensor<Real>({1}, a.value()[0] + b.value()[0]), {&a, &b}, {},
                     [av, bv](Tape<Real>& t, const Tensor<Real>& g) {
                       if (Tensor<Real>* ga = t.grad_slot(av)) (*ga)[0] += g[0];
                       if (Tensor<Real>* gb = t.grad_slot(bv)) (*gb)[0] += g[0];
                     });
}

#define SUMMIX_INSTANTIATE(R)                                                                 \
  template struct DenseGelu<R>;                                                               \
  template struct LayerNormParams<R>;                                                         \
  template Sequence<R> dense_gelu_forward(Tape<R>&, const Sequence<R>&, const DenseGelu<R>&); \
  template Var<R> masked_mean_over_time(Tape<R>&, const Sequence<R>&);                        \
  template Sequence<R> broadcast_over_time(Tape<R>&, const Var<R>&, const std::vector<int>&,  \
                                           std::size_t);                                      \
  template Sequence<R> layernorm_forward(Tape<R>&, const Sequence<R>&,                        \
                                         const LayerNormParams<R>&);                          \
  template Sequence<R> depthwise_conv1d_forward(Tape<R>&, const Sequence<R>&,                 \
                                                const Parameter<R>&);                         \
  template Sequence<R> strided_conv1d_forward(Tape<R>&, const Sequence<R>&,                   \
                                              const Parameter<R>&, const Parameter<R>&,       \
                                              std::size_t, std::size_t, Activation);          \
  template Sequence<R> concat_features(Tape<R>&, const std::vector<Sequence<R>>&);            \
  template Sequence<R> slice_features(Tape<R>&, const Sequence<R>&, std::size_t, std::size_t); \
  template Sequence<R> add(Tape<R>&, const Sequence<R>&, const Sequence<R>&);                 \
  template Sequence<R> scale(Tape<R>&, const Sequence<R>&, R);                                \
  template Sequence<R> multiply(Tape<R>&, const Sequence<R>&, const Sequence<R>&);            \
  template Sequence<R> sigmoid(Tape<R>&, const Sequence<R>&);                                 \
  template Sequence<R> log_softmax_features(Tape<R>&, const Sequence<R>&);                    \
  template Var<R> outer_sum_over_time(Tape<R>&, const Sequence<R>&, const Sequence<R>&);      \
  template Sequence<R> project_rows(Tape<R>&, const Sequence<R>&, const Var<R>&);             \
  template Sequence<R> scaled_dot_attention(Tape<R>&, const Sequence<R>&, const Sequence<R>&, \
                                            const Sequence<R>&, std::size_t);                 \
  template Tensor<R> sinusoidal_positions<R>(std::size_t, std::size_t);                       \
  template Sequence<R> add_sinusoidal_positions(Tape<R>&, const Sequence<R>&);                \
  template Var<R> softmax_rows(Tape<R>&, const Var<R>&);                                      \
  template Var<R> gelu(Tape<R>&, const Var<R>&);                                              \
  template Var<R> weighted_sum(Tape<R>&, const Var<R>&, const Tensor<R>&);                    \
  template Var<R> sum(Tape<R>&, const Var<R>&);                                               \
  template Var<R> add_scalars(Tape<R>&, const Var<R>&, const Var<R>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
