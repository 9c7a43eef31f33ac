#include "summix/mixers/hypermixer.hpp"

#include <algorithm>

#include "summix/numcore/error.hpp"

namespace summix {
namespace {

double apply(Activation act, double v) { return act == Activation::kGelu ? gelu(v) : v; }
double apply_grad(Activation act, double v) { return act == Activation::kGelu ? gelu_grad(v) : 1.0; }

template <typename Real>
Sequence<Real> with_positions(Tape<Real>& tape, const Sequence<Real>& x, PositionalEncoding pe) {
  return pe == PositionalEncoding::kSinusoidal ? add_sinusoidal_positions(tape, x) : x;
}

}  // namespace

template <typename Real>
TwoLayerMlp<Real> TwoLayerMlp<Real>::create(std::size_t in, std::size_t hidden_dim, std::size_t out,
                                            Rng& rng, const std::string& name) {
  return {DenseGelu<Real>::create(in, hidden_dim, Activation::kGelu, rng, name + ".hidden"),
          DenseGelu<Real>::create(hidden_dim, out, Activation::kIdentity, rng, name + ".output")};
}

template <typename Real>
Sequence<Real> mlp_forward(Tape<Real>& tape, const Sequence<Real>& x, const TwoLayerMlp<Real>& mlp) {
  return dense_gelu_forward(tape, dense_gelu_forward(tape, x, mlp.hidden), mlp.output);
}

template <typename Real>
HyperMixerParams<Real> HyperMixerParams<Real>::create(std::size_t dim, std::size_t mix_dim,
                                                      PositionalEncoding pe, Rng& rng,
                                                      const std::string& name) {
  if (dim == 0 || mix_dim == 0) throw ConfigError("hypermixer: dims must be positive");
  HyperMixerParams p;
  p.local = TwoLayerMlp<Real>::create(dim, mix_dim, mix_dim, rng, name + ".mlp1");
  p.contribution = TwoLayerMlp<Real>::create(dim, mix_dim, mix_dim, rng, name + ".mlp2");
  p.positional = pe;
  return p;
}

template <typename Real>
Sequence<Real> hypermixer_forward_linear(Tape<Real>& tape, const Sequence<Real>& x,
                                         const HyperMixerParams<Real>& params) {
  Sequence<Real> xp = with_positions(tape, x, params.positional);
  Sequence<Real> f = mlp_forward(tape, xp, params.local);
  Sequence<Real> g = mlp_forward(tape, xp, params.contribution);
  Var<Real> s = outer_sum_over_time(tape, g, xp);
  if (params.sigma == Activation::kGelu) s = gelu(tape, s);
  return project_rows(tape, f, s);
}

template <typename Real>
Sequence<Real> mlp_mixer_token_mixing(Tape<Real>& tape, const Sequence<Real>& w1,
                                      const Sequence<Real>& w2, const Sequence<Real>& x,
                                      Activation sigma) {
  if (w1.values.shape() != w2.values.shape()) {
    throw DimensionError("mlp_mixer_token_mixing", "W1 width", w1.features(), "W2 width",
                         w2.features());
  }
  if (w1.lengths != x.lengths || w1.time() != x.time() || w2.lengths != x.lengths) {
    throw Error("mlp_mixer_token_mixing: sequence layouts differ");
  }
  const std::size_t B = x.batch(), D = x.features(), P = w1.features();
  const Tensor<Real>& a = w1.values.value();
  const Tensor<Real>& c = w2.values.value();
  const Tensor<Real>& xv = x.values.value();
  // pre(b, i, j) = sum_s W2[s, j] x[s, i], kept for backward.
  auto pre = std::make_shared<Tensor<Real>>(Shape{B, D, P});
  Tensor<Real> y(xv.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = static_cast<std::size_t>(x.lengths[b]);
    for (std::size_t i = 0; i < D; ++i) {
      std::vector<double> z(P);
      for (std::size_t j = 0; j < P; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < n; ++s) acc += c(b, s, j) * xv(b, s, i);
        (*pre)(b, i, j) = static_cast<Real>(acc);
        z[j] = apply(sigma, acc);
      }
      for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < P; ++j) acc += a(b, t, j) * z[j];
        y(b, t, i) = static_cast<Real>(acc);
      }
    }
  }
  Var<Real> av = w1.values, cv = w2.values, xvar = x.values;
  auto as = w1.values.shared(), cs = w2.values.shared(), xs = x.values.shared();
  std::shared_ptr<const Tensor<Real>> ps = pre;
  auto lengths = x.lengths;
  Var<Real> out = tape.record(
      std::move(y), {&w1.values, &w2.values, &x.values}, {as.get(), cs.get(), xs.get(), ps.get()},
      [=](Tape<Real>& t, const Tensor<Real>& g) {
        Tensor<Real>* ga = t.grad_slot(av);
        Tensor<Real>* gc = t.grad_slot(cv);
        Tensor<Real>* gx = t.grad_slot(xvar);
        std::vector<double> gpre(P);
        for (std::size_t b = 0; b < B; ++b) {
          const std::size_t n = static_cast<std::size_t>(lengths[b]);
          for (std::size_t i = 0; i < D; ++i) {
            for (std::size_t j = 0; j < P; ++j) {
              const double p = (*ps)(b, i, j);
              double gz = 0.0;
              for (std::size_t tt = 0; tt < n; ++tt) {
                gz += g(b, tt, i) * (*as)(b, tt, j);
                if (ga) (*ga)(b, tt, j) += static_cast<Real>(g(b, tt, i) * apply(sigma, p));
              }
              gpre[j] = gz * apply_grad(sigma, p);
            }
            for (std::size_t s = 0; s < n; ++s) {
              double gxi = 0.0;
              for (std::size_t j = 0; j < P; ++j) {
                if (gc) (*gc)(b, s, j) += static_cast<Real>(gpre[j] * (*xs)(b, s, i));
                gxi += gpre[j] * (*cs)(b, s, j);
              }
              if (gx) (*gx)(b, s, i) += static_cast<Real>(gxi);
            }
          }
        }
      });
  return {out, x.lengths};
}

template <typename Real>
Sequence<Real> hypermixer_forward_mixerform(Tape<Real>& tape, const Sequence<Real>& x,
                                            const HyperMixerParams<Real>& params,
                                            std::size_t max_time) {
  const int longest = *std::max_element(x.lengths.begin(), x.lengths.end());
  if (static_cast<std::size_t>(longest) > max_time) {
    throw CapacityError("hypermixer_forward_mixerform: sequence of " + std::to_string(longest) +
                        " frames exceeds the oracle cap of " + std::to_string(max_time));
  }
  Sequence<Real> xp = with_positions(tape, x, params.positional);
  Sequence<Real> w1 = mlp_forward(tape, xp, params.local);
  Sequence<Real> w2 = mlp_forward(tape, xp, params.contribution);
  return mlp_mixer_token_mixing(tape, w1, w2, xp, params.sigma);
}

#define SUMMIX_INSTANTIATE(R)                                                                  \
  template struct TwoLayerMlp<R>;                                                              \
  template struct HyperMixerParams<R>;                                                         \
  template Sequence<R> mlp_forward(Tape<R>&, const Sequence<R>&, const TwoLayerMlp<R>&);       \
  template Sequence<R> hypermixer_forward_linear(Tape<R>&, const Sequence<R>&,                 \
                                                 const HyperMixerParams<R>&);                  \
  template Sequence<R> mlp_mixer_token_mixing(Tape<R>&, const Sequence<R>&, const Sequence<R>&, \
                                              const Sequence<R>&, Activation);                 \
  template Sequence<R> hypermixer_forward_mixerform(Tape<R>&, const Sequence<R>&,              \
                                                    const HyperMixerParams<R>&, std::size_t);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
