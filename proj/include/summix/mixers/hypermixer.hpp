#pragma once

#include <cstddef>
#include <string>

#include "summix/numcore/ops.hpp"

namespace summix {

enum class PositionalEncoding { kOff, kSinusoidal };

// Per-frame MLP: GeLU hidden layer, linear output.
template <typename Real>
struct TwoLayerMlp {
  DenseGelu<Real> hidden;
  DenseGelu<Real> output;

  static TwoLayerMlp create(std::size_t in, std::size_t hidden_dim, std::size_t out, Rng& rng,
                            const std::string& name);
  std::size_t num_parameters() const { return hidden.num_parameters() + output.num_parameters(); }
  void collect(ParameterList<Real>& out) {
    hidden.collect(out);
    output.collect(out);
  }
};

template <typename Real>
Sequence<Real> mlp_forward(Tape<Real>& tape, const Sequence<Real>& x, const TwoLayerMlp<Real>& mlp);

// Token-mixing weights generated per frame. `local` produces the rows of W1
// (the per-frame vector the global matrix is applied to); `contribution`
// produces the rows of W2 (the per-frame term of the global sum).
template <typename Real>
struct HyperMixerParams {
  TwoLayerMlp<Real> local;
  TwoLayerMlp<Real> contribution;
  PositionalEncoding positional = PositionalEncoding::kOff;
  Activation sigma = Activation::kGelu;  // applied elementwise to the global matrix

  static HyperMixerParams create(std::size_t dim, std::size_t mix_dim, PositionalEncoding pe,
                                 Rng& rng, const std::string& name);

  std::size_t mix_dim() const { return local.output.out_dim(); }
  std::size_t num_parameters() const { return local.num_parameters() + contribution.num_parameters(); }
  void collect(ParameterList<Real>& out) {
    local.collect(out);
    contribution.collect(out);
  }
};

// Linear-time form: S = sigma(sum_t f'(x_t) (outer) x_t), h_t = f(x_t) . S.
template <typename Real>
Sequence<Real> hypermixer_forward_linear(Tape<Real>& tape, const Sequence<Real>& x,
                                         const HyperMixerParams<Real>& params);

inline constexpr std::size_t kMixerFormMaxTime = 64;

// MLP-Mixer form with generated weights: materialises W1(X), W2(X) of shape
// [T, D'] and mixes feature dimension i across time as
// h_i = W1 . sigma(W2^T . x_i). Oracle use only; throws CapacityError when any
// sequence exceeds `max_time` frames.
template <typename Real>
Sequence<Real> hypermixer_forward_mixerform(Tape<Real>& tape, const Sequence<Real>& x,
                                            const HyperMixerParams<Real>& params,
                                            std::size_t max_time = kMixerFormMaxTime);

// The per-dimension token mixing step of the MLP-Mixer form on its own.
template <typename Real>
Sequence<Real> mlp_mixer_token_mixing(Tape<Real>& tape, const Sequence<Real>& w1,
                                      const Sequence<Real>& w2, const Sequence<Real>& x,
                                      Activation sigma);

}  // namespace summix
