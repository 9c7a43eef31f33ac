#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "summix/numcore/rng.hpp"
#include "summix/numcore/sequence.hpp"
#include "summix/numcore/tape.hpp"

namespace summix {

enum class Activation { kIdentity, kGelu };

// Exact (erf) GeLU and its derivative.
double gelu(double x);
double gelu_grad(double x);

// Dense layer with optional GeLU: act(x W + b), W shaped [D_in, D_out].
template <typename Real>
struct DenseGelu {
  Parameter<Real> weight;
  Parameter<Real> bias;
  Activation activation = Activation::kGelu;

  // Xavier-uniform weights, zero bias. Without a bias the bias tensor is empty.
  static DenseGelu create(std::size_t in, std::size_t out, Activation act, Rng& rng,
                          const std::string& name, bool with_bias = true);

  bool has_bias() const { return !bias.value.empty(); }
  std::size_t in_dim() const { return weight.value.dim(0); }
  std::size_t out_dim() const { return weight.value.dim(1); }
  std::size_t num_weights() const { return weight.value.size(); }
  std::size_t num_parameters() const { return weight.value.size() + bias.value.size(); }
  void collect(ParameterList<Real>& out) {
    out.push_back(&weight);
    if (has_bias()) out.push_back(&bias);
  }
};

template <typename Real>
struct LayerNormParams {
  Parameter<Real> gain;
  Parameter<Real> bias;

  static LayerNormParams create(std::size_t dim, const std::string& name);
  std::size_t num_parameters() const { return gain.value.size() + bias.value.size(); }
  void collect(ParameterList<Real>& out) { out.push_back(&gain); out.push_back(&bias); }
};

inline constexpr double kLayerNormEpsilon = 1e-5;

// --- sequence ops: [B, T, D] values, valid rows only, zeros at padding ---

template <typename Real>
Sequence<Real> dense_gelu_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                  const DenseGelu<Real>& layer);

// Mean over the valid frames of each sequence, shape [B, D]. Frames are summed
// left to right.
template <typename Real>
Var<Real> masked_mean_over_time(Tape<Real>& tape, const Sequence<Real>& x);

// Repeats a [B, D] vector at every valid frame.
template <typename Real>
Sequence<Real> broadcast_over_time(Tape<Real>& tape, const Var<Real>& v,
                                   const std::vector<int>& lengths, std::size_t time);

template <typename Real>
Sequence<Real> layernorm_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                 const LayerNormParams<Real>& params);

// Per-channel centred convolution along time, kernels [D, K] with K odd. Frames
// outside [0, length) read as zero.
template <typename Real>
Sequence<Real> depthwise_conv1d_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                        const Parameter<Real>& kernels);

// Dense convolution along time with zero padding (K-1)/2; weight is
// [K * C_in, C_out] with row index k * C_in + c. Lengths shrink to
// floor((L + 2p - K) / stride) + 1.
template <typename Real>
Sequence<Real> strided_conv1d_forward(Tape<Real>& tape, const Sequence<Real>& x,
                                      const Parameter<Real>& weight,
                                      const Parameter<Real>& bias, std::size_t kernel,
                                      std::size_t stride, Activation act);

std::size_t strided_conv_output_length(std::size_t length, std::size_t kernel,
                                       std::size_t stride);

template <typename Real>
Sequence<Real> concat_features(Tape<Real>& tape, const std::vector<Sequence<Real>>& parts);

template <typename Real>
Sequence<Real> slice_features(Tape<Real>& tape, const Sequence<Real>& x, std::size_t begin,
                              std::size_t end);

template <typename Real>
Sequence<Real> add(Tape<Real>& tape, const Sequence<Real>& a, const Sequence<Real>& b);

template <typename Real>
Sequence<Real> scale(Tape<Real>& tape, const Sequence<Real>& a, Real factor);

template <typename Real>
Sequence<Real> multiply(Tape<Real>& tape, const Sequence<Real>& a, const Sequence<Real>& b);

template <typename Real>
Sequence<Real> sigmoid(Tape<Real>& tape, const Sequence<Real>& a);

// log-softmax over the feature dimension of each valid frame.
template <typename Real>
Sequence<Real> log_softmax_features(Tape<Real>& tape, const Sequence<Real>& x);

// Per sequence: sum over valid t of a_t (outer) x_t, giving [B, P, D].
template <typename Real>
Var<Real> outer_sum_over_time(Tape<Real>& tape, const Sequence<Real>& a,
                              const Sequence<Real>& x);

// Per sequence: u_t . S_b for u [B, T, P] and S [B, P, D].
template <typename Real>
Sequence<Real> project_rows(Tape<Real>& tape, const Sequence<Real>& u, const Var<Real>& s);

// Multi-head scaled dot-product attention. q, k, v are [B, T, D] with heads
// taking contiguous D / heads slices. Keys at padded frames are excluded,
// which is additive -inf masking without materialising the mask.
template <typename Real>
Sequence<Real> scaled_dot_attention(Tape<Real>& tape, const Sequence<Real>& q,
                                    const Sequence<Real>& k, const Sequence<Real>& v,
                                    std::size_t heads);

// Sinusoidal absolute position table, shaped [T, D].
template <typename Real>
Tensor<Real> sinusoidal_positions(std::size_t time, std::size_t dim);

// x plus the position table at every valid frame.
template <typename Real>
Sequence<Real> add_sinusoidal_positions(Tape<Real>& tape, const Sequence<Real>& x);

// --- plain tensor ops ---

// Row-wise softmax of a [R, C] matrix with max subtraction.
template <typename Real>
Var<Real> softmax_rows(Tape<Real>& tape, const Var<Real>& x);

// Elementwise GeLU on a tensor of any shape.
template <typename Real>
Var<Real> gelu(Tape<Real>& tape, const Var<Real>& x);

// sum(x * weights) as a scalar; weights must match x's shape.
template <typename Real>
Var<Real> weighted_sum(Tape<Real>& tape, const Var<Real>& x, const Tensor<Real>& weights);

template <typename Real>
Var<Real> sum(Tape<Real>& tape, const Var<Real>& x);

template <typename Real>
Var<Real> add_scalars(Tape<Real>& tape, const Var<Real>& a, const Var<Real>& b);

}  // namespace summix
