#pragma once

#include <cstddef>
#include <string>

#include "summix/numcore/ops.hpp"

namespace summix {

// MLP with convolutional gating: up-project to D_cg, split into halves (a, b),
// gate a with depthwise_conv(layernorm(b)), project the D_cg / 2 gate back to D.
template <typename Real>
struct CgMlpParams {
  DenseGelu<Real> up;
  LayerNormParams<Real> gate_norm;
  Parameter<Real> gate_conv;  // [D_cg / 2, K]
  DenseGelu<Real> down;

  // Throws ConfigError for odd D_cg or even K. Kernels are drawn uniformly
  // from +-1/sqrt(K).
  static CgMlpParams create(std::size_t dim, std::size_t cg_dim, std::size_t kernel, Rng& rng,
                            const std::string& name);

  std::size_t cg_dim() const { return up.out_dim(); }
  std::size_t num_parameters() const {
    return up.num_parameters() + gate_norm.num_parameters() + gate_conv.value.size() +
           down.num_parameters();
  }
  void collect(ParameterList<Real>& out) {
    up.collect(out);
    gate_norm.collect(out);
    out.push_back(&gate_conv);
    down.collect(out);
  }
};

// [channels, kernel] depthwise kernels; throws ConfigError for even kernels.
template <typename Real>
Parameter<Real> make_depthwise_kernels(std::size_t channels, std::size_t kernel, Rng& rng,
                                       const std::string& name);

template <typename Real>
Sequence<Real> cgmlp_forward(Tape<Real>& tape, const Sequence<Real>& x, const CgMlpParams<Real>& p);

}  // namespace summix
