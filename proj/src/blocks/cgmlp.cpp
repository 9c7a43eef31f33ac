#include "summix/blocks/cgmlp.hpp"

#include <cmath>

#include "summix/numcore/error.hpp"

namespace summix {

template <typename Real>
Parameter<Real> make_depthwise_kernels(std::size_t channels, std::size_t kernel, Rng& rng,
                                       const std::string& name) {
  if (kernel % 2 == 0) {
    throw ConfigError(name + ": depthwise kernel size " + std::to_string(kernel) + " must be odd");
  }
  Parameter<Real> p{name, Tensor<Real>({channels, kernel})};
  const double limit = 1.0 / std::sqrt(static_cast<double>(kernel));
  for (auto& v : p.value.vec()) v = static_cast<Real>(rng.uniform(-limit, limit));
  return p;
}

template <typename Real>
CgMlpParams<Real> CgMlpParams<Real>::create(std::size_t dim, std::size_t cg_dim, std::size_t kernel,
                                            Rng& rng, const std::string& name) {
  if (cg_dim == 0 || cg_dim % 2 != 0) {
    throw ConfigError(name + ": cgMLP dim " + std::to_string(cg_dim) + " must be even and positive");
  }
  CgMlpParams p;
  p.up = DenseGelu<Real>::create(dim, cg_dim, Activation::kGelu, rng, name + ".up");
  p.gate_norm = LayerNormParams<Real>::create(cg_dim / 2, name + ".gate_norm");
  p.gate_conv = make_depthwise_kernels<Real>(cg_dim / 2, kernel, rng, name + ".gate_conv");
  p.down = DenseGelu<Real>::create(cg_dim / 2, dim, Activation::kIdentity, rng, name + ".down");
  return p;
}

template <typename Real>
Sequence<Real> cgmlp_forward(Tape<Real>& tape, const Sequence<Real>& x, const CgMlpParams<Real>& p) {
  const std::size_t half = p.cg_dim() / 2;
  Sequence<Real> u = dense_gelu_forward(tape, x, p.up);
  Sequence<Real> a = slice_features(tape, u, 0, half);
  Sequence<Real> b = slice_features(tape, u, half, 2 * half);
  Sequence<Real> gate = depthwise_conv1d_forward(tape, layernorm_forward(tape, b, p.gate_norm), p.gate_conv);
  return dense_gelu_forward(tape, multiply(tape, a, gate), p.down);
}

template Parameter<float> make_depthwise_kernels(std::size_t, std::size_t, Rng&, const std::string&);
template Parameter<double> make_depthwise_kernels(std::size_t, std::size_t, Rng&, const std::string&);
template struct CgMlpParams<float>;
template struct CgMlpParams<double>;
template Sequence<float> cgmlp_forward(Tape<float>&, const Sequence<float>&, const CgMlpParams<float>&);
template Sequence<double> cgmlp_forward(Tape<double>&, const Sequence<double>&, const CgMlpParams<double>&);

}  // namespace summix
