#include "summix/blocks/frontend.hpp"

#include <cmath>

#include "summix/numcore/error.hpp"

namespace summix {
namespace {

template <typename Real>
void init_conv(Parameter<Real>& w, Parameter<Real>& b, std::size_t in, std::size_t out, std::size_t kernel,
               Rng& rng, const std::string& name) {
  w = {name + ".weight", Tensor<Real>({kernel * in, out})};
  b = {name + ".bias", Tensor<Real>({out})};
  const double limit = std::sqrt(6.0 / static_cast<double>(kernel * in + out));
  for (auto& v : w.value.vec()) v = static_cast<Real>(rng.uniform(-limit, limit));
}

}  // namespace

template <typename Real>
FrontendParams<Real> FrontendParams<Real>::create(std::size_t input_dim, std::size_t model_dim, Rng& rng,
                                                  const std::string& name) {
  if (input_dim == 0 || model_dim == 0) throw ConfigError("frontend: dims must be positive");
  FrontendParams p;
  init_conv(p.conv1_weight, p.conv1_bias, input_dim, kFilters1, kKernel, rng, name + ".conv1");
  init_conv(p.conv2_weight, p.conv2_bias, kFilters1, kFilters2, kKernel, rng, name + ".conv2");
  p.projection = DenseGelu<Real>::create(kFilters2, model_dim, Activation::kIdentity, rng, name + ".projection");
  return p;
}

std::size_t frontend_output_length(std::size_t frames) {
  const std::size_t k = FrontendParams<double>::kKernel, s = FrontendParams<double>::kStride;
  return strided_conv_output_length(strided_conv_output_length(frames, k, s), k, s);
}

template <typename Real>
Sequence<Real> frontend_forward(Tape<Real>& tape, const Sequence<Real>& x, const FrontendParams<Real>& p) {
  for (std::size_t b = 0; b < x.lengths.size(); ++b) {
    if (x.lengths[b] < static_cast<int>(kFrontendMinFrames)) {
      throw ConfigError("frontend: sequence " + std::to_string(b) + " has " + std::to_string(x.lengths[b]) +
                        " frames; at least " + std::to_string(kFrontendMinFrames) + " are required");
    }
  }
  const std::size_t k = FrontendParams<Real>::kKernel, s = FrontendParams<Real>::kStride;
  Sequence<Real> h = strided_conv1d_forward(tape, x, p.conv1_weight, p.conv1_bias, k, s, Activation::kGelu);
  h = strided_conv1d_forward(tape, h, p.conv2_weight, p.conv2_bias, k, s, Activation::kGelu);
  return dense_gelu_forward(tape, h, p.projection);
}

template struct FrontendParams<float>;
template struct FrontendParams<double>;
template Sequence<float> frontend_forward(Tape<float>&, const Sequence<float>&, const FrontendParams<float>&);
template Sequence<double> frontend_forward(Tape<double>&, const Sequence<double>&, const FrontendParams<double>&);

}  // namespace summix
