#include "summix/mixers/mhsa.hpp"

#include "summix/numcore/error.hpp"

namespace summix {

template <typename Real>
MhsaParams<Real> MhsaParams<Real>::create(std::size_t dim, std::size_t heads, Rng& rng,
                                          const std::string& name) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("mhsa: " + std::to_string(heads) + " heads do not divide model dim " +
                      std::to_string(dim));
  }
  MhsaParams p;
  p.query = DenseGelu<Real>::create(dim, dim, Activation::kIdentity, rng, name + ".query");
  // A key bias shifts every score of a query row equally, so softmax removes it.
  p.key = DenseGelu<Real>::create(dim, dim, Activation::kIdentity, rng, name + ".key", false);
  p.value = DenseGelu<Real>::create(dim, dim, Activation::kIdentity, rng, name + ".value");
  p.output = DenseGelu<Real>::create(dim, dim, Activation::kIdentity, rng, name + ".output");
  p.heads = heads;
  return p;
}

template <typename Real>
Sequence<Real> mhsa_forward(Tape<Real>& tape, const Sequence<Real>& x, const MhsaParams<Real>& params) {
  Sequence<Real> q = dense_gelu_forward(tape, x, params.query);
  Sequence<Real> k = dense_gelu_forward(tape, x, params.key);
  Sequence<Real> v = dense_gelu_forward(tape, x, params.value);
  Sequence<Real> ctx = scaled_dot_attention(tape, q, k, v, params.heads);
  return dense_gelu_forward(tape, ctx, params.output);
}

template struct MhsaParams<float>;
template struct MhsaParams<double>;
template Sequence<float> mhsa_forward(Tape<float>&, const Sequence<float>&, const MhsaParams<float>&);
template Sequence<double> mhsa_forward(Tape<double>&, const Sequence<double>&,
                                       const MhsaParams<double>&);

}  // namespace summix
