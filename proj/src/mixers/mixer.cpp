#include "summix/mixers/mixer.hpp"

#include "summix/numcore/error.hpp"

namespace summix {

template <typename Real>
MixerParams<Real> create_mixer(MixerKind kind, std::size_t dim, std::size_t heads_or_chunks,
                               PositionalEncoding pe, Rng& rng, const std::string& name) {
  switch (kind) {
    case MixerKind::kSummaryMixing: {
      SummaryMixingDims dims;
      dims.input = dim;
      dims.chunks = heads_or_chunks;
      return SummaryMixingParams<Real>::create(dims, rng, name);
    }
    case MixerKind::kHyperMixer:
      return HyperMixerParams<Real>::create(dim, dim, pe, rng, name);
    case MixerKind::kMhsa:
      return MhsaParams<Real>::create(dim, heads_or_chunks, rng, name);
    case MixerKind::kSummaryMixingLite:
      break;
  }
  throw ConfigError("summary_mixing_lite is only available as a branchformer block");
}

template <typename Real>
Sequence<Real> mixer_forward(Tape<Real>& tape, const Sequence<Real>& x, const MixerParams<Real>& mixer) {
  struct Visitor {
    Tape<Real>& tape;
    const Sequence<Real>& x;
    Sequence<Real> operator()(const SummaryMixingParams<Real>& p) const {
      return summary_mixing_forward(tape, x, p);
    }
    Sequence<Real> operator()(const HyperMixerParams<Real>& p) const {
      return hypermixer_forward_linear(tape, x, p);
    }
    Sequence<Real> operator()(const MhsaParams<Real>& p) const { return mhsa_forward(tape, x, p); }
  };
  return std::visit(Visitor{tape, x}, mixer);
}

#define SUMMIX_INSTANTIATE(R)                                                                     \
  template MixerParams<R> create_mixer<R>(MixerKind, std::size_t, std::size_t, PositionalEncoding, \
                                          Rng&, const std::string&);                              \
  template Sequence<R> mixer_forward(Tape<R>&, const Sequence<R>&, const MixerParams<R>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
