#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "summix/mixers/cost.hpp"
#include "summix/mixers/hypermixer.hpp"
#include "summix/mixers/mhsa.hpp"
#include "summix/mixers/summary_mixing.hpp"

namespace summix {

template <typename Real>
using MixerParams = std::variant<SummaryMixingParams<Real>, HyperMixerParams<Real>, MhsaParams<Real>>;

// Builds a [D -> D] mixer. Throws ConfigError for the lite kind, which only
// exists inside a Branchformer block.
template <typename Real>
MixerParams<Real> create_mixer(MixerKind kind, std::size_t dim, std::size_t heads_or_chunks,
                               PositionalEncoding pe, Rng& rng, const std::string& name);

template <typename Real>
Sequence<Real> mixer_forward(Tape<Real>& tape, const Sequence<Real>& x, const MixerParams<Real>& mixer);

template <typename Real>
void collect(MixerParams<Real>& mixer, ParameterList<Real>& out) {
  std::visit([&](auto& m) { m.collect(out); }, mixer);
}

template <typename Real>
std::size_t num_parameters(const MixerParams<Real>& mixer) {
  return std::visit([](const auto& m) { return m.num_parameters(); }, mixer);
}

}  // namespace summix
