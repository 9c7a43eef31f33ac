#pragma once

#include <cstddef>
#include <vector>

#include "summix/numcore/ops.hpp"

namespace summix {

// Label sequences over 1..V; index 0 of the logits is the blank.
using LabelSequence = std::vector<int>;

// A target fits in T frames when U plus the number of adjacent repeats (each
// needs a separating blank) is at most T.
bool ctc_feasible(const LabelSequence& target, std::size_t frames);

template <typename Real>
struct CtcLoss {
  Var<Real> per_sequence;   // [B] negative log-likelihoods; +inf when infeasible
  Var<Real> mean;           // scalar mean over feasible sequences (0 if none)
  std::vector<bool> infeasible;
};

// Negative log-likelihood of each target under frame-wise log-probabilities
// [B, T, V + 1]. Infeasible targets give +inf, a flag and no gradient. The
// gradient with respect to log_probs is minus the state occupancy.
template <typename Real>
Var<Real> ctc_nll(Tape<Real>& tape, const Sequence<Real>& log_probs, const std::vector<LabelSequence>& targets,
                  std::vector<bool>* infeasible = nullptr);

// log_softmax over the label axis followed by ctc_nll.
template <typename Real>
CtcLoss<Real> ctc_loss(Tape<Real>& tape, const Sequence<Real>& logits, const std::vector<LabelSequence>& targets);

// Mean of the entries of a [B] vector not flagged in `exclude`; excluded
// entries get no gradient. Non-finite kept entries propagate, so a diverged
// loss stays visible.
template <typename Real>
Var<Real> mean_excluding(Tape<Real>& tape, const Var<Real>& values, const std::vector<bool>& exclude);

inline constexpr std::size_t kBruteForceMaxFrames = 10;
inline constexpr std::size_t kBruteForceMaxLabels = 4;

// Negative log of the summed probability over every one of the (V + 1)^T frame
// paths that collapses to the target. Refuses T > 10 or V > 4 with CapacityError.
std::vector<double> ctc_brute_force(const MaskedBatch<double>& logits, const std::vector<LabelSequence>& targets);

// Frame-wise argmax (lowest index wins ties), repeats merged, blanks dropped.
template <typename Real>
std::vector<LabelSequence> ctc_greedy_decode(const Tensor<Real>& logits, const std::vector<int>& lengths);

}  // namespace summix
