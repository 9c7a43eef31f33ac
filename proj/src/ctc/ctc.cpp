#include "summix/ctc/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "summix/numcore/error.hpp"

namespace summix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_targets(const std::vector<LabelSequence>& targets, std::size_t batch, std::size_t labels,
                   const char* where) {
  if (targets.size() != batch) throw DimensionError(where, "targets", targets.size(), "batch", batch);
  for (const auto& t : targets) {
    for (int l : t) {
      if (l < 1 || static_cast<std::size_t>(l) >= labels) {
        throw ConfigError(std::string(where) + ": label " + std::to_string(l) + " outside [1, " +
                          std::to_string(labels - 1) + "]");
      }
    }
  }
}

// Extended sequence b, l1, b, l2, ..., b.
std::vector<int> extend(const LabelSequence& target) {
  std::vector<int> ext(2 * target.size() + 1, 0);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

// Per-sequence forward-backward over `frames` rows of lp (row stride V).
// Returns log p and fills occupancy [frames, V] (sum over states of
// alpha * beta / p), with beta excluding the current frame's emission.
template <typename Real>
double forward_backward(const Real* lp, std::size_t frames, std::size_t V, const LabelSequence& target,
                        std::vector<double>* occupancy) {
  const std::vector<int> ext = extend(target);
  const std::size_t S = ext.size();
  auto skip_ok = [&](std::size_t s) { return s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2]; };
  std::vector<double> alpha(frames * S, kNegInf);
  alpha[0] = lp[ext[0]];
  if (S > 1) alpha[1] = lp[ext[1]];
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[(t - 1) * S + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * S + s - 1]);
      if (skip_ok(s)) a = log_add(a, alpha[(t - 1) * S + s - 2]);
      alpha[t * S + s] = a == kNegInf ? kNegInf : a + lp[t * V + ext[s]];
    }
  }
  double logp = alpha[(frames - 1) * S + S - 1];
  if (S > 1) logp = log_add(logp, alpha[(frames - 1) * S + S - 2]);
  if (!occupancy || logp == kNegInf) return logp;

  std::vector<double> beta(frames * S, kNegInf);
  beta[(frames - 1) * S + S - 1] = 0.0;
  if (S > 1) beta[(frames - 1) * S + S - 2] = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      // Successors of s: s, s + 1, and s + 2 when that one may skip.
      double b = beta[(t + 1) * S + s] + lp[(t + 1) * V + ext[s]];
      if (s + 1 < S) b = log_add(b, beta[(t + 1) * S + s + 1] + lp[(t + 1) * V + ext[s + 1]]);
      if (s + 2 < S && skip_ok(s + 2)) b = log_add(b, beta[(t + 1) * S + s + 2] + lp[(t + 1) * V + ext[s + 2]]);
      beta[t * S + s] = b;
    }
  }
  occupancy->assign(frames * V, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double w = alpha[t * S + s] + beta[t * S + s];
      if (w != kNegInf) (*occupancy)[t * V + ext[s]] += std::exp(w - logp);
    }
  }
  return logp;
}

}  // namespace

bool ctc_feasible(const LabelSequence& target, std::size_t frames) {
  std::size_t needed = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) needed += target[i] == target[i - 1];
  return needed <= frames;
}

template <typename Real>
Var<Real> ctc_nll(Tape<Real>& tape, const Sequence<Real>& log_probs, const std::vector<LabelSequence>& targets,
                  std::vector<bool>* infeasible) {
  const std::size_t B = log_probs.batch(), T = log_probs.time(), V = log_probs.features();
  check_targets(targets, B, V, "ctc_nll");
  const Tensor<Real>& lp = log_probs.values.value();
  Tensor<Real> nll({B});
  std::vector<bool> bad(B, false);
  const bool need_grad = tape.recording() && log_probs.values.tracked();
  auto occupancy = std::make_shared<std::vector<std::vector<double>>>(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t n = static_cast<std::size_t>(log_probs.lengths[b]);
    if (!ctc_feasible(targets[b], n)) {
      bad[b] = true;
      nll[b] = std::numeric_limits<Real>::infinity();
      continue;
    }
    const double logp = forward_backward(lp.data() + b * T * V, n, V, targets[b], need_grad ? &(*occupancy)[b] : nullptr);
    nll[b] = static_cast<Real>(-logp);
  }
  if (infeasible) *infeasible = bad;
  Var<Real> lpv = log_probs.values;
  return tape.record(std::move(nll), {&log_probs.values}, {}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real>* gl = t.grad_slot(lpv);
    for (std::size_t b = 0; b < B; ++b) {
      const auto& occ = (*occupancy)[b];
      if (bad[b] || occ.empty() || g[b] == Real(0)) continue;
      Real* row = gl->data() + b * T * V;
      for (std::size_t i = 0; i < occ.size(); ++i) row[i] -= static_cast<Real>(g[b] * occ[i]);
    }
  });
}

template <typename Real>
Var<Real> mean_excluding(Tape<Real>& tape, const Var<Real>& values, const std::vector<bool>& exclude) {
  const Tensor<Real>& v = values.value();
  if (exclude.size() != v.size()) {
    throw DimensionError("mean_excluding", "exclude flags", exclude.size(), "values", v.size());
  }
  std::vector<bool> keep(v.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    keep[i] = !exclude[i];
    if (keep[i]) {
      sum += v[i];
      ++count;
    }
  }
  Tensor<Real> out({1});
  out[0] = count ? static_cast<Real>(sum / static_cast<double>(count)) : Real(0);
  Var<Real> in = values;
  return tape.record(std::move(out), {&values}, {}, [=](Tape<Real>& t, const Tensor<Real>& g) {
    if (!count) return;
    Tensor<Real>* gi = t.grad_slot(in);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) (*gi)[i] += g[0] / static_cast<Real>(count);
    }
  });
}

template <typename Real>
CtcLoss<Real> ctc_loss(Tape<Real>& tape, const Sequence<Real>& logits, const std::vector<LabelSequence>& targets) {
  CtcLoss<Real> out;
  out.per_sequence = ctc_nll(tape, log_softmax_features(tape, logits), targets, &out.infeasible);
  out.mean = mean_excluding(tape, out.per_sequence, out.infeasible);
  return out;
}

std::vector<double> ctc_brute_force(const MaskedBatch<double>& logits, const std::vector<LabelSequence>& targets) {
  validate(logits);
  const std::size_t B = logits.batch(), V = logits.features();
  check_targets(targets, B, V, "ctc_brute_force");
  if (V - 1 > kBruteForceMaxLabels) {
    throw CapacityError("ctc_brute_force: " + std::to_string(V - 1) + " labels exceed the cap of " +
                        std::to_string(kBruteForceMaxLabels));
  }
  std::vector<double> out(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t T = static_cast<std::size_t>(logits.lengths[b]);
    if (T > kBruteForceMaxFrames) {
      throw CapacityError("ctc_brute_force: " + std::to_string(T) + " frames exceed the cap of " +
                          std::to_string(kBruteForceMaxFrames));
    }
    std::vector<double> prob(T * V);
    for (std::size_t t = 0; t < T; ++t) {
      double z = 0.0;
      for (std::size_t k = 0; k < V; ++k) z += std::exp(logits.values(b, t, k));
      for (std::size_t k = 0; k < V; ++k) prob[t * V + k] = std::exp(logits.values(b, t, k)) / z;
    }
    std::vector<std::size_t> path(T, 0);
    double total = 0.0;
    while (true) {
      LabelSequence collapsed;
      double p = 1.0;
      for (std::size_t t = 0; t < T; ++t) {
        p *= prob[t * V + path[t]];
        const int k = static_cast<int>(path[t]);
        if (k != 0 && (t == 0 || path[t - 1] != path[t])) collapsed.push_back(k);
      }
      if (collapsed == targets[b]) total += p;
      std::size_t i = 0;
      while (i < T && ++path[i] == V) path[i++] = 0;
      if (i == T) break;
    }
    out[b] = total > 0.0 ? -std::log(total) : std::numeric_limits<double>::infinity();
  }
  return out;
}

template <typename Real>
std::vector<LabelSequence> ctc_greedy_decode(const Tensor<Real>& logits, const std::vector<int>& lengths) {
  validate_lengths(logits.shape(), lengths, "ctc_greedy_decode");
  const std::size_t T = logits.dim(1), V = logits.dim(2);
  std::vector<LabelSequence> out(lengths.size());
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    int prev = 0;
    for (std::size_t t = 0; t < static_cast<std::size_t>(lengths[b]); ++t) {
      const Real* row = logits.data() + (b * T + t) * V;
      const int best = static_cast<int>(std::max_element(row, row + V) - row);
      if (best != 0 && best != prev) out[b].push_back(best);
      prev = best;
    }
  }
  return out;
}

#define SUMMIX_INSTANTIATE(R)                                                                                  \
  template Var<R> ctc_nll(Tape<R>&, const Sequence<R>&, const std::vector<LabelSequence>&, std::vector<bool>*); \
  template CtcLoss<R> ctc_loss(Tape<R>&, const Sequence<R>&, const std::vector<LabelSequence>&);               \
  template Var<R> mean_excluding(Tape<R>&, const Var<R>&, const std::vector<bool>&); \
  template std::vector<LabelSequence> ctc_greedy_decode(const Tensor<R>&, const std::vector<int>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
