#include "summix/cli/toy_task.hpp"

#include <algorithm>
#include <cmath>

#include "summix/numcore/error.hpp"

namespace summix {

ToyTask::ToyTask(const ToyTaskSpec& spec) : spec_(spec) {
  if (spec.vocab == 0 || spec.feature_dim == 0 || spec.frames_per_label == 0 || spec.max_gap == 0 ||
      spec.min_labels == 0 || spec.min_labels > spec.max_labels) {
    throw ConfigError("toy task: vocab, feature_dim, frames_per_label, max_gap must be positive and "
                      "1 <= min_labels <= max_labels");
  }
  Rng rng = Rng(spec.seed).fork(7);
  embeddings_.assign(spec.vocab + 1, std::vector<double>(spec.feature_dim, 0.0));
  for (std::size_t l = 1; l <= spec.vocab; ++l)
    for (double& v : embeddings_[l]) v = rng.normal();
}

template <typename Real>
WorkloadBatch<Real> ToyTask::sample(std::size_t count, Rng& rng) const {
  const auto draw = [&](std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  };
  std::vector<std::vector<std::vector<double>>> utterances;
  WorkloadBatch<Real> out;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < count; ++i) {
    LabelSequence target(draw(spec_.min_labels, spec_.max_labels));
    for (int& l : target) l = static_cast<int>(draw(1, spec_.vocab));
    std::vector<std::vector<double>> frames;
    auto noise_frames = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> f(spec_.feature_dim);
        for (double& v : f) v = rng.normal();
        frames.push_back(std::move(f));
      }
    };
    noise_frames(draw(0, spec_.max_gap));
    for (std::size_t u = 0; u < target.size(); ++u) {
      if (u > 0) noise_frames(draw(1, spec_.max_gap));
      for (std::size_t k = 0; k < spec_.frames_per_label; ++k) {
        std::vector<double> f = embeddings_[static_cast<std::size_t>(target[u])];
        for (double& v : f) v += spec_.label_noise * rng.normal();
        frames.push_back(std::move(f));
      }
    }
    noise_frames(draw(0, spec_.max_gap));
    longest = std::max(longest, frames.size());
    out.targets.push_back(std::move(target));
    utterances.push_back(std::move(frames));
  }
  out.features.values = Tensor<Real>({count, longest, spec_.feature_dim});
  for (std::size_t b = 0; b < count; ++b) {
    out.features.lengths.push_back(static_cast<int>(utterances[b].size()));
    for (std::size_t t = 0; t < utterances[b].size(); ++t)
      for (std::size_t d = 0; d < spec_.feature_dim; ++d)
        out.features.values(b, t, d) = static_cast<Real>(utterances[b][t][d]);
  }
  return out;
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "'; valid: sgd, adam");
}

EncoderConfig toy_encoder_config(const EncoderConfig& config, const ToyTaskSpec& task) {
  EncoderConfig c = config;
  c.input_dim = task.feature_dim;
  c.vocab_size = task.vocab;
  return c;
}

template <typename Real>
double exact_match_rate(const Encoder<Real>& encoder, const WorkloadBatch<Real>& data) {
  Tape<Real> tape(false);
  const auto logits = encoder_logits(tape, as_constant(tape, data.features), encoder);
  const auto hyp = ctc_greedy_decode(logits.values.value(), logits.lengths);
  std::size_t hits = 0;
  for (std::size_t b = 0; b < hyp.size(); ++b) hits += hyp[b] == data.targets[b];
  return hyp.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(hyp.size());
}

namespace {

template <typename Real>
class Optimizer {
 public:
  Optimizer(const ParameterList<Real>& params, const TrainOptions& o) : params_(params), o_(o) {
    if (o.optimizer == OptimizerKind::kAdam) {
      for (auto* p : params) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
      }
    }
  }

  void step(const Tape<Real>& tape) {
    std::vector<Tensor<Real>> grads;
    double norm2 = 0;
    for (auto* p : params_) {
      grads.push_back(tape.grad(*p));
      for (Real g : grads.back().vec()) norm2 += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(norm2);
    const double scale = o_.clip_norm > 0 && norm > o_.clip_norm ? o_.clip_norm / norm : 1.0;
    ++t_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& w = params_[i]->value.vec();
      const auto& g = grads[i].vec();
      if (o_.optimizer == OptimizerKind::kSgd) {
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= static_cast<Real>(o_.learning_rate * scale * g[k]);
        continue;
      }
      constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
      const double c1 = 1 - std::pow(b1, static_cast<double>(t_)), c2 = 1 - std::pow(b2, static_cast<double>(t_));
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double gk = scale * static_cast<double>(g[k]);
        m_[i][k] = b1 * m_[i][k] + (1 - b1) * gk;
        v_[i][k] = b2 * v_[i][k] + (1 - b2) * gk * gk;
        w[k] -= static_cast<Real>(o_.learning_rate * (m_[i][k] / c1) / (std::sqrt(v_[i][k] / c2) + eps));
      }
    }
  }

 private:
  ParameterList<Real> params_;
  TrainOptions o_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

template <typename Real>
TrainResult train_toy(const EncoderConfig& base, const ToyTaskSpec& task_spec, const TrainOptions& options,
                      Encoder<Real>* trained, const std::function<void(std::size_t, double)>& on_step) {
  if (options.batch == 0 || options.eval_size == 0) throw ConfigError("train-toy: batch and eval size must be positive");
  if (!(options.learning_rate > 0)) throw ConfigError("train-toy: learning rate must be positive");
  TrainResult result;
  result.config = toy_encoder_config(base, task_spec);
  result.task = task_spec;
  result.options = options;
  const ToyTask task(task_spec);
  Encoder<Real> encoder = Encoder<Real>::create(result.config, options.seed);
  const auto params = encoder.parameters();
  Optimizer<Real> opt(params, options);

  Rng data_rng = Rng(options.seed).fork(11), eval_rng = Rng(task_spec.seed).fork(13);
  const auto held_out = task.sample<Real>(options.eval_size, eval_rng);

  for (std::size_t step = 1; step <= options.steps; ++step) {
    const auto batch = task.sample<Real>(options.batch, data_rng);
    Tape<Real> tape;
    const auto logits = encoder_logits(tape, as_constant(tape, batch.features), encoder);
    const auto loss = ctc_loss(tape, logits, batch.targets);
    const double value = static_cast<double>(loss.mean.value()[0]);
    if (!std::isfinite(value)) {
      throw NumericError("train-toy: loss became " + std::to_string(value) + " at step " + std::to_string(step) +
                         "; lower the learning rate");
    }
    tape.backward(loss.mean);
    opt.step(tape);
    result.loss_curve.push_back(value);
    if (on_step) on_step(step, value);
  }

  result.exact_match = exact_match_rate(encoder, held_out);
  {
    Tape<Real> tape(false);
    const auto logits = encoder_logits(tape, as_constant(tape, held_out.features), encoder);
    result.held_out_loss = static_cast<double>(ctc_loss(tape, logits, held_out.targets).mean.value()[0]);
  }
  if (trained) *trained = std::move(encoder);
  return result;
}

#define SUMMIX_INSTANTIATE(R)                                                                                     \
  template WorkloadBatch<R> ToyTask::sample<R>(std::size_t, Rng&) const;                                         \
  template double exact_match_rate<R>(const Encoder<R>&, const WorkloadBatch<R>&);                                \
  template TrainResult train_toy<R>(const EncoderConfig&, const ToyTaskSpec&, const TrainOptions&, Encoder<R>*, \
                                    const std::function<void(std::size_t, double)>&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
