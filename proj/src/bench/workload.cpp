#include "summix/bench/workload.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "summix/numcore/error.hpp"
#include "summix/numcore/rng.hpp"

namespace summix {

std::size_t Workload::frames() const {
  return static_cast<std::size_t>(std::llround(seconds * static_cast<double>(frames_per_second)));
}

void Workload::validate() const {
  if (!(seconds > 0) || frames_per_second == 0 || frames() == 0) {
    throw ConfigError("workload: duration " + std::to_string(seconds) + " s at " +
                      std::to_string(frames_per_second) + " fps gives no frames");
  }
  if (feature_dim == 0 || batch == 0 || vocab == 0) {
    throw ConfigError("workload: feature_dim, batch and vocab must be positive");
  }
}

template <typename Real>
WorkloadBatch<Real> generate_workload(const Workload& spec, std::size_t output_frames) {
  spec.validate();
  const std::size_t T = spec.frames();
  if (output_frames == 0) output_frames = T;
  Rng rng(spec.seed);
  Rng feature_rng = rng.fork(0), label_rng = rng.fork(1);

  WorkloadBatch<Real> out;
  out.features.values = Tensor<Real>({spec.batch, T, spec.feature_dim});
  for (auto& v : out.features.values.vec()) v = static_cast<Real>(feature_rng.normal());
  out.features.lengths.assign(spec.batch, static_cast<int>(T));

  const std::size_t U = std::min(spec.target_tokens, output_frames / 2);
  for (std::size_t b = 0; b < spec.batch; ++b) {
    LabelSequence target(U);
    for (int& l : target) l = static_cast<int>(label_rng.uniform_int(1, static_cast<std::int64_t>(spec.vocab)));
    out.targets.push_back(std::move(target));
  }
  return out;
}

template WorkloadBatch<float> generate_workload<float>(const Workload&, std::size_t);
template WorkloadBatch<double> generate_workload<double>(const Workload&, std::size_t);

}  // namespace summix
