#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "summix/bench/report.hpp"
#include "summix/bench/workload.hpp"
#include "summix/blocks/encoder.hpp"

namespace summix {

struct MeasureOptions {
  std::size_t repeats = 3;  // timed iterations; 0 gives analytic columns only
  std::size_t warmup = 2;   // discarded iterations before timing
  std::size_t threads = 1;
};

struct NamedConfig {
  std::string id;
  EncoderConfig config;
};

// Row with the identifying and closed-form columns filled in.
BenchRow analytic_row(const std::string& config_id, const EncoderConfig& config, const Workload& workload);

// One training step is encoder forward, CTC loss and backward on a fresh tape;
// the optimizer update is not included. Workload generation is outside the
// timed region.
template <typename Real>
BenchRow measure_training_step(const std::string& config_id, const Encoder<Real>& encoder, const Workload& workload,
                               const MeasureOptions& options);

// Convenience form with randomly initialised parameters seeded by the workload.
template <typename Real>
BenchRow measure_training_step(const EncoderConfig& config, const Workload& workload, std::size_t repeats);

// Decode is encoder forward without a tape plus greedy CTC decoding. Each
// repeat decodes a fresh utterance of the same duration; rtf is the median
// decode time divided by the duration.
template <typename Real>
std::vector<BenchRow> measure_rtf(const std::string& config_id, const Encoder<Real>& encoder,
                                  const std::vector<double>& durations, const Workload& base,
                                  const MeasureOptions& options);

// Sweeps every config over the duration grid and fits exponents. `base`
// supplies everything but the duration.
template <typename Real>
BenchReport training_sweep(const std::vector<NamedConfig>& configs, const std::vector<double>& durations,
                           const Workload& base, const MeasureOptions& options);

template <typename Real>
BenchReport rtf_sweep(const std::vector<NamedConfig>& configs, const std::vector<double>& durations,
                      const Workload& base, const MeasureOptions& options);

// Environment stamp for a report measured at Real precision. Records the
// thread count currently in effect.
template <typename Real>
BenchEnvironment bench_environment(const Workload& base, const MeasureOptions& options, const std::string& timed_region);

inline constexpr const char* kTrainingRegion = "encoder forward + ctc loss + backward; no optimizer step";
inline constexpr const char* kDecodeRegion = "encoder forward without tape + greedy ctc decode";

// Sets the Eigen thread count and returns the count actually in effect.
std::size_t set_compute_threads(std::size_t threads);

}  // namespace summix
