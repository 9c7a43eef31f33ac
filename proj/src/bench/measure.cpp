#include "summix/bench/measure.hpp"

#include <Eigen/Core>
#include <chrono>

#include "summix/numcore/error.hpp"

namespace summix {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Real>
const char* precision_name() {
  return sizeof(Real) == 4 ? "f32" : "f64";
}

Workload with_seconds(Workload w, double seconds) {
  w.seconds = seconds;
  return w;
}

}  // namespace

template <typename Real>
BenchEnvironment bench_environment(const Workload& base, const MeasureOptions& options, const std::string& region) {
  BenchEnvironment e;
  e.precision = precision_name<Real>();
  e.threads = static_cast<std::size_t>(Eigen::nbThreads());
  e.repeats = options.repeats;
  e.warmup = options.warmup;
  e.seed = base.seed;
  e.batch = base.batch;
  e.target_tokens = base.target_tokens;
  e.vocab = base.vocab;
  e.timed_region = region;
  return e;
}

std::size_t set_compute_threads(std::size_t threads) {
  if (threads == 0) throw ConfigError("threads must be at least 1");
  Eigen::setNbThreads(static_cast<int>(threads));
  return static_cast<std::size_t>(Eigen::nbThreads());
}

BenchRow analytic_row(const std::string& config_id, const EncoderConfig& config, const Workload& workload) {
  workload.validate();
  BenchRow row;
  row.config_id = config_id;
  row.mixer = to_string(config.mixer_kind);
  row.block = to_string(config.block_kind);
  row.model_dim = config.model_dim;
  row.depth = config.depth;
  row.seconds = workload.seconds;
  row.frames = workload.frames();
  const EncoderCost cost = encoder_cost(config, row.frames);
  row.flops = cost.blocks.flops;
  row.activation_floats = cost.blocks.activation_floats;
  return row;
}

template <typename Real>
BenchRow measure_training_step(const std::string& config_id, const Encoder<Real>& encoder, const Workload& workload,
                               const MeasureOptions& options) {
  const EncoderConfig& config = encoder.config;
  if (workload.feature_dim != config.input_dim || workload.vocab != config.vocab_size) {
    throw ConfigError("measure_training_step: workload feature_dim/vocab " + std::to_string(workload.feature_dim) +
                      "/" + std::to_string(workload.vocab) + " do not match the encoder's " +
                      std::to_string(config.input_dim) + "/" + std::to_string(config.vocab_size));
  }
  BenchRow row = analytic_row(config_id, config, workload);
  if (options.repeats == 0) return row;

  const auto data = generate_workload<Real>(workload, encoder_cost(config, row.frames).frames);
  std::vector<double> samples;
  std::size_t retained = 0;
  for (std::size_t i = 0; i < options.warmup + options.repeats; ++i) {
    const auto start = Clock::now();
    {
      Tape<Real> tape;
      const auto logits = encoder_logits(tape, as_constant(tape, data.features), encoder);
      const auto loss = ctc_loss(tape, logits, data.targets);
      tape.backward(loss.mean);
      retained = tape.retained_floats();
    }
    const double ms = elapsed_ms(start);
    if (i >= options.warmup) samples.push_back(ms);
  }
  row.wall = summarize_timings(samples);
  row.peak_model_floats = encoder.num_parameters() + retained;
  return row;
}

template <typename Real>
BenchRow measure_training_step(const EncoderConfig& config, const Workload& workload, std::size_t repeats) {
  const Encoder<Real> encoder = Encoder<Real>::create(config, workload.seed);
  MeasureOptions options;
  options.repeats = repeats;
  return measure_training_step("config", encoder, workload, options);
}

template <typename Real>
std::vector<BenchRow> measure_rtf(const std::string& config_id, const Encoder<Real>& encoder,
                                  const std::vector<double>& durations, const Workload& base,
                                  const MeasureOptions& options) {
  std::vector<BenchRow> rows;
  for (double seconds : durations) {
    Workload w = with_seconds(base, seconds);
    BenchRow row = analytic_row(config_id, encoder.config, w);
    if (options.repeats == 0) {
      rows.push_back(row);
      continue;
    }
    std::vector<double> samples;
    for (std::size_t i = 0; i < options.warmup + options.repeats; ++i) {
      w.seed = base.seed + i;
      const auto data = generate_workload<Real>(w);
      const auto start = Clock::now();
      {
        Tape<Real> tape(false);
        const auto logits = encoder_logits(tape, as_constant(tape, data.features), encoder);
        const auto hyp = ctc_greedy_decode(logits.values.value(), logits.lengths);
        (void)hyp;
      }
      const double ms = elapsed_ms(start);
      if (i >= options.warmup) samples.push_back(ms);
    }
    row.wall = summarize_timings(samples);
    row.rtf = row.wall->median_ms / 1000.0 / seconds;
    rows.push_back(row);
  }
  return rows;
}

template <typename Real>
BenchReport training_sweep(const std::vector<NamedConfig>& configs, const std::vector<double>& durations,
                           const Workload& base, const MeasureOptions& options) {
  set_compute_threads(options.threads);
  BenchReport report;
  report.kind = "training_step";
  report.environment = bench_environment<Real>(base, options, kTrainingRegion);
  for (const auto& c : configs) {
    Workload w = base;
    w.feature_dim = c.config.input_dim;
    w.vocab = c.config.vocab_size;
    const Encoder<Real> encoder = Encoder<Real>::create(c.config, base.seed);
    for (double seconds : durations) {
      report.rows.push_back(measure_training_step(c.id, encoder, with_seconds(w, seconds), options));
    }
  }
  compute_exponents(report);
  return report;
}

template <typename Real>
BenchReport rtf_sweep(const std::vector<NamedConfig>& configs, const std::vector<double>& durations,
                      const Workload& base, const MeasureOptions& options) {
  set_compute_threads(options.threads);
  BenchReport report;
  report.kind = "rtf";
  report.environment = bench_environment<Real>(base, options, kDecodeRegion);
  for (const auto& c : configs) {
    Workload w = base;
    w.feature_dim = c.config.input_dim;
    w.vocab = c.config.vocab_size;
    const Encoder<Real> encoder = Encoder<Real>::create(c.config, base.seed);
    for (auto& row : measure_rtf(c.id, encoder, durations, w, options)) report.rows.push_back(std::move(row));
  }
  compute_exponents(report);
  evaluate_rtf_properties(report);
  return report;
}

#define SUMMIX_INSTANTIATE(R)                                                                                   \
  template BenchEnvironment bench_environment<R>(const Workload&, const MeasureOptions&, const std::string&);  \
  template BenchRow measure_training_step<R>(const std::string&, const Encoder<R>&, const Workload&,           \
                                             const MeasureOptions&);                                           \
  template BenchRow measure_training_step<R>(const EncoderConfig&, const Workload&, std::size_t);              \
  template std::vector<BenchRow> measure_rtf<R>(const std::string&, const Encoder<R>&, const std::vector<double>&, \
                                                const Workload&, const MeasureOptions&);                      \
  template BenchReport training_sweep<R>(const std::vector<NamedConfig>&, const std::vector<double>&,           \
                                         const Workload&, const MeasureOptions&);                              \
  template BenchReport rtf_sweep<R>(const std::vector<NamedConfig>&, const std::vector<double>&, const Workload&, \
                                    const MeasureOptions&);

SUMMIX_INSTANTIATE(float)
SUMMIX_INSTANTIATE(double)

#undef SUMMIX_INSTANTIATE

}  // namespace summix
