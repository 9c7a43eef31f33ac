#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace summix {

struct TimingStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population standard deviation over the repeats
  double median_ms = 0.0;

  bool operator==(const TimingStats&) const = default;
};

TimingStats summarize_timings(std::vector<double> samples_ms);

// One (config, L) measurement.
struct BenchRow {
  std::string config_id;
  std::string mixer;
  std::string block;
  std::size_t model_dim = 0;
  std::size_t depth = 0;
  double seconds = 0.0;
  std::size_t frames = 0;
  std::uint64_t flops = 0;              // block stack, closed form
  std::uint64_t activation_floats = 0;  // block stack, closed form
  std::uint64_t peak_model_floats = 0;  // parameters plus tape-retained floats, measured
  std::optional<TimingStats> wall;      // absent when repeats = 0
  std::optional<double> rtf;            // decode rows only: median wall / duration

  bool operator==(const BenchRow&) const = default;
};

struct BenchEnvironment {
  std::string precision = "f32";
  std::size_t threads = 1;
  std::size_t repeats = 0;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
  std::size_t batch = 1;
  std::size_t target_tokens = 100;
  std::size_t vocab = 1000;
  std::string timed_region;

  bool operator==(const BenchEnvironment&) const = default;
};

// A pass/fail property evaluated on measured rows.
struct PropertyResult {
  std::string name;
  std::string config_id;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;

  bool operator==(const PropertyResult&) const = default;
};

struct BenchReport {
  std::string kind;  // "training_step" or "rtf"
  BenchEnvironment environment;
  std::vector<BenchRow> rows;
  // config_id -> measure name -> slope
  std::map<std::string, std::map<std::string, double>> exponents;
  std::vector<PropertyResult> properties;

  bool operator==(const BenchReport&) const = default;
};

// Least-squares slope of log(measure) against log(T). Needs at least three
// points with positive coordinates; throws ConfigError otherwise.
double fit_exponent(const std::vector<std::pair<double, double>>& points);

// The points a report exponent is fitted over: the largest half of the grid
// by T, never fewer than three.
std::vector<std::pair<double, double>> largest_half(std::vector<std::pair<double, double>> points);

// Measures with an exponent: flops, activation_floats, peak_model_floats, and
// wall_ms_mean, wall_ms_median, rtf where present.
std::vector<std::string> measure_names();
std::optional<double> measure_value(const BenchRow& row, const std::string& measure);

// Fills report.exponents from the rows, grouping by config_id. Configs with
// fewer than three points get no exponents.
void compute_exponents(BenchReport& report);
std::map<std::string, std::map<std::string, double>> exponents_from_rows(const std::vector<BenchRow>& rows);

inline constexpr double kRtfFlatnessLimit = 1.5;

// RTF at the longest duration over RTF at the shortest; needs two or more
// timed rows.
std::optional<double> rtf_growth(const std::vector<BenchRow>& rows, const std::string& config_id);
// Whether RTF rises strictly from each duration to the next.
bool rtf_strictly_increasing(const std::vector<BenchRow>& rows, const std::string& config_id);
// Appends rtf_flatness for the summary-mixing kinds and rtf_increasing for
// MHSA, one per config with timed rows.
void evaluate_rtf_properties(BenchReport& report);

inline constexpr const char* kCsvHeader =
    "config_id,mixer,block,D,depth,L_seconds,T_frames,flops,activation_floats,wall_ms_mean,wall_ms_std,"
    "wall_ms_median,rtf";

// Absent values are empty fields. Doubles use 17 significant digits so the
// file parses back to the same values.
std::string to_csv(const std::vector<BenchRow>& rows);
// peak_model_floats is not a CSV column and parses as zero.
std::vector<BenchRow> rows_from_csv(const std::string& text);

std::string to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Static log-log line chart, one polyline per series.
std::string loglog_svg(const std::vector<ChartSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

// One series per config_id of (T, measure).
std::vector<ChartSeries> chart_series(const std::vector<BenchRow>& rows, const std::string& measure);

}  // namespace summix
