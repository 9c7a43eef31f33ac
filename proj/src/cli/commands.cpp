#include "summix/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "summix/cli/checkpoint.hpp"
#include "summix/cli/gradcheck_suite.hpp"
#include "summix/cli/toy_task.hpp"
#include "summix/numcore/error.hpp"

namespace summix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kSweepPresets = {"toy-branchformer-summary_mixing", "toy-branchformer-mhsa"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream o(p, std::ios::binary);
  if (!o) throw ConfigError("cannot write '" + p.string() + "'");
  o << content;
  return p.string();
}

std::string precision_of(const RunConfig& run, const char* fallback) {
  const std::string p = run.precision.value_or(fallback);
  if (p != "f32" && p != "f64") throw ConfigError("precision must be f32 or f64, got '" + p + "'");
  return p;
}

Workload base_workload(const RunConfig& run) {
  Workload w;
  w.seed = run.seed;
  return w;
}

MeasureOptions measure_options(const RunConfig& run, std::size_t default_repeats) {
  MeasureOptions o;
  o.repeats = run.repeats.value_or(default_repeats);
  o.warmup = run.warmup;
  o.threads = run.threads;
  if (o.threads == 0) throw ConfigError("--threads must be at least 1");
  return o;
}

void print_exponents(const BenchReport& r, std::ostream& out) {
  for (const auto& [id, measures] : r.exponents) {
    out << id << ':';
    for (const auto& [m, s] : measures) out << ' ' << m << '=' << std::fixed << std::setprecision(3) << s;
    out << std::defaultfloat << '\n';
  }
}

void write_charts(const BenchReport& r, const fs::path& dir, const std::string& stem,
                  const std::vector<std::string>& measures, std::ostream& out) {
  for (const auto& m : measures) {
    const auto series = chart_series(r.rows, m);
    if (series.empty()) continue;
    out << "wrote " << write_file(dir, stem + "_" + m + ".svg", loglog_svg(series, stem + ": " + m + " vs T", "T (frames)", m))
        << '\n';
  }
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v > 0) || !std::isfinite(v)) {
      throw ConfigError("--l-grid: '" + item + "' is not a positive number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--l-grid is empty");
  return out;
}

std::vector<NamedConfig> resolve_configs(const RunConfig& run, const std::vector<std::string>& default_presets) {
  std::vector<NamedConfig> out;
  for (const auto& path : run.config_paths) {
    out.push_back({fs::path(path).stem().string(), load_encoder_config(path)});
  }
  for (const auto& name : run.presets) out.push_back({name, preset(name)});
  if (out.empty()) {
    for (const auto& name : default_presets) out.push_back({name, preset(name)});
  }
  return out;
}

int cmd_gradcheck(const RunConfig& run, std::ostream& out, std::ostream& err) {
  if (precision_of(run, "f64") != "f64") throw ConfigError("gradcheck runs in f64 only");
  const auto configs = resolve_configs(run, preset_names());
  SuiteOptions o;
  o.filter = run.filter;
  o.corrupt_gradient = run.corrupt_gradient;
  o.seed = run.seed;
  const auto results = run_gradcheck_suite(configs, o);

  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_rel_err=" << std::scientific << std::setprecision(3)
        << r.max_relative_error << " tol=" << r.tolerance << std::defaultfloat << " coords=" << r.coordinates << '\n';
    checks.push_back({{"name", r.name},
                      {"max_relative_error", r.max_relative_error},
                      {"tolerance", r.tolerance},
                      {"coordinates", r.coordinates},
                      {"worst_parameter", r.worst_parameter},
                      {"worst_index", r.worst_index},
                      {"worst_analytic", r.worst_analytic},
                      {"worst_numeric", r.worst_numeric},
                      {"passed", r.passed}});
  }
  json report = {{"seed", run.seed}, {"step", 1e-5}, {"checks", checks}, {"passed", all}};
  if (results.empty()) {
    err << "warning: no gradient checks matched filter '" << run.filter << "'\n";
    report["warning"] = "no checks matched";
  }
  out << "wrote " << write_file(run.out_dir, "gradcheck.json", report.dump(2) + "\n") << '\n';
  return all ? kExitOk : kExitCheckFailure;
}

int cmd_bench(const RunConfig& run, std::ostream& out, std::ostream&) {
  const auto configs = resolve_configs(run, kSweepPresets);
  const std::vector<double> grid = run.l_grid.empty() ? std::vector<double>{1, 2, 4, 8} : run.l_grid;
  const auto precision = precision_of(run, "f32");
  const auto o = measure_options(run, 3);
  const BenchReport r = precision == "f32" ? training_sweep<float>(configs, grid, base_workload(run), o)
                                           : training_sweep<double>(configs, grid, base_workload(run), o);
  const fs::path dir = run.out_dir;
  out << "wrote " << write_file(dir, "bench.csv", to_csv(r.rows)) << '\n';
  out << "wrote " << write_file(dir, "bench.json", to_json(r)) << '\n';
  write_charts(r, dir, "bench", {"wall_ms_median", "flops", "activation_floats"}, out);
  print_exponents(r, out);
  return kExitOk;
}

int cmd_rtf(const RunConfig& run, std::ostream& out, std::ostream&) {
  const std::vector<double> grid = run.l_grid.empty() ? std::vector<double>{10, 20, 30, 40, 50, 60} : run.l_grid;
  const auto precision = precision_of(run, "f32");
  const auto o = measure_options(run, 3);
  BenchReport r;
  if (!run.checkpoint.empty()) {
    // Trained parameters: one config, taken from the checkpoint.
    const std::string text = read_file(run.checkpoint);
    auto sweep = [&](auto tag) {
      using Real = decltype(tag);
      const Encoder<Real> enc = encoder_from_checkpoint<Real>(text);
      set_compute_threads(o.threads);
      BenchReport rep;
      rep.kind = "rtf";
      rep.environment = bench_environment<Real>(base_workload(run), o, kDecodeRegion);
      Workload w = base_workload(run);
      w.feature_dim = enc.config.input_dim;
      w.vocab = enc.config.vocab_size;
      rep.rows = measure_rtf(fs::path(run.checkpoint).stem().string(), enc, grid, w, o);
      compute_exponents(rep);
      evaluate_rtf_properties(rep);
      return rep;
    };
    r = precision == "f32" ? sweep(float{}) : sweep(double{});
  } else {
    const auto configs = resolve_configs(run, kSweepPresets);
    r = precision == "f32" ? rtf_sweep<float>(configs, grid, base_workload(run), o)
                           : rtf_sweep<double>(configs, grid, base_workload(run), o);
  }
  const fs::path dir = run.out_dir;
  out << "wrote " << write_file(dir, "rtf.csv", to_csv(r.rows)) << '\n';
  out << "wrote " << write_file(dir, "rtf.json", to_json(r)) << '\n';
  write_charts(r, dir, "rtf", {"rtf"}, out);
  for (const auto& p : r.properties) {
    out << (p.passed ? "PASS " : "FAIL ") << p.name << ' ' << p.config_id << " value=" << p.value << '\n';
  }
  return kExitOk;
}

int cmd_train_toy(const RunConfig& run, std::ostream& out, std::ostream&) {
  const auto configs = resolve_configs(run, {"toy-branchformer-summary_mixing"});
  if (configs.size() != 1) throw ConfigError("train-toy takes exactly one --config or --preset");
  const auto precision = precision_of(run, "f64");
  ToyTaskSpec task;
  task.seed = run.seed;
  TrainOptions o;
  o.steps = run.steps;
  o.batch = run.batch;
  o.learning_rate = run.learning_rate;
  o.optimizer = parse_optimizer_kind(run.optimizer);
  o.seed = run.seed;
  set_compute_threads(run.threads);

  auto log = [&](std::size_t step, double loss) {
    if (step % 50 == 0 || step == 1 || step == o.steps) out << "step " << step << " loss " << loss << '\n';
  };
  TrainResult result;
  std::string checkpoint;
  if (precision == "f32") {
    Encoder<float> enc;
    result = train_toy<float>(configs[0].config, task, o, &enc, log);
    checkpoint = checkpoint_to_json(enc);
  } else {
    Encoder<double> enc;
    result = train_toy<double>(configs[0].config, task, o, &enc, log);
    checkpoint = checkpoint_to_json(enc);
  }
  json metrics = {{"config_id", configs[0].id},
                  {"config", json::parse(to_json(result.config))},
                  {"precision", precision},
                  {"seed", run.seed},
                  {"steps", o.steps},
                  {"batch", o.batch},
                  {"optimizer", to_string(o.optimizer)},
                  {"learning_rate", o.learning_rate},
                  {"clip_norm", o.clip_norm},
                  {"task",
                   {{"vocab", task.vocab},
                    {"feature_dim", task.feature_dim},
                    {"labels", {task.min_labels, task.max_labels}},
                    {"frames_per_label", task.frames_per_label},
                    {"max_gap", task.max_gap},
                    {"label_noise", task.label_noise}}},
                  {"loss_curve", result.loss_curve},
                  {"held_out_size", o.eval_size},
                  {"held_out_loss", result.held_out_loss},
                  {"exact_match", result.exact_match}};
  out << "exact_match " << result.exact_match << " on " << o.eval_size << " held-out utterances\n";
  out << "wrote " << write_file(run.out_dir, "train_toy_metrics.json", metrics.dump(2) + "\n") << '\n';
  out << "wrote " << write_file(run.out_dir, "checkpoint.json", checkpoint) << '\n';
  return kExitOk;
}

int cmd_verify_report(const RunConfig& run, std::ostream& out, std::ostream&) {
  std::string json_path = run.report;
  if (json_path.empty() && !run.config_paths.empty()) json_path = run.config_paths.front();
  if (json_path.empty()) throw ConfigError("verify-report needs --report <report.json>");
  const std::string csv_path = run.csv.empty() ? fs::path(json_path).replace_extension(".csv").string() : run.csv;
  const BenchReport report = report_from_json(read_file(json_path));
  std::vector<BenchRow> csv_rows = rows_from_csv(read_file(csv_path));

  bool ok = true;
  auto verdict = [&](bool pass, const std::string& what) {
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << what << '\n';
  };

  bool rows_match = csv_rows.size() == report.rows.size();
  for (std::size_t i = 0; rows_match && i < csv_rows.size(); ++i) {
    csv_rows[i].peak_model_floats = report.rows[i].peak_model_floats;
    rows_match = csv_rows[i] == report.rows[i];
  }
  verdict(rows_match, "csv rows match json rows (" + std::to_string(csv_rows.size()) + ")");

  auto from_csv = exponents_from_rows(rows_from_csv(read_file(csv_path)));
  const auto from_json = exponents_from_rows(report.rows);
  for (const auto& [id, measures] : report.exponents) {
    for (const auto& [m, slope] : measures) {
      const auto& source = m == "peak_model_floats" ? from_json : from_csv;
      const auto it = source.find(id);
      const bool have = it != source.end() && it->second.count(m);
      const double again = have ? it->second.at(m) : NAN;
      std::ostringstream s;
      s << "exponent " << id << ' ' << m << " reported=" << slope << " refit=" << again;
      verdict(have && std::abs(again - slope) <= 1e-9, s.str());
    }
  }
  for (const auto& [id, measures] : from_csv) {
    for (const auto& [m, slope] : measures) {
      const auto it = report.exponents.find(id);
      if (it == report.exponents.end() || !it->second.count(m)) verdict(false, "exponent " + id + ' ' + m + " missing from json");
    }
  }
  for (const auto& r : report.rows) {
    if (!r.rtf) continue;
    const double want = r.wall ? r.wall->median_ms / 1000.0 / r.seconds : NAN;
    if (!(std::abs(*r.rtf - want) <= 1e-9)) verdict(false, "rtf bookkeeping " + r.config_id + " L=" + std::to_string(r.seconds));
  }
  if (report.kind == "rtf") {
    BenchReport again = report;
    again.properties.clear();
    evaluate_rtf_properties(again);
    verdict(again.properties == report.properties, "rtf properties recomputed");
  }
  return ok ? kExitOk : kExitCheckFailure;
}

int run_command(const RunConfig& run, std::ostream& out, std::ostream& err) {
  try {
    if (run.subcommand == "gradcheck") return cmd_gradcheck(run, out, err);
    if (run.subcommand == "bench") return cmd_bench(run, out, err);
    if (run.subcommand == "rtf") return cmd_rtf(run, out, err);
    if (run.subcommand == "train-toy") return cmd_train_toy(run, out, err);
    if (run.subcommand == "verify-report") return cmd_verify_report(run, out, err);
    err << "error: unknown subcommand '" << run.subcommand << "'\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailure;
  } catch (const Error& e) {
    // Shape and capacity errors at this level come from the inputs given.
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace summix
