// summix: verification, benchmarking and toy training driver.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "summix/cli/commands.hpp"
#include "summix/numcore/error.hpp"

namespace {

using summix::RunConfig;

void add_common(CLI::App* sub, RunConfig& run, std::string& grid) {
  sub->add_option("--config", run.config_paths, "encoder config JSON (repeatable)");
  sub->add_option("--preset", run.presets, "named preset (repeatable)");
  sub->add_option("--seed", run.seed, "random seed; SUMMIX_SEED overrides");
  sub->add_option("--out", run.out_dir, "output directory");
  sub->add_option("--l-grid", grid, "durations in seconds, comma separated");
  sub->add_option("--repeats", run.repeats, "timed repeats per point");
  sub->add_option("--warmup", run.warmup, "discarded warm-up iterations");
  sub->add_option("--threads", run.threads, "compute threads");
  sub->add_option("--precision", run.precision, "f32 or f64");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"summix: SummaryMixing verification, benchmarks and toy training"};
  app.require_subcommand(1);
  RunConfig run;
  std::string grid;

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of every mixer, block and loss");
  add_common(gradcheck, run, grid);
  gradcheck->add_option("--filter", run.filter, "run only checks whose name contains this");
  gradcheck->add_flag("--corrupt-gradient", run.corrupt_gradient, "skew analytic gradients (negative control)");

  auto* bench = app.add_subcommand("bench", "training-step timing and cost sweep");
  add_common(bench, run, grid);

  auto* rtf = app.add_subcommand("rtf", "real-time factor sweep");
  add_common(rtf, run, grid);
  rtf->add_option("--checkpoint", run.checkpoint, "decode with parameters from a train-toy checkpoint");

  auto* train = app.add_subcommand("train-toy", "CTC training on the synthetic copy task");
  add_common(train, run, grid);
  train->add_option("--steps", run.steps, "optimizer steps");
  train->add_option("--batch", run.batch, "utterances per step");
  train->add_option("--lr", run.learning_rate, "fixed step size");
  train->add_option("--optimizer", run.optimizer, "sgd or adam");

  auto* verify = app.add_subcommand("verify-report", "re-parse a bench or rtf report and refit its exponents");
  add_common(verify, run, grid);
  verify->add_option("--report", run.report, "report JSON (defaults to --config)");
  verify->add_option("--csv", run.csv, "report CSV (defaults to the JSON path with .csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return summix::kExitUsage;
  }

  run.subcommand = app.get_subcommands().front()->get_name();
  try {
    if (!grid.empty()) run.l_grid = summix::parse_grid(grid);
    if (const char* env = std::getenv("SUMMIX_SEED")) {
      std::size_t used = 0;
      const std::string s = env;
      run.seed = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    }
  } catch (const summix::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return summix::kExitUsage;
  } catch (const std::logic_error&) {
    std::cerr << "error: SUMMIX_SEED must be an unsigned integer\n";
    return summix::kExitUsage;
  }
  return summix::run_command(run, std::cout, std::cerr);
}
