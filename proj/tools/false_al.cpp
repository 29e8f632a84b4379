// Command-line entry point: generate | run | report.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "false_al/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pool-based active-learning simulator with switch-event, "
               "uncertainty, diversity and bandit query strategies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string results_path;
  false_al::cli::RunOptions run_options;
  long long seed_override = 0;

  auto* generate = app.add_subcommand(
      "generate", "Write the configured dataset to a delimited-text file");
  generate->add_option("--config", config_path, "config file")->required();
  generate->add_option("--out", out_path, "output dataset file")->required();

  auto* run = app.add_subcommand(
      "run", "Execute the strategy x seed experiment grid");
  run->add_option("--config", run_options.config_path, "config file")
      ->required();
  run->add_option("--out", run_options.out_dir, "output directory")
      ->required();
  run->add_option("--workers", run_options.workers,
                  "worker threads (default: FALSE_AL_WORKERS or all cores)");
  auto* seed_opt = run->add_option("--seed", seed_override,
                                   "override experiment.seed");
  run->add_flag("--diagnostic-events", run_options.diagnostic_events,
                "track forgetting events and dump per-round event ledgers");

  auto* report = app.add_subcommand(
      "report", "Emit curves and the AUDC summary table from a results file");
  report->add_option("results", results_path, "results.csv from a run")
      ->required();
  report->add_option("--out", out_path, "output directory for curve files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return false_al::cli::cmd_generate(config_path, out_path);
    }
    if (run->parsed()) {
      if (seed_opt->count() > 0) {
        if (seed_override < 0) {
          throw false_al::ConfigError("--seed must be nonnegative");
        }
        run_options.seed_override =
            static_cast<std::uint64_t>(seed_override);
      }
      return false_al::cli::cmd_run(run_options);
    }
    if (report->parsed()) {
      return false_al::cli::cmd_report(results_path, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
