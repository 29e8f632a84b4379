#pragma once

// Command implementations behind the CLI binary. Kept as library functions
// so tests can drive the exact same code paths.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "false_al/config.hpp"
#include "false_al/dataset.hpp"
#include "false_al/errors.hpp"
#include "false_al/loop.hpp"
#include "false_al/metrics.hpp"
#include "false_al/results.hpp"

namespace false_al::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  int workers = 0;  // 0: --workers/FALSE_AL_WORKERS/hardware default
  std::optional<std::uint64_t> seed_override;
  bool diagnostic_events = false;
};

namespace detail {

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline int env_workers() {
  const char* env = std::getenv("FALSE_AL_WORKERS");
  if (!env || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    throw ConfigError("FALSE_AL_WORKERS must be a positive integer");
  }
  return static_cast<int>(v);
}

inline std::string sanitize_filename(std::string name) {
  for (char& ch : name) {
    if (ch == ':' || ch == '/' || ch == '\\') ch = '-';
  }
  return name;
}

inline dataset::DatasetBundle load_bundle(const loop::ExperimentConfig& cfg) {
  if (!cfg.dataset_file.empty()) {
    return dataset::ingest(cfg.dataset_file);
  }
  return dataset::generate(cfg.data);
}

}  // namespace detail

// generate: materialize the configured dataset to a delimited-text file.
inline int cmd_generate(const std::string& config_path,
                        const std::string& out_path) {
  const auto cfg = config::ConfigMap::parse_file(config_path);
  cfg.validate_keys(config::known_keys());
  const auto bundle = dataset::generate(config::dataset_config_from(cfg));
  dataset::export_bundle(bundle, out_path);
  std::cout << "wrote " << out_path << " (" << bundle.train_pool.size()
            << " pool, " << bundle.test_id.size() << " test_id, "
            << bundle.test_ood.size() << " ood splits)\n";
  return 0;
}

// run: execute the strategy x seed grid and persist results + manifest.
inline int cmd_run(const RunOptions& options) {
  const auto cfg_map = config::ConfigMap::parse_file(options.config_path);
  auto cfg = config::experiment_config_from(cfg_map);
  if (options.seed_override) {
    cfg.experiment_seed = *options.seed_override;
  }
  if (options.diagnostic_events) {
    cfg.diagnostic_events = true;
  }
  int workers = options.workers;
  if (workers <= 0) workers = detail::env_workers();

  results::Manifest manifest;
  manifest.config_hash = detail::hash_hex(cfg_map.hash());
  manifest.version = std::string(kVersion);
  manifest.started = results::utc_timestamp();

  const auto bundle = detail::load_bundle(cfg);
  cfg.validate(bundle.train_pool.size());  // before any training starts
  std::filesystem::create_directories(options.out_dir);
  const std::string event_dir = cfg.diagnostic_events ? options.out_dir : "";
  const auto grid = loop::run_grid(bundle, cfg, workers, event_dir);

  const std::string results_path = options.out_dir + "/results.csv";
  results::write_results(results_path, grid.records);
  manifest.finished = results::utc_timestamp();
  manifest.cells = grid.cells;
  manifest.results_path = results_path;
  results::write_manifest(options.out_dir + "/manifest.json", manifest);

  int failed = 0;
  for (const auto& cell : grid.cells) {
    if (!cell.completed) {
      ++failed;
      std::cerr << "cell " << cell.strategy << "/seed" << cell.seed
                << " failed: " << cell.error << "\n";
    }
  }
  std::cout << "completed " << (grid.cells.size() - failed) << "/"
            << grid.cells.size() << " cells, " << grid.records.size()
            << " records -> " << results_path << "\n";
  return failed == 0 ? 0 : 1;
}

// report: curves and the AUDC summary table from a results file. Prints the
// aligned table to stdout and writes plot-ready series files to out_dir.
inline int cmd_report(const std::string& results_path,
                      const std::string& out_dir) {
  const auto records = results::read_results(results_path);

  std::set<std::string> strategies;
  std::set<std::string> splits;
  int max_round = 0;
  for (const auto& rec : records) {
    strategies.insert(rec.strategy);
    splits.insert(rec.split);
    max_round = std::max(max_round, rec.round);
  }
  if (strategies.count("random") == 0) {
    throw ConfigError(
        "results contain no 'random' baseline; AUDC is undefined");
  }
  const int rounds_used = std::min(20, max_round);

  std::filesystem::create_directories(out_dir);
  std::vector<metrics::AudcReport> reports;
  for (const auto& split : splits) {
    const auto random_curve = metrics::build_curve(records, "random", split);
    for (const auto& strategy : strategies) {
      const auto curve = metrics::build_curve(records, strategy, split);
      reports.push_back(metrics::audc(curve, random_curve, rounds_used));
      std::ofstream os(out_dir + "/curve_" + strategy + "_" +
                       detail::sanitize_filename(split) + ".csv");
      os << "round,mean_accuracy_pp,std_pp\n";
      char buf[64];
      for (std::size_t n = 0; n < curve.mean_pp.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f", n, curve.mean_pp[n],
                      curve.std_pp[n]);
        os << buf << '\n';
      }
    }
  }

  const auto table = metrics::summary_table(reports);
  std::cout << "AUDC vs random over rounds 1.." << rounds_used
            << " (percentage points, higher is better)\n\n";
  std::cout << metrics::render_aligned(table);
  std::ofstream os(out_dir + "/audc_summary.csv");
  os << metrics::render_delimited(table);
  return 0;
}

}  // namespace false_al::cli
