#pragma once

// Orchestrates active-learning experiments. One round is: reset the learner
// to its initial snapshot, train to the accuracy threshold while the event
// ledger tracks per-epoch pool predictions, evaluate on every test split,
// then query b samples and move them from the pool to the training set. A
// configured run of R query rounds therefore emits R+1 evaluation records
// per split (rounds 0..R, where round 0 is trained on the initial pool
// alone).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "false_al/core.hpp"
#include "false_al/dataset.hpp"
#include "false_al/errors.hpp"
#include "false_al/events.hpp"
#include "false_al/learner.hpp"
#include "false_al/rng.hpp"
#include "false_al/strategies.hpp"

namespace false_al::loop {

// Disjoint partition of the dataset's pool split into labeled training ids
// and unlabeled pool ids. Ids index rows of DatasetBundle::train_pool and
// their union stays constant across rounds.
struct PoolState {
  std::vector<SampleId> train_ids;
  std::vector<SampleId> pool_ids;
};

struct ExperimentConfig {
  int initial_pool_size = 128;
  int query_batch = 1024;
  int rounds = 20;
  int num_seeds = 5;
  std::vector<strategies::StrategyKind> strategy_grid = {
      strategies::StrategyKind::false_switch, strategies::StrategyKind::random};
  dataset::DatasetConfig data;
  std::string dataset_file;  // when set, ingest instead of generating
  // model.init_seed is ignored here: each cell derives it from
  // experiment_seed and its seed index.
  learner::LearnerConfig model;
  bool diagnostic_events = false;
  std::uint64_t experiment_seed = 1;

  void validate(std::size_t pool_size) const {
    if (initial_pool_size < 1) {
      throw ConfigError("loop.initial_pool_size must be >= 1");
    }
    if (query_batch < 1) throw ConfigError("loop.query_batch must be >= 1");
    if (rounds < 1) throw ConfigError("loop.rounds must be >= 1");
    if (num_seeds < 1) throw ConfigError("experiment.seeds must be >= 1");
    if (strategy_grid.empty()) {
      throw ConfigError("experiment.strategies must not be empty");
    }
    const std::size_t needed = static_cast<std::size_t>(initial_pool_size) +
                               static_cast<std::size_t>(rounds) *
                                   static_cast<std::size_t>(query_batch);
    if (needed > pool_size) {
      throw ConfigError(
          "loop.initial_pool_size + loop.rounds * loop.query_batch = " +
          std::to_string(needed) + " exceeds the dataset pool of " +
          std::to_string(pool_size));
    }
  }
};

struct RunRecord {
  std::string strategy;
  int seed = 0;
  int round = 0;
  std::string split;
  double accuracy = 0.0;  // fraction in [0, 1]
  int epochs_run = 0;
  bool reached_threshold = false;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline bool record_order(const RunRecord& a, const RunRecord& b) {
  if (a.strategy != b.strategy) return a.strategy < b.strategy;
  if (a.seed != b.seed) return a.seed < b.seed;
  if (a.round != b.round) return a.round < b.round;
  return a.split < b.split;
}

// Optional probes into the round lifecycle, used by tests and diagnostics.
struct RoundHooks {
  // After the learner reset, before training.
  std::function<void(int round, const learner::MlpClassifier&,
                     const PoolState&)>
      on_round_start;
  // After the query batch is applied (not called for the final round).
  std::function<void(int round, const strategies::QueryBatch&,
                     const PoolState&)>
      on_round_queried;
};

// One grid cell: a single (strategy, seed) run over its own learner and
// pool partition. The dataset bundle is shared read-only.
class Experiment {
 public:
  Experiment(const dataset::DatasetBundle& bundle,
             const ExperimentConfig& config, strategies::StrategyKind kind,
             int seed_index)
      : config_(config), strategy_(kind), seed_index_(seed_index) {
    config_.validate(bundle.train_pool.size());
    config_.model.validate();

    // Initial labeled set: a uniform sample that depends on the seed index
    // but not on the strategy, so strategies compete from identical starts.
    std::vector<SampleId> all_ids(bundle.train_pool.size());
    std::iota(all_ids.begin(), all_ids.end(), 0);
    Rng split_rng(derive_seed(config_.experiment_seed, seed_index_,
                              "init-split"));
    split_rng.partial_shuffle(
        all_ids, static_cast<std::size_t>(config_.initial_pool_size));
    pool_.train_ids.assign(
        all_ids.begin(), all_ids.begin() + config_.initial_pool_size);
    pool_.pool_ids.assign(all_ids.begin() + config_.initial_pool_size,
                          all_ids.end());
    std::sort(pool_.train_ids.begin(), pool_.train_ids.end());
    std::sort(pool_.pool_ids.begin(), pool_.pool_ids.end());

    // Standardization is fitted once on the unlabeled pool at experiment
    // start and reused for every split and round.
    std::vector<dataset::Sample> pool_samples;
    pool_samples.reserve(pool_.pool_ids.size());
    for (SampleId id : pool_.pool_ids) {
      pool_samples.push_back(bundle.train_pool[static_cast<std::size_t>(id)]);
    }
    standardizer_.fit(pool_samples);
    all_x_ = standardizer_.transform(bundle.train_pool);
    all_y_ = learner::labels_of(bundle.train_pool);
    test_x_["test_id"] = standardizer_.transform(bundle.test_id);
    test_y_["test_id"] = learner::labels_of(bundle.test_id);
    for (const auto& [name, split] : bundle.test_ood) {
      test_x_["test_ood:" + name] = standardizer_.transform(split);
      test_y_["test_ood:" + name] = learner::labels_of(split);
    }

    learner::LearnerConfig model_cfg = config_.model;
    model_cfg.init_seed =
        derive_seed(config_.experiment_seed, seed_index_, "learner-init");
    model_.emplace(model_cfg, bundle.dim, bundle.num_classes);
  }

  const PoolState& pool_state() const { return pool_; }
  const learner::MlpClassifier& model() const { return *model_; }

  // Runs rounds 0..rounds and returns the records in emission order, which
  // is already (round, split)-sorted. event_dump, when given, receives one
  // "round,pool_id,switch[,forget]" block per round.
  std::vector<RunRecord> run(const RoundHooks* hooks = nullptr,
                             std::ostream* event_dump = nullptr) {
    std::vector<RunRecord> records;
    const std::string name(strategy_.name());
    if (event_dump) {
      *event_dump << (config_.diagnostic_events
                          ? "round,pool_id,switch_count,forget_count"
                          : "round,pool_id,switch_count")
                  << '\n';
    }

    for (int round = 0; round <= config_.rounds; ++round) {
      model_->reset_to_snapshot();
      if (hooks && hooks->on_round_start) {
        hooks->on_round_start(round, *model_, pool_);
      }

      events::EventLedger ledger(pool_.pool_ids, config_.diagnostic_events);
      const Matrix train_x = gather_rows(all_x_, pool_.train_ids);
      std::vector<int> train_y = gather_labels(pool_.train_ids);
      const Matrix pool_x = gather_rows(all_x_, pool_.pool_ids);
      std::vector<int> pool_y;
      if (config_.diagnostic_events) pool_y = gather_labels(pool_.pool_ids);

      const auto shuffle_seed = derive_seed(config_.experiment_seed, name,
                                            seed_index_, round, "shuffle");
      const auto report = model_->train_until(
          train_x, train_y, pool_x,
          [&](const std::vector<int>& preds) {
            if (config_.diagnostic_events) {
              ledger.record_epoch(preds, pool_y);
            } else {
              ledger.record_epoch(preds);
            }
          },
          shuffle_seed);

      double test_id_accuracy = 0.0;
      for (const auto& [split, x] : test_x_) {
        RunRecord rec;
        rec.strategy = name;
        rec.seed = seed_index_;
        rec.round = round;
        rec.split = split;
        rec.accuracy = model_->accuracy(x, test_y_.at(split));
        rec.epochs_run = report.epochs_run;
        rec.reached_threshold = report.reached_threshold;
        if (split == "test_id") test_id_accuracy = rec.accuracy;
        records.push_back(std::move(rec));
      }
      strategy_.observe_accuracy(test_id_accuracy);

      if (event_dump) {
        std::ostringstream block;
        ledger.dump(block);
        std::istringstream lines(block.str());
        std::string line;
        while (std::getline(lines, line)) {
          *event_dump << round << ',' << line << '\n';
        }
      }

      if (round < config_.rounds) {
        // Query failures leave the partition untouched: ids move only after
        // the strategy returns a valid batch.
        strategies::StrategyContext ctx;
        ctx.pool_ids = pool_.pool_ids;
        ctx.switch_counts = ledger.switch_counts();
        ctx.pool_probs = model_->predict_proba(pool_x);
        ctx.pool_embeddings = model_->embed(pool_x);
        ctx.labeled_embeddings = model_->embed(train_x);
        ctx.round = round;
        ctx.rng_seed = derive_seed(config_.experiment_seed, name, seed_index_,
                                   round, "strategy");
        const auto batch = strategy_.select(ctx, config_.query_batch);
        apply_query(batch);
        if (hooks && hooks->on_round_queried) {
          hooks->on_round_queried(round, batch, pool_);
        }
      }
    }
    return records;
  }

 private:
  std::vector<int> gather_labels(const std::vector<SampleId>& ids) const {
    std::vector<int> y;
    y.reserve(ids.size());
    for (SampleId id : ids) {
      y.push_back(all_y_[static_cast<std::size_t>(id)]);
    }
    return y;
  }

  void apply_query(const strategies::QueryBatch& batch) {
    events::remove_queried(pool_.pool_ids, batch.ids);
    pool_.train_ids.insert(pool_.train_ids.end(), batch.ids.begin(),
                           batch.ids.end());
    std::sort(pool_.train_ids.begin(), pool_.train_ids.end());
  }

  ExperimentConfig config_;
  strategies::Strategy strategy_;
  int seed_index_;
  PoolState pool_;
  learner::Standardizer standardizer_;
  Matrix all_x_;
  std::vector<int> all_y_;
  std::map<std::string, Matrix> test_x_;
  std::map<std::string, std::vector<int>> test_y_;
  std::optional<learner::MlpClassifier> model_;
};

struct CellStatus {
  std::string strategy;
  int seed = 0;
  bool completed = false;
  std::string error;  // empty when completed
};

struct GridResult {
  std::vector<RunRecord> records;  // sorted (strategy, seed, round, split)
  std::vector<CellStatus> cells;   // sorted (strategy, seed)

  bool all_completed() const {
    for (const auto& c : cells) {
      if (!c.completed) return false;
    }
    return true;
  }
};

// Runs the full strategy x seed grid. Cells are independent and may run on
// up to `workers` threads; records are sorted afterwards so the output does
// not depend on scheduling. A failing cell is reported in its status and
// contributes no records; the rest of the grid still completes.
// event_dump_dir, when nonempty, receives one events_<strategy>_s<seed>.csv
// per cell.
inline GridResult run_grid(const dataset::DatasetBundle& bundle,
                           const ExperimentConfig& config, int workers = 0,
                           const std::string& event_dump_dir = "") {
  struct Cell {
    strategies::StrategyKind kind;
    int seed;
  };
  std::vector<Cell> cells;
  for (auto kind : config.strategy_grid) {
    for (int seed = 0; seed < config.num_seeds; ++seed) {
      cells.push_back({kind, seed});
    }
  }

  GridResult result;
  result.cells.resize(cells.size());
  std::mutex sink;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const auto& cell = cells[i];
      CellStatus status;
      status.strategy = std::string(strategies::strategy_name(cell.kind));
      status.seed = cell.seed;
      std::vector<RunRecord> records;
      try {
        Experiment experiment(bundle, config, cell.kind, cell.seed);
        std::ofstream dump;
        if (!event_dump_dir.empty()) {
          dump.open(event_dump_dir + "/events_" + status.strategy + "_s" +
                    std::to_string(cell.seed) + ".csv");
        }
        records = experiment.run(nullptr, dump.is_open() ? &dump : nullptr);
        status.completed = true;
      } catch (const std::exception& e) {
        status.completed = false;
        status.error = e.what();
        records.clear();
      }
      std::lock_guard<std::mutex> lock(sink);
      result.cells[i] = std::move(status);
      result.records.insert(result.records.end(), records.begin(),
                            records.end());
    }
  };

  std::size_t n_workers = workers > 0
                              ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::sort(result.records.begin(), result.records.end(), record_order);
  std::sort(result.cells.begin(), result.cells.end(),
            [](const CellStatus& a, const CellStatus& b) {
              if (a.strategy != b.strategy) return a.strategy < b.strategy;
              return a.seed < b.seed;
            });
  return result;
}

}  // namespace false_al::loop
