#include "false_al/loop.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace false_al;
using loop::Experiment;
using loop::ExperimentConfig;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.initial_pool_size = 12;
  cfg.query_batch = 6;
  cfg.rounds = 4;
  cfg.num_seeds = 2;
  cfg.strategy_grid = {strategies::StrategyKind::false_switch,
                       strategies::StrategyKind::random};
  cfg.data.family = dataset::DatasetConfig::Family::gaussian_mixture;
  cfg.data.n_pool = 80;
  cfg.data.n_test = 40;
  cfg.data.num_classes = 2;
  cfg.data.dim = 3;
  cfg.data.class_separation = 4.0;
  cfg.data.seed = 5;
  cfg.data.corruptions = {{dataset::CorruptionKind::additive_noise, 2}};
  cfg.model.hidden_units = 8;
  cfg.model.learning_rate = 0.01;
  cfg.model.train_acc_threshold = 0.98;
  cfg.model.max_epochs = 40;
  cfg.model.batch_size = 8;
  cfg.experiment_seed = 21;
  return cfg;
}

}  // namespace

TEST(Loop, InitialSplitRespectsConfiguredSize) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::random, 0);
  EXPECT_EQ(experiment.pool_state().train_ids.size(), 12u);
  EXPECT_EQ(experiment.pool_state().pool_ids.size(), 68u);
}

TEST(Loop, InitialSplitDependsOnSeedNotStrategy) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment a(bundle, cfg, strategies::StrategyKind::random, 0);
  Experiment b(bundle, cfg, strategies::StrategyKind::coreset, 0);
  Experiment c(bundle, cfg, strategies::StrategyKind::random, 1);
  EXPECT_EQ(a.pool_state().train_ids, b.pool_state().train_ids);
  EXPECT_NE(a.pool_state().train_ids, c.pool_state().train_ids);
}

TEST(Loop, OversizedGridFailsFastAtInit) {
  auto cfg = tiny_config();
  cfg.rounds = 100;  // 12 + 100 * 6 >> 80
  const auto bundle = dataset::generate(cfg.data);
  EXPECT_THROW(Experiment(bundle, cfg, strategies::StrategyKind::random, 0),
               ConfigError);
}

TEST(Loop, RoundsConserveIdsAndGrowTrainSetByBatch) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::false_switch,
                        0);
  std::set<SampleId> universe;
  for (SampleId id : experiment.pool_state().train_ids) universe.insert(id);
  for (SampleId id : experiment.pool_state().pool_ids) universe.insert(id);

  std::vector<std::size_t> train_sizes;
  loop::RoundHooks hooks;
  hooks.on_round_queried = [&](int round, const strategies::QueryBatch& batch,
                               const loop::PoolState& pool) {
    EXPECT_EQ(batch.ids.size(), 6u);
    std::set<SampleId> now;
    for (SampleId id : pool.train_ids) {
      EXPECT_TRUE(now.insert(id).second);
    }
    for (SampleId id : pool.pool_ids) {
      EXPECT_TRUE(now.insert(id).second) << "train/pool overlap";
    }
    EXPECT_EQ(now, universe);
    train_sizes.push_back(pool.train_ids.size());
    (void)round;
  };
  experiment.run(&hooks);
  EXPECT_EQ(train_sizes,
            (std::vector<std::size_t>{18, 24, 30, 36}));
}

TEST(Loop, QueriedIdsNeverReappear) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::entropy, 1);
  std::set<SampleId> queried;
  loop::RoundHooks hooks;
  hooks.on_round_queried = [&](int, const strategies::QueryBatch& batch,
                               const loop::PoolState&) {
    for (SampleId id : batch.ids) {
      EXPECT_TRUE(queried.insert(id).second) << "id " << id << " re-queried";
    }
  };
  experiment.run(&hooks);
  EXPECT_EQ(queried.size(), 4u * 6u);
}

TEST(Loop, RoundStartsFromTheInitialSnapshotEveryTime) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::least_confidence,
                        0);
  int rounds_seen = 0;
  loop::RoundHooks hooks;
  hooks.on_round_start = [&](int round, const learner::MlpClassifier& model,
                             const loop::PoolState&) {
    EXPECT_EQ(model.parameters(), model.initial_snapshot())
        << "round " << round << " did not start from the snapshot";
    ++rounds_seen;
  };
  experiment.run(&hooks);
  EXPECT_EQ(rounds_seen, cfg.rounds + 1);
}

TEST(Loop, EmitsOneRecordPerRoundAndSplit) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::random, 0);
  const auto records = experiment.run();
  // splits: test_id + 1 ood; rounds 0..4
  EXPECT_EQ(records.size(), 2u * 5u);
  for (const auto& rec : records) {
    EXPECT_GE(rec.accuracy, 0.0);
    EXPECT_LE(rec.accuracy, 1.0);
    EXPECT_GE(rec.epochs_run, 1);
  }
}

TEST(Loop, ReplayIsBitIdentical) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  Experiment a(bundle, cfg, strategies::StrategyKind::false_switch, 1);
  Experiment b(bundle, cfg, strategies::StrategyKind::false_switch, 1);
  EXPECT_EQ(a.run(), b.run());
}

TEST(Loop, GridRunsEveryCellAndSortsRecords) {
  const auto cfg = tiny_config();
  const auto bundle = dataset::generate(cfg.data);
  const auto result = loop::run_grid(bundle, cfg, 2);
  EXPECT_TRUE(result.all_completed());
  EXPECT_EQ(result.cells.size(), 4u);  // 2 strategies x 2 seeds
  // 2 strategies x 2 seeds x 5 evaluations x 2 splits
  EXPECT_EQ(result.records.size(), 40u);
  EXPECT_TRUE(std::is_sorted(result.records.begin(), result.records.end(),
                             loop::record_order));
}

TEST(Loop, GridReplayIsDeterministicAcrossWorkerCounts) {
  auto cfg = tiny_config();
  cfg.strategy_grid = {strategies::StrategyKind::false_switch,
                       strategies::StrategyKind::albl,
                       strategies::StrategyKind::coreset};
  const auto bundle = dataset::generate(cfg.data);
  const auto serial = loop::run_grid(bundle, cfg, 1);
  const auto parallel = loop::run_grid(bundle, cfg, 4);
  EXPECT_TRUE(serial.all_completed());
  EXPECT_EQ(serial.records, parallel.records);
}

TEST(Loop, TwoMoonsFamilyRunsEndToEnd) {
  auto cfg = tiny_config();
  cfg.data.family = dataset::DatasetConfig::Family::two_moons_like;
  cfg.data.num_classes = 2;
  cfg.rounds = 2;
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::false_switch,
                        0);
  const auto records = experiment.run();
  EXPECT_EQ(records.size(), 2u * 3u);  // 2 splits x rounds 0..2
}

TEST(Loop, FailingCellsAreReportedAndTheGridStillReturns) {
  auto cfg = tiny_config();
  cfg.model.learning_rate = 1e18;  // saturates the weights after one step
  cfg.model.batch_size = 1;
  cfg.strategy_grid = {strategies::StrategyKind::random};
  cfg.num_seeds = 2;
  const auto bundle = dataset::generate(cfg.data);
  const auto result = loop::run_grid(bundle, cfg, 1);
  EXPECT_EQ(result.cells.size(), 2u);
  EXPECT_FALSE(result.all_completed());
  for (const auto& cell : result.cells) {
    EXPECT_FALSE(cell.completed);
    EXPECT_NE(cell.error.find("non-finite"), std::string::npos);
  }
  EXPECT_TRUE(result.records.empty());
}

TEST(Loop, DiagnosticModeDumpsLedgersPerRound) {
  auto cfg = tiny_config();
  cfg.diagnostic_events = true;
  cfg.rounds = 2;
  const auto bundle = dataset::generate(cfg.data);
  Experiment experiment(bundle, cfg, strategies::StrategyKind::false_switch,
                        0);
  std::ostringstream dump;
  experiment.run(nullptr, &dump);
  const std::string text = dump.str();
  EXPECT_NE(text.find("round,pool_id,switch_count,forget_count"),
            std::string::npos);
  EXPECT_NE(text.find("\n0,"), std::string::npos);
  EXPECT_NE(text.find("\n2,"), std::string::npos);
}
