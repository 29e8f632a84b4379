#include "false_al/dataset.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace false_al;
using dataset::CorruptionKind;
using dataset::CorruptionSpec;
using dataset::DatasetConfig;

namespace {

DatasetConfig base_config() {
  DatasetConfig cfg;
  cfg.family = DatasetConfig::Family::gaussian_mixture;
  cfg.n_pool = 100;
  cfg.n_test = 40;
  cfg.num_classes = 2;
  cfg.dim = 2;
  cfg.class_separation = 4.0;
  cfg.seed = 7;
  return cfg;
}

// Closed-form least-squares linear classifier: fit w over [x; 1] to targets
// +-1 via the normal equations and classify by sign. Independent of the MLP.
double linear_fit_accuracy(const std::vector<dataset::Sample>& samples) {
  const std::size_t d = samples.front().features.size() + 1;
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (const auto& s : samples) {
    std::vector<double> x(s.features);
    x.push_back(1.0);
    const double target = s.label == 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i][j] += x[i] * x[j];
      a[i][d] += x[i] * target;
    }
  }
  // Gaussian elimination with partial pivoting
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || a[col][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= d; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<double> w(d);
  for (std::size_t i = 0; i < d; ++i) w[i] = a[i][d] / a[i][i];

  std::size_t correct = 0;
  for (const auto& s : samples) {
    double z = w[d - 1];
    for (std::size_t i = 0; i + 1 < d; ++i) z += w[i] * s.features[i];
    const int pred = z < 0.0 ? 0 : 1;
    if (pred == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace

TEST(Dataset, GenerateIsDeterministic) {
  const auto cfg = base_config();
  EXPECT_EQ(dataset::generate(cfg), dataset::generate(cfg));
}

TEST(Dataset, TwoClassPoolOf100IsPerfectlyBalanced) {
  const auto bundle = dataset::generate(base_config());
  int counts[2] = {0, 0};
  for (const auto& s : bundle.train_pool) ++counts[s.label];
  EXPECT_EQ(counts[0], 50);
  EXPECT_EQ(counts[1], 50);
}

TEST(Dataset, BalanceWithinOneForUnevenSplits) {
  auto cfg = base_config();
  cfg.num_classes = 3;
  cfg.n_pool = 100;
  cfg.n_test = 41;
  const auto bundle = dataset::generate(cfg);
  for (const auto* split : {&bundle.train_pool, &bundle.test_id}) {
    std::vector<int> counts(3, 0);
    for (const auto& s : *split) ++counts[static_cast<std::size_t>(s.label)];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    EXPECT_LE(*hi - *lo, 1);
  }
}

TEST(Dataset, WellSeparatedMixtureIsLinearlySeparable) {
  auto cfg = base_config();
  cfg.n_pool = 200;
  cfg.class_separation = 10.0;
  const auto bundle = dataset::generate(cfg);
  EXPECT_GT(linear_fit_accuracy(bundle.train_pool), 0.99);
}

TEST(Dataset, TwoMoonsRequiresTwoClasses) {
  auto cfg = base_config();
  cfg.family = DatasetConfig::Family::two_moons_like;
  cfg.num_classes = 3;
  EXPECT_THROW(dataset::generate(cfg), ConfigError);
  cfg.num_classes = 2;
  EXPECT_EQ(dataset::generate(cfg).train_pool.size(), 100u);
}

TEST(Dataset, InvalidConfigNamesOffendingField) {
  auto cfg = base_config();
  cfg.n_pool = 1;
  try {
    dataset::generate(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("n_pool"), std::string::npos);
  }
}

TEST(Dataset, SplitsShareNoSamples) {
  const auto bundle = dataset::generate(base_config());
  for (const auto& p : bundle.train_pool) {
    for (const auto& t : bundle.test_id) {
      EXPECT_NE(p.features, t.features);
    }
  }
}

TEST(Corrupt, LevelZeroIsIdentityForEveryKind) {
  const auto bundle = dataset::generate(base_config());
  for (auto kind : {CorruptionKind::additive_noise, CorruptionKind::affine_warp,
                    CorruptionKind::quantize}) {
    const auto out = dataset::corrupt(bundle.test_id, {kind, 0}, 99);
    EXPECT_EQ(out, bundle.test_id);
  }
}

TEST(Corrupt, PreservesLabelsAndLength) {
  const auto bundle = dataset::generate(base_config());
  for (auto kind : {CorruptionKind::additive_noise, CorruptionKind::affine_warp,
                    CorruptionKind::quantize}) {
    for (int level : {1, 3, 5}) {
      const auto out = dataset::corrupt(bundle.test_id, {kind, level}, 3);
      ASSERT_EQ(out.size(), bundle.test_id.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(out[i].label, bundle.test_id[i].label);
        EXPECT_EQ(out[i].features.size(), bundle.test_id[i].features.size());
      }
    }
  }
}

TEST(Corrupt, DeterministicInSpecAndSeed) {
  const auto bundle = dataset::generate(base_config());
  const CorruptionSpec spec{CorruptionKind::additive_noise, 3};
  EXPECT_EQ(dataset::corrupt(bundle.test_id, spec, 5),
            dataset::corrupt(bundle.test_id, spec, 5));
  EXPECT_NE(dataset::corrupt(bundle.test_id, spec, 5),
            dataset::corrupt(bundle.test_id, spec, 6));
}

TEST(Corrupt, NoiseDisplacementGrowsWithLevel) {
  auto cfg = base_config();
  cfg.n_pool = 1000;
  const auto bundle = dataset::generate(cfg);

  auto mean_l2 = [&](int level) {
    const auto out = dataset::corrupt(
        bundle.train_pool, {CorruptionKind::additive_noise, level}, 11);
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      double sq = 0.0;
      for (std::size_t d = 0; d < out[i].features.size(); ++d) {
        const double diff =
            out[i].features[d] - bundle.train_pool[i].features[d];
        sq += diff * diff;
      }
      total += std::sqrt(sq);
    }
    return total / static_cast<double>(out.size());
  };

  EXPECT_LT(mean_l2(2), mean_l2(5));
}

TEST(Corrupt, QuantizeSnapsToBinCenters) {
  const auto bundle = dataset::generate(base_config());
  const int level = 4;
  const auto out =
      dataset::corrupt(bundle.test_id, {CorruptionKind::quantize, level}, 1);

  const double bins = std::pow(2.0, 8 - level);
  const std::size_t dim = bundle.test_id.front().features.size();
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = bundle.test_id.front().features[d];
    double hi = lo;
    for (const auto& s : bundle.test_id) {
      lo = std::min(lo, s.features[d]);
      hi = std::max(hi, s.features[d]);
    }
    const double width = (hi - lo) / bins;
    for (const auto& s : out) {
      const double offset = (s.features[d] - lo) / width - 0.5;
      const double nearest = std::round(offset);
      ASSERT_LT(std::abs(offset - nearest), 1e-9);
      ASSERT_GE(nearest, 0.0);
      ASSERT_LT(nearest, bins);
    }
  }
}

TEST(Corrupt, QuantizeBeyondLevelEightCollapsesToOneBin) {
  const auto bundle = dataset::generate(base_config());
  const auto out =
      dataset::corrupt(bundle.test_id, {CorruptionKind::quantize, 12}, 1);
  const std::size_t dim = bundle.test_id.front().features.size();
  for (std::size_t d = 0; d < dim; ++d) {
    for (const auto& s : out) {
      EXPECT_DOUBLE_EQ(s.features[d], out.front().features[d]);
    }
  }
}

TEST(Dataset, TwoMoonsIsBalancedAndDeterministic) {
  auto cfg = base_config();
  cfg.family = DatasetConfig::Family::two_moons_like;
  cfg.n_pool = 101;
  cfg.dim = 4;
  const auto bundle = dataset::generate(cfg);
  EXPECT_EQ(bundle, dataset::generate(cfg));
  int counts[2] = {0, 0};
  for (const auto& s : bundle.train_pool) ++counts[s.label];
  EXPECT_LE(std::abs(counts[0] - counts[1]), 1);
  for (const auto& s : bundle.train_pool) {
    EXPECT_EQ(s.features.size(), 4u);
    for (double f : s.features) EXPECT_TRUE(std::isfinite(f));
  }
}

TEST(Corrupt, EmptyInputIsAnError) {
  EXPECT_THROW(
      dataset::corrupt({}, {CorruptionKind::additive_noise, 2}, 1),
      ConfigError);
}

TEST(Ingest, InfersClassCountFromLabels) {
  std::istringstream file(
      "pool\n"
      "pool,0.5,1.5,0\n"
      "pool,0.25,-1,1\n"
      "pool,2,3,0\n");
  const auto bundle = dataset::ingest(file);
  EXPECT_EQ(bundle.num_classes, 2);
  EXPECT_EQ(bundle.dim, 2);
  EXPECT_EQ(bundle.train_pool.size(), 3u);
}

TEST(Ingest, WrongArityReportsLineNumber) {
  std::istringstream file(
      "pool\n"
      "pool,0.5,1.5,0\n"
      "pool,0.25,1\n");
  try {
    dataset::ingest(file);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("schema"), std::string::npos);
  }
}

TEST(Ingest, MalformedFeatureReportsLineNumber) {
  std::istringstream file(
      "pool\n"
      "pool,0.5,oops,0\n");
  try {
    dataset::ingest(file);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Ingest, UndeclaredTagIsRejected) {
  std::istringstream file(
      "pool\n"
      "test_id,0.5,1.0,0\n");
  EXPECT_THROW(dataset::ingest(file), ParseError);
}

TEST(Ingest, ExportRoundTripsExactly) {
  auto cfg = base_config();
  cfg.corruptions = {{CorruptionKind::additive_noise, 2},
                     {CorruptionKind::quantize, 5}};
  const auto bundle = dataset::generate(cfg);
  std::stringstream buffer;
  dataset::export_bundle(bundle, buffer);
  EXPECT_EQ(dataset::ingest(buffer), bundle);
}
