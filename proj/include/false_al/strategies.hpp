#pragma once

// The six acquisition policies. Every strategy maps round artifacts (switch
// counts, class probabilities, embeddings) to a batch of b distinct pool
// ids. Ties are always broken by ascending pool id, so a fixed context and
// seed give a fixed batch.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "false_al/core.hpp"
#include "false_al/errors.hpp"
#include "false_al/rng.hpp"

namespace false_al::strategies {

struct QueryBatch {
  std::vector<SampleId> ids;
  // Acquisition score per id, aligned with ids; empty when the strategy has
  // no natural score (random, albl delegation keeps the arm's scores).
  std::vector<double> scores;
};

// Read-only inputs for one round of querying. All vectors and matrix rows
// are aligned on the same pool id order. Labels are deliberately absent.
struct StrategyContext {
  std::vector<SampleId> pool_ids;
  std::vector<int> switch_counts;
  Matrix pool_probs;
  Matrix pool_embeddings;
  Matrix labeled_embeddings;
  int round = 0;
  std::uint64_t rng_seed = 0;
};

namespace detail {

inline void check_batch_size(std::size_t pool, int b) {
  if (b <= 0) {
    throw ConfigError("query batch must be positive, got an empty batch");
  }
  if (static_cast<std::size_t>(b) > pool) {
    throw ConfigError("query batch " + std::to_string(b) +
                      " exceeds pool size " + std::to_string(pool));
  }
}

}  // namespace detail

// The b highest-scoring ids; equal scores fall back to ascending id.
inline QueryBatch select_top_b(const std::vector<SampleId>& ids,
                               const std::vector<double>& scores, int b) {
  if (ids.size() != scores.size()) {
    throw ShapeError("select_top_b: ids and scores are misaligned");
  }
  detail::check_batch_size(ids.size(), b);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (scores[a] != scores[c]) return scores[a] > scores[c];
    return ids[a] < ids[c];
  });
  QueryBatch batch;
  batch.ids.reserve(static_cast<std::size_t>(b));
  batch.scores.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    batch.ids.push_back(ids[order[static_cast<std::size_t>(i)]]);
    batch.scores.push_back(scores[order[static_cast<std::size_t>(i)]]);
  }
  return batch;
}

// Shannon entropy -sum p ln p per row (natural log, 0 ln 0 = 0).
inline std::vector<double> entropy_scores(const Matrix& probs) {
  std::vector<double> scores(probs.rows, 0.0);
  for (std::size_t r = 0; r < probs.rows; ++r) {
    double e = 0.0;
    for (std::size_t c = 0; c < probs.cols; ++c) {
      const double p = probs.at(r, c);
      if (p > 0.0) e -= p * std::log(p);
    }
    scores[r] = e;
  }
  return scores;
}

// 1 - max_c p(c|x) per row.
inline std::vector<double> least_confidence_scores(const Matrix& probs) {
  std::vector<double> scores(probs.rows, 0.0);
  for (std::size_t r = 0; r < probs.rows; ++r) {
    double best = 0.0;
    for (std::size_t c = 0; c < probs.cols; ++c) {
      best = std::max(best, probs.at(r, c));
    }
    scores[r] = 1.0 - best;
  }
  return scores;
}

// Queries the b pool samples with the most prediction switches accumulated
// over the round's epochs.
inline QueryBatch select_false(const StrategyContext& ctx, int b) {
  if (ctx.switch_counts.size() != ctx.pool_ids.size()) {
    throw ShapeError("select_false: switch counts misaligned with pool");
  }
  std::vector<double> scores(ctx.switch_counts.begin(),
                             ctx.switch_counts.end());
  return select_top_b(ctx.pool_ids, scores, b);
}

// Uniform sample without replacement from the round's strategy stream.
inline QueryBatch select_random(const StrategyContext& ctx, int b) {
  detail::check_batch_size(ctx.pool_ids.size(), b);
  std::vector<SampleId> ids = ctx.pool_ids;
  Rng rng(derive_seed(ctx.rng_seed, "random"));
  rng.partial_shuffle(ids, static_cast<std::size_t>(b));
  QueryBatch batch;
  batch.ids.assign(ids.begin(), ids.begin() + b);
  return batch;
}

inline QueryBatch select_entropy(const StrategyContext& ctx, int b) {
  if (ctx.pool_probs.rows != ctx.pool_ids.size()) {
    throw ShapeError("select_entropy: probabilities misaligned with pool");
  }
  return select_top_b(ctx.pool_ids, entropy_scores(ctx.pool_probs), b);
}

inline QueryBatch select_least_confidence(const StrategyContext& ctx, int b) {
  if (ctx.pool_probs.rows != ctx.pool_ids.size()) {
    throw ShapeError(
        "select_least_confidence: probabilities misaligned with pool");
  }
  return select_top_b(ctx.pool_ids, least_confidence_scores(ctx.pool_probs),
                      b);
}

// Greedy k-center in embedding space: repeatedly take the pool point whose
// distance to the nearest covered point (labeled set plus previous picks)
// is largest.
inline QueryBatch select_coreset(const StrategyContext& ctx, int b) {
  const std::size_t n = ctx.pool_ids.size();
  detail::check_batch_size(n, b);
  if (ctx.pool_embeddings.rows != n) {
    throw ShapeError("select_coreset: embeddings misaligned with pool");
  }
  if (ctx.labeled_embeddings.rows == 0) {
    throw ConfigError("select_coreset: labeled set is empty");
  }
  if (ctx.labeled_embeddings.cols != ctx.pool_embeddings.cols) {
    throw ShapeError("select_coreset: embedding widths differ");
  }

  const std::size_t width = ctx.pool_embeddings.cols;
  auto distance = [&](std::span<const double> a, std::span<const double> c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      const double diff = a[i] - c[i];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };

  // distance from each pool point to its nearest covered point
  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = distance(ctx.pool_embeddings.row(i),
                           ctx.labeled_embeddings.row(0));
    for (std::size_t l = 1; l < ctx.labeled_embeddings.rows; ++l) {
      best = std::min(best, distance(ctx.pool_embeddings.row(i),
                                     ctx.labeled_embeddings.row(l)));
    }
    min_dist[i] = best;
  }

  QueryBatch batch;
  std::vector<bool> taken(n, false);
  for (int pick = 0; pick < b; ++pick) {
    std::size_t best_idx = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best_idx == n || min_dist[i] > min_dist[best_idx] ||
          (min_dist[i] == min_dist[best_idx] &&
           ctx.pool_ids[i] < ctx.pool_ids[best_idx])) {
        best_idx = i;
      }
    }
    taken[best_idx] = true;
    batch.ids.push_back(ctx.pool_ids[best_idx]);
    batch.scores.push_back(min_dist[best_idx]);
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i],
                             distance(ctx.pool_embeddings.row(i),
                                      ctx.pool_embeddings.row(best_idx)));
    }
  }
  return batch;
}

enum class AlblArm { coreset, least_confidence };

// Two-arm EXP3 over {coreset, least-confidence}. Each round an arm is drawn
// from the exponential-weights distribution mixed with gamma-uniform
// exploration; after the round's evaluation the drawn arm receives an
// importance-weighted reward in [0, 1].
class AlblBandit {
 public:
  AlblBandit()
      : AlblBandit({AlblArm::coreset, AlblArm::least_confidence}) {}

  explicit AlblBandit(std::vector<AlblArm> arms) : arms_(std::move(arms)) {
    if (arms_.empty()) {
      throw ConfigError("albl: at least one arm is required");
    }
    weights_.assign(arms_.size(), 1.0);
  }

  static constexpr double kGamma = 0.1;

  std::size_t num_arms() const { return arms_.size(); }
  AlblArm arm(std::size_t i) const { return arms_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  bool has_pending() const { return pending_; }

  std::vector<double> probabilities() const {
    const double total =
        std::accumulate(weights_.begin(), weights_.end(), 0.0);
    std::vector<double> probs(weights_.size());
    const double k = static_cast<double>(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      probs[i] = (1.0 - kGamma) * weights_[i] / total + kGamma / k;
    }
    return probs;
  }

  std::size_t draw(Rng& rng) {
    const auto probs = probabilities();
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t chosen = probs.size() - 1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) {
        chosen = i;
        break;
      }
    }
    last_arm_ = chosen;
    last_prob_ = probs[chosen];
    pending_ = true;
    return chosen;
  }

  // reward must already be clipped to [0, 1].
  void update(double reward) {
    if (!pending_) {
      throw StateError("albl: update without a pending draw");
    }
    const double k = static_cast<double>(weights_.size());
    weights_[last_arm_] *= std::exp(kGamma * (reward / last_prob_) / k);
    pending_ = false;
  }

 private:
  std::vector<AlblArm> arms_;
  std::vector<double> weights_;
  std::size_t last_arm_ = 0;
  double last_prob_ = 1.0;
  bool pending_ = false;
};

inline QueryBatch select_albl(const StrategyContext& ctx, int b,
                              AlblBandit& bandit) {
  Rng rng(derive_seed(ctx.rng_seed, "albl-arm"));
  const std::size_t idx = bandit.draw(rng);
  switch (bandit.arm(idx)) {
    case AlblArm::coreset:
      return select_coreset(ctx, b);
    case AlblArm::least_confidence:
      return select_least_confidence(ctx, b);
  }
  throw StateError("albl: unknown arm");
}

enum class StrategyKind {
  false_switch,  // published name "false": query by switch-event counts
  random,
  entropy,
  least_confidence,
  coreset,
  albl,
};

inline constexpr std::array<StrategyKind, 6> kAllStrategies = {
    StrategyKind::false_switch, StrategyKind::random,
    StrategyKind::entropy,      StrategyKind::least_confidence,
    StrategyKind::coreset,      StrategyKind::albl,
};

inline std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::false_switch: return "false";
    case StrategyKind::random: return "random";
    case StrategyKind::entropy: return "entropy";
    case StrategyKind::least_confidence: return "least_confidence";
    case StrategyKind::coreset: return "coreset";
    case StrategyKind::albl: return "albl";
  }
  throw StateError("unknown strategy kind");
}

inline StrategyKind parse_strategy(std::string_view name) {
  for (StrategyKind kind : kAllStrategies) {
    if (strategy_name(kind) == name) return kind;
  }
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected one of: false, random, entropy, "
                    "least_confidence, coreset, albl)");
}

// Stateful wrapper used by the experiment loop. Stateless strategies just
// dispatch; albl keeps its bandit weights across rounds and turns the
// round-over-round test accuracy delta into the EXP3 reward.
class Strategy {
 public:
  explicit Strategy(StrategyKind kind) : kind_(kind) {}

  StrategyKind kind() const { return kind_; }
  std::string_view name() const { return strategy_name(kind_); }

  QueryBatch select(const StrategyContext& ctx, int b) {
    switch (kind_) {
      case StrategyKind::false_switch: return select_false(ctx, b);
      case StrategyKind::random: return select_random(ctx, b);
      case StrategyKind::entropy: return select_entropy(ctx, b);
      case StrategyKind::least_confidence:
        return select_least_confidence(ctx, b);
      case StrategyKind::coreset: return select_coreset(ctx, b);
      case StrategyKind::albl: return select_albl(ctx, b, bandit_);
    }
    throw StateError("unknown strategy kind");
  }

  // Called once per round with the in-distribution test accuracy (fraction
  // in [0, 1]) after evaluation. Feeds the albl reward; no-op otherwise.
  void observe_accuracy(double accuracy) {
    if (kind_ == StrategyKind::albl && bandit_.has_pending() &&
        has_prev_accuracy_) {
      const double delta = accuracy - prev_accuracy_;
      bandit_.update(std::clamp((delta + 1.0) / 2.0, 0.0, 1.0));
    }
    prev_accuracy_ = accuracy;
    has_prev_accuracy_ = true;
  }

  const AlblBandit& bandit() const { return bandit_; }

 private:
  StrategyKind kind_;
  AlblBandit bandit_;
  double prev_accuracy_ = 0.0;
  bool has_prev_accuracy_ = false;
};

}  // namespace false_al::strategies
