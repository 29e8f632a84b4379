#pragma once

// Per-round event ledgers over the unlabeled pool. A switch event is a
// change of the predicted label between two subsequent epochs; it needs no
// ground truth. A forgetting event is a correct-to-incorrect transition and
// is only available in diagnostic mode, where the caller supplies the hidden
// labels. Counters reset at every round; the first epoch of a round produces
// no events because it has no predecessor snapshot.

#include <algorithm>
#include <map>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "false_al/core.hpp"
#include "false_al/errors.hpp"

namespace false_al::events {

class EventLedger {
 public:
  EventLedger(std::vector<SampleId> pool_ids, bool diagnostic)
      : pool_ids_(std::move(pool_ids)), diagnostic_(diagnostic) {
    if (pool_ids_.empty()) {
      throw StateError("ledger: empty pool");
    }
    std::unordered_set<SampleId> seen;
    for (SampleId id : pool_ids_) {
      if (!seen.insert(id).second) {
        throw StateError("ledger: duplicate pool id " + std::to_string(id));
      }
    }
    switch_counts_.assign(pool_ids_.size(), 0);
    if (diagnostic_) {
      forget_counts_.assign(pool_ids_.size(), 0);
      prev_correct_.assign(pool_ids_.size(), 0);
    }
  }

  bool diagnostic() const { return diagnostic_; }
  int epochs_seen() const { return epochs_seen_; }
  const std::vector<SampleId>& pool_ids() const { return pool_ids_; }

  void record_epoch(const std::vector<int>& predictions) {
    if (diagnostic_) {
      throw StateError("ledger: diagnostic mode requires labels");
    }
    record(predictions, nullptr);
  }

  void record_epoch(const std::vector<int>& predictions,
                    const std::vector<int>& labels) {
    if (!diagnostic_) {
      throw StateError("ledger: labels passed outside diagnostic mode");
    }
    if (labels.size() != pool_ids_.size()) {
      throw ShapeError("ledger: label count does not match pool");
    }
    record(predictions, &labels);
  }

  // Switch counts aligned with pool_ids().
  const std::vector<int>& switch_counts() const { return switch_counts_; }

  const std::vector<int>& forget_counts() const {
    if (!diagnostic_) {
      throw StateError("ledger: forget counts only exist in diagnostic mode");
    }
    return forget_counts_;
  }

  // Snapshot of the cumulative per-sample switch counts for this round.
  std::map<SampleId, int> counts() const {
    std::map<SampleId, int> out;
    for (std::size_t i = 0; i < pool_ids_.size(); ++i) {
      out[pool_ids_[i]] = switch_counts_[i];
    }
    return out;
  }

  // One row per pool sample: pool_id,switch_count[,forget_count].
  void dump(std::ostream& os) const {
    for (std::size_t i = 0; i < pool_ids_.size(); ++i) {
      os << pool_ids_[i] << ',' << switch_counts_[i];
      if (diagnostic_) os << ',' << forget_counts_[i];
      os << '\n';
    }
  }

 private:
  void record(const std::vector<int>& predictions,
              const std::vector<int>* labels) {
    if (predictions.size() != pool_ids_.size()) {
      throw ShapeError("ledger: prediction count does not match pool");
    }
    ++epochs_seen_;
    const bool has_prev = epochs_seen_ >= 2;
    for (std::size_t i = 0; i < pool_ids_.size(); ++i) {
      if (has_prev && predictions[i] != prev_predictions_[i]) {
        ++switch_counts_[i];
      }
      if (labels) {
        const int correct = predictions[i] == (*labels)[i] ? 1 : 0;
        if (has_prev && correct < prev_correct_[i]) {
          ++forget_counts_[i];
        }
        prev_correct_[i] = correct;
      }
    }
    prev_predictions_ = predictions;
  }

  std::vector<SampleId> pool_ids_;
  bool diagnostic_;
  std::vector<int> prev_predictions_;
  std::vector<int> prev_correct_;
  std::vector<int> switch_counts_;
  std::vector<int> forget_counts_;
  int epochs_seen_ = 0;
};

inline EventLedger new_round(std::vector<SampleId> pool_ids, bool diagnostic) {
  return EventLedger(std::move(pool_ids), diagnostic);
}

// Removes a queried batch from the id list, so the next round's ledger (and
// pool views) exclude it. The batch must be a subset of the current ids.
inline void remove_queried(std::vector<SampleId>& pool_ids,
                           const std::vector<SampleId>& queried) {
  std::unordered_set<SampleId> current(pool_ids.begin(), pool_ids.end());
  for (SampleId id : queried) {
    if (current.count(id) == 0) {
      throw StateError("remove_queried: id " + std::to_string(id) +
                       " is not in the pool");
    }
  }
  std::unordered_set<SampleId> gone(queried.begin(), queried.end());
  pool_ids.erase(std::remove_if(pool_ids.begin(), pool_ids.end(),
                                [&](SampleId id) { return gone.count(id) > 0; }),
                 pool_ids.end());
}

}  // namespace false_al::events
