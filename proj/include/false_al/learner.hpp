#pragma once

// A small fully deterministic classifier: one hidden ReLU layer, softmax
// cross-entropy output, trained with mini-batch Adam until a training
// accuracy threshold is reached. Exposes class probabilities, hidden-layer
// embeddings and an analytic-vs-finite-difference gradient check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "false_al/core.hpp"
#include "false_al/dataset.hpp"
#include "false_al/errors.hpp"
#include "false_al/rng.hpp"

namespace false_al::learner {

struct LearnerConfig {
  int hidden_units = 16;
  double learning_rate = 1e-4;
  double train_acc_threshold = 0.98;
  int max_epochs = 200;
  int batch_size = 32;
  std::uint64_t init_seed = 0;

  void validate() const {
    if (hidden_units < 1) throw ConfigError("learner.hidden_units must be >= 1");
    if (!(learning_rate > 0.0)) {
      throw ConfigError("learner.learning_rate must be > 0");
    }
    if (!(train_acc_threshold > 0.0) || train_acc_threshold > 1.0) {
      throw ConfigError("learner.train_acc_threshold must be in (0, 1]");
    }
    if (max_epochs < 1) throw ConfigError("learner.max_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("learner.batch_size must be >= 1");
  }
};

struct TrainReport {
  int epochs_run = 0;
  double final_train_accuracy = 0.0;
  bool reached_threshold = false;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

// Per-dimension z-score fitted once on the unlabeled pool at experiment
// start and applied unchanged to every split thereafter.
class Standardizer {
 public:
  void fit(const std::vector<dataset::Sample>& samples) {
    if (samples.empty()) {
      throw ConfigError("standardizer: empty fit set");
    }
    const std::size_t dim = samples.front().features.size();
    mean_.assign(dim, 0.0);
    scale_.assign(dim, 1.0);
    for (const auto& s : samples) {
      for (std::size_t d = 0; d < dim; ++d) mean_[d] += s.features[d];
    }
    for (auto& m : mean_) m /= static_cast<double>(samples.size());
    std::vector<double> var(dim, 0.0);
    for (const auto& s : samples) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = s.features[d] - mean_[d];
        var[d] += diff * diff;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / static_cast<double>(samples.size()));
      scale_[d] = sd > 1e-12 ? sd : 1.0;
    }
  }

  bool fitted() const { return !mean_.empty(); }

  Matrix transform(const std::vector<dataset::Sample>& samples) const {
    Matrix x(samples.size(), mean_.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
      if (samples[r].features.size() != mean_.size()) {
        throw ShapeError("standardizer: sample dimension mismatch");
      }
      for (std::size_t d = 0; d < mean_.size(); ++d) {
        x.at(r, d) = (samples[r].features[d] - mean_[d]) / scale_[d];
      }
    }
    return x;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

inline std::vector<int> labels_of(const std::vector<dataset::Sample>& samples) {
  std::vector<int> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(s.label);
  return y;
}

class MlpClassifier {
 public:
  using EpochCallback = std::function<void(const std::vector<int>&)>;

  // Parameters are drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)],
  // fixed by config.init_seed. The initial parameter vector is kept as an
  // immutable snapshot for warm-start-free retraining.
  MlpClassifier(const LearnerConfig& config, int dim, int num_classes)
      : config_(config), dim_(dim), classes_(num_classes) {
    config_.validate();
    if (dim < 1) throw ConfigError("learner input dimension must be >= 1");
    if (num_classes < 1) throw ConfigError("learner class count must be >= 1");
    const int h = config_.hidden_units;
    w1_off_ = 0;
    b1_off_ = dim * h;
    w2_off_ = b1_off_ + h;
    b2_off_ = w2_off_ + h * num_classes;
    params_.resize(static_cast<std::size_t>(b2_off_ + num_classes));

    Rng rng(config_.init_seed);
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(dim));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (int i = w1_off_; i < w2_off_; ++i) {
      params_[static_cast<std::size_t>(i)] = rng.uniform(-bound1, bound1);
    }
    for (std::size_t i = static_cast<std::size_t>(w2_off_); i < params_.size();
         ++i) {
      params_[i] = rng.uniform(-bound2, bound2);
    }
    snapshot_ = params_;
    reset_adam();
  }

  int dim() const { return dim_; }
  int num_classes() const { return classes_; }
  const LearnerConfig& config() const { return config_; }
  const std::vector<double>& parameters() const { return params_; }
  const std::vector<double>& initial_snapshot() const { return snapshot_; }

  void set_parameters(const std::vector<double>& p) {
    if (p.size() != params_.size()) {
      throw ShapeError("set_parameters: wrong parameter count");
    }
    params_ = p;
  }

  // Restores the construction-time parameters bit-exactly and clears the
  // optimizer moments. Idempotent.
  void reset_to_snapshot() {
    params_ = snapshot_;
    reset_adam();
  }

  // Runs full epochs of mini-batch Adam until the training accuracy reaches
  // the threshold at an epoch boundary or max_epochs is hit. After every
  // epoch the callback receives argmax predictions over pool_x, so callers
  // can track prediction switches on the unlabeled pool. The mini-batch
  // order of epoch e is drawn from derive_seed(shuffle_seed, e).
  TrainReport train_until(const Matrix& x, const std::vector<int>& y,
                          const Matrix& pool_x, const EpochCallback& on_epoch,
                          std::uint64_t shuffle_seed) {
    if (x.rows == 0) throw ConfigError("train_until: empty training set");
    check_input(x);
    if (y.size() != x.rows) {
      throw ShapeError("train_until: label count does not match rows");
    }
    if (pool_x.rows > 0 && pool_x.cols != static_cast<std::size_t>(dim_)) {
      throw ShapeError("train_until: pool dimension mismatch");
    }

    std::vector<int> order(x.rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(params_.size());
    const auto batch = static_cast<std::size_t>(config_.batch_size);

    TrainReport report;
    for (int epoch = 1; epoch <= config_.max_epochs; ++epoch) {
      Rng shuffle_rng(derive_seed(shuffle_seed, epoch));
      shuffle_rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t end = std::min(order.size(), start + batch);
        const std::vector<int> idx(order.begin() + static_cast<long>(start),
                                   order.begin() + static_cast<long>(end));
        const double loss = backprop(x, y, idx, grad);
        if (!std::isfinite(loss)) {
          throw DivergenceError("training loss became non-finite", epoch);
        }
        adam_step(grad);
      }
      const double acc = accuracy(x, y);
      on_epoch(predict(pool_x));
      report.epochs_run = epoch;
      report.final_train_accuracy = acc;
      report.reached_threshold = acc >= config_.train_acc_threshold;
      if (report.reached_threshold) break;
    }
    return report;
  }

  // Class probabilities; every row is a softmax and sums to one.
  Matrix predict_proba(const Matrix& x) const {
    check_input(x);
    Matrix probs(x.rows, static_cast<std::size_t>(classes_));
    std::vector<double> hidden(static_cast<std::size_t>(config_.hidden_units));
    std::vector<double> logits(static_cast<std::size_t>(classes_));
    for (std::size_t r = 0; r < x.rows; ++r) {
      forward(x.row(r), hidden, logits);
      softmax_inplace(logits);
      for (int k = 0; k < classes_; ++k) {
        probs.at(r, static_cast<std::size_t>(k)) =
            logits[static_cast<std::size_t>(k)];
      }
    }
    return probs;
  }

  std::vector<int> predict(const Matrix& x) const {
    check_input(x);
    std::vector<int> preds(x.rows);
    std::vector<double> hidden(static_cast<std::size_t>(config_.hidden_units));
    std::vector<double> logits(static_cast<std::size_t>(classes_));
    for (std::size_t r = 0; r < x.rows; ++r) {
      forward(x.row(r), hidden, logits);
      preds[r] = static_cast<int>(std::max_element(logits.begin(),
                                                   logits.end()) -
                                  logits.begin());
    }
    return preds;
  }

  // Post-ReLU hidden activations, one row per sample.
  Matrix embed(const Matrix& x) const {
    check_input(x);
    const auto h = static_cast<std::size_t>(config_.hidden_units);
    Matrix emb(x.rows, h);
    std::vector<double> hidden(h);
    std::vector<double> logits(static_cast<std::size_t>(classes_));
    for (std::size_t r = 0; r < x.rows; ++r) {
      forward(x.row(r), hidden, logits);
      for (std::size_t j = 0; j < h; ++j) emb.at(r, j) = hidden[j];
    }
    return emb;
  }

  double accuracy(const Matrix& x, const std::vector<int>& y) const {
    const auto preds = predict(x);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < preds.size(); ++r) {
      if (preds[r] == y[r]) ++correct;
    }
    return x.rows == 0 ? 0.0
                       : static_cast<double>(correct) /
                             static_cast<double>(x.rows);
  }

  // Compares the analytic gradient of the mean cross-entropy loss against
  // central finite differences (h = 1e-5) over every parameter and returns
  // the largest scaled error |analytic - numeric| / max(1, |a|, |n|).
  double gradient_check(const Matrix& x, const std::vector<int>& y) const {
    if (x.rows == 0 || x.rows > 8) {
      throw ConfigError("gradient_check: batch must have 1..8 samples");
    }
    check_input(x);
    std::vector<int> idx(x.rows);
    std::iota(idx.begin(), idx.end(), 0);

    MlpClassifier probe = *this;
    std::vector<double> analytic(params_.size());
    probe.backprop(x, y, idx, analytic);

    const double h = 1e-5;
    double max_err = 0.0;
    for (std::size_t p = 0; p < params_.size(); ++p) {
      const double saved = probe.params_[p];
      probe.params_[p] = saved + h;
      const double up = probe.batch_loss(x, y, idx);
      probe.params_[p] = saved - h;
      const double down = probe.batch_loss(x, y, idx);
      probe.params_[p] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom =
          std::max(1.0, std::max(std::abs(analytic[p]), std::abs(numeric)));
      max_err = std::max(max_err, std::abs(analytic[p] - numeric) / denom);
    }
    return max_err;
  }

 private:
  void check_input(const Matrix& x) const {
    if (x.rows > 0 && x.cols != static_cast<std::size_t>(dim_)) {
      throw ShapeError("input dimension does not match learner");
    }
  }

  void reset_adam() {
    adam_m_.assign(params_.size(), 0.0);
    adam_v_.assign(params_.size(), 0.0);
    adam_t_ = 0;
  }

  double w1(int i, int j) const {
    return params_[static_cast<std::size_t>(w1_off_ + i * config_.hidden_units +
                                            j)];
  }
  double b1(int j) const {
    return params_[static_cast<std::size_t>(b1_off_ + j)];
  }
  double w2(int j, int k) const {
    return params_[static_cast<std::size_t>(w2_off_ + j * classes_ + k)];
  }
  double b2(int k) const {
    return params_[static_cast<std::size_t>(b2_off_ + k)];
  }

  void forward(std::span<const double> in, std::vector<double>& hidden,
               std::vector<double>& logits) const {
    const int h = config_.hidden_units;
    for (int j = 0; j < h; ++j) {
      double z = b1(j);
      for (int i = 0; i < dim_; ++i) {
        z += in[static_cast<std::size_t>(i)] * w1(i, j);
      }
      hidden[static_cast<std::size_t>(j)] = z > 0.0 ? z : 0.0;
    }
    for (int k = 0; k < classes_; ++k) {
      double z = b2(k);
      for (int j = 0; j < h; ++j) {
        z += hidden[static_cast<std::size_t>(j)] * w2(j, k);
      }
      logits[static_cast<std::size_t>(k)] = z;
    }
  }

  static void softmax_inplace(std::vector<double>& logits) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (auto& z : logits) {
      z = std::exp(z - zmax);
      sum += z;
    }
    for (auto& z : logits) z /= sum;
  }

  // Mean cross-entropy over the selected rows.
  double batch_loss(const Matrix& x, const std::vector<int>& y,
                    const std::vector<int>& idx) const {
    std::vector<double> hidden(static_cast<std::size_t>(config_.hidden_units));
    std::vector<double> probs(static_cast<std::size_t>(classes_));
    double loss = 0.0;
    for (int r : idx) {
      forward(x.row(static_cast<std::size_t>(r)), hidden, probs);
      softmax_inplace(probs);
      const auto label = static_cast<std::size_t>(y[static_cast<std::size_t>(r)]);
      loss -= std::log(probs[label]);
    }
    return loss / static_cast<double>(idx.size());
  }

  // Mean cross-entropy loss and its gradient over the selected rows.
  double backprop(const Matrix& x, const std::vector<int>& y,
                  const std::vector<int>& idx, std::vector<double>& grad) {
    const int h = config_.hidden_units;
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> hidden(static_cast<std::size_t>(h));
    std::vector<double> probs(static_cast<std::size_t>(classes_));
    std::vector<double> dhidden(static_cast<std::size_t>(h));
    const double inv_n = 1.0 / static_cast<double>(idx.size());
    double loss = 0.0;

    for (int r : idx) {
      const auto in = x.row(static_cast<std::size_t>(r));
      forward(in, hidden, probs);
      softmax_inplace(probs);
      const int label = y[static_cast<std::size_t>(r)];
      loss -= std::log(probs[static_cast<std::size_t>(label)]);

      // dL/dlogit_k = (p_k - 1{k == label}) / n
      for (int k = 0; k < classes_; ++k) {
        const double dz =
            (probs[static_cast<std::size_t>(k)] - (k == label ? 1.0 : 0.0)) *
            inv_n;
        grad[static_cast<std::size_t>(b2_off_ + k)] += dz;
        for (int j = 0; j < h; ++j) {
          grad[static_cast<std::size_t>(w2_off_ + j * classes_ + k)] +=
              hidden[static_cast<std::size_t>(j)] * dz;
        }
      }
      for (int j = 0; j < h; ++j) {
        double dh = 0.0;
        for (int k = 0; k < classes_; ++k) {
          dh += w2(j, k) *
                (probs[static_cast<std::size_t>(k)] -
                 (k == label ? 1.0 : 0.0)) *
                inv_n;
        }
        // ReLU subgradient: zero at and below the kink
        dhidden[static_cast<std::size_t>(j)] =
            hidden[static_cast<std::size_t>(j)] > 0.0 ? dh : 0.0;
      }
      for (int j = 0; j < h; ++j) {
        const double dz = dhidden[static_cast<std::size_t>(j)];
        if (dz == 0.0) continue;
        grad[static_cast<std::size_t>(b1_off_ + j)] += dz;
        for (int i = 0; i < dim_; ++i) {
          grad[static_cast<std::size_t>(w1_off_ + i * h + j)] +=
              in[static_cast<std::size_t>(i)] * dz;
        }
      }
    }
    return loss * inv_n;
  }

  void adam_step(const std::vector<double>& grad) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++adam_t_;
    const double bc1 = 1.0 - std::pow(beta1, adam_t_);
    const double bc2 = 1.0 - std::pow(beta2, adam_t_);
    for (std::size_t p = 0; p < params_.size(); ++p) {
      adam_m_[p] = beta1 * adam_m_[p] + (1.0 - beta1) * grad[p];
      adam_v_[p] = beta2 * adam_v_[p] + (1.0 - beta2) * grad[p] * grad[p];
      const double mhat = adam_m_[p] / bc1;
      const double vhat = adam_v_[p] / bc2;
      params_[p] -= config_.learning_rate * mhat / (std::sqrt(vhat) + eps);
    }
  }

  LearnerConfig config_;
  int dim_;
  int classes_;
  int w1_off_, b1_off_, w2_off_, b2_off_;
  std::vector<double> params_;
  std::vector<double> snapshot_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  int adam_t_ = 0;
};

}  // namespace false_al::learner
