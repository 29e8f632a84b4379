#pragma once

// Flat key-value experiment configuration with dotted sections. Lines are
// `key = value`; blank lines and lines starting with '#' are skipped. The
// config hash is computed over the sorted canonical form, so key order in
// the file does not matter.

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "false_al/errors.hpp"
#include "false_al/loop.hpp"
#include "false_al/rng.hpp"

namespace false_al::config {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

class ConfigMap {
 public:
  static ConfigMap parse(std::istream& is) {
    ConfigMap cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string stripped = detail::trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw ParseError("expected 'key = value'", line_no);
      }
      const std::string key = detail::trim(stripped.substr(0, eq));
      const std::string value = detail::trim(stripped.substr(eq + 1));
      if (key.empty()) {
        throw ParseError("empty config key", line_no);
      }
      if (values_contains(cfg.values_, key)) {
        throw ParseError("duplicate config key '" + key + "'", line_no);
      }
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static ConfigMap parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
      throw ConfigError("config file not found: '" + path + "'");
    }
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ConfigError("missing config key '" + key + "'");
    }
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  long long get_int(const std::string& key) const {
    return to_int(key, get(key));
  }

  long long get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_uint_or(const std::string& key,
                            std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    char* end = nullptr;
    const std::uint64_t out = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
      throw ConfigError("config key '" + key +
                        "' must be a nonnegative integer, got '" + v + "'");
    }
    return out;
  }

  double get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
      throw ConfigError("config key '" + key + "' must be a number, got '" +
                        v + "'");
    }
    return out;
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  bool get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key +
                      "' must be true/false/1/0, got '" + v + "'");
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> items;
    std::string cur;
    for (char ch : get(key)) {
      if (ch == ',') {
        items.push_back(detail::trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    items.push_back(detail::trim(cur));
    for (const auto& item : items) {
      if (item.empty()) {
        throw ConfigError("config key '" + key + "' has an empty list entry");
      }
    }
    return items;
  }

  // Rejects keys outside the known vocabulary, naming the first offender.
  void validate_keys(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
      if (allowed.count(key) == 0) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }

  // Sorted `key = value` lines; the hash input.
  std::string canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) {
      out += key + " = " + value + "\n";
    }
    return out;
  }

  std::uint64_t hash() const { return fnv1a(canonical()); }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static bool values_contains(const std::map<std::string, std::string>& m,
                              const std::string& k) {
    return m.count(k) > 0;
  }

  long long to_int(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
      throw ConfigError("config key '" + key + "' must be an integer, got '" +
                        v + "'");
    }
    return out;
  }

  std::map<std::string, std::string> values_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.seed",
      "experiment.seeds",
      "experiment.strategies",
      "loop.initial_pool_size",
      "loop.query_batch",
      "loop.rounds",
      "loop.diagnostic_events",
      "dataset.family",
      "dataset.n_pool",
      "dataset.n_test",
      "dataset.classes",
      "dataset.dim",
      "dataset.class_separation",
      "dataset.seed",
      "dataset.corruptions",
      "dataset.file",
      "learner.hidden_units",
      "learner.learning_rate",
      "learner.train_acc_threshold",
      "learner.max_epochs",
      "learner.batch_size",
  };
  return keys;
}

inline dataset::DatasetConfig dataset_config_from(const ConfigMap& cfg) {
  dataset::DatasetConfig out;
  const std::string family = cfg.get_or("dataset.family", "gaussian-mixture");
  if (family == "gaussian-mixture") {
    out.family = dataset::DatasetConfig::Family::gaussian_mixture;
  } else if (family == "two-moons-like") {
    out.family = dataset::DatasetConfig::Family::two_moons_like;
  } else {
    throw ConfigError("dataset.family must be gaussian-mixture or "
                      "two-moons-like, got '" + family + "'");
  }
  out.n_pool = static_cast<int>(cfg.get_int_or("dataset.n_pool", out.n_pool));
  out.n_test = static_cast<int>(cfg.get_int_or("dataset.n_test", out.n_test));
  out.num_classes =
      static_cast<int>(cfg.get_int_or("dataset.classes", out.num_classes));
  out.dim = static_cast<int>(cfg.get_int_or("dataset.dim", out.dim));
  out.class_separation =
      cfg.get_double_or("dataset.class_separation", out.class_separation);
  out.seed = cfg.get_uint_or("dataset.seed", out.seed);
  if (cfg.has("dataset.corruptions")) {
    out.corruptions.clear();
    for (const auto& item : cfg.get_list("dataset.corruptions")) {
      out.corruptions.push_back(dataset::CorruptionSpec::parse(item));
    }
  }
  return out;
}

inline learner::LearnerConfig learner_config_from(const ConfigMap& cfg) {
  learner::LearnerConfig out;
  out.hidden_units =
      static_cast<int>(cfg.get_int_or("learner.hidden_units", out.hidden_units));
  out.learning_rate =
      cfg.get_double_or("learner.learning_rate", out.learning_rate);
  out.train_acc_threshold =
      cfg.get_double_or("learner.train_acc_threshold", out.train_acc_threshold);
  out.max_epochs =
      static_cast<int>(cfg.get_int_or("learner.max_epochs", out.max_epochs));
  out.batch_size =
      static_cast<int>(cfg.get_int_or("learner.batch_size", out.batch_size));
  return out;
}

inline loop::ExperimentConfig experiment_config_from(const ConfigMap& cfg) {
  cfg.validate_keys(known_keys());
  loop::ExperimentConfig out;
  out.initial_pool_size = static_cast<int>(
      cfg.get_int_or("loop.initial_pool_size", out.initial_pool_size));
  out.query_batch =
      static_cast<int>(cfg.get_int_or("loop.query_batch", out.query_batch));
  out.rounds = static_cast<int>(cfg.get_int_or("loop.rounds", out.rounds));
  out.num_seeds =
      static_cast<int>(cfg.get_int_or("experiment.seeds", out.num_seeds));
  out.experiment_seed =
      cfg.get_uint_or("experiment.seed", out.experiment_seed);
  out.diagnostic_events =
      cfg.get_bool_or("loop.diagnostic_events", out.diagnostic_events);
  if (cfg.has("experiment.strategies")) {
    out.strategy_grid.clear();
    for (const auto& name : cfg.get_list("experiment.strategies")) {
      out.strategy_grid.push_back(strategies::parse_strategy(name));
    }
  }
  out.data = dataset_config_from(cfg);
  out.dataset_file = cfg.get_or("dataset.file", "");
  out.model = learner_config_from(cfg);
  return out;
}

}  // namespace false_al::config
