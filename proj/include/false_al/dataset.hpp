#pragma once

// Deterministic synthetic classification datasets, leveled corruption
// operators for out-of-distribution test variants, and a delimited-text
// interchange format.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "false_al/core.hpp"
#include "false_al/errors.hpp"
#include "false_al/rng.hpp"

namespace false_al::dataset {

struct Sample {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class CorruptionKind { additive_noise, affine_warp, quantize };

// A corruption operator and its severity. Level 0 is the identity for every
// kind; higher levels distort more.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::additive_noise;
  int level = 0;

  std::string name() const {
    std::string k;
    switch (kind) {
      case CorruptionKind::additive_noise: k = "additive-noise"; break;
      case CorruptionKind::affine_warp: k = "affine-warp"; break;
      case CorruptionKind::quantize: k = "quantize"; break;
    }
    return k + "-" + std::to_string(level);
  }

  // Parses "kind:level", e.g. "additive-noise:2".
  static CorruptionSpec parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("corruption spec must be kind:level, got '" +
                        std::string(text) + "'");
    }
    const std::string_view kind_s = text.substr(0, colon);
    const std::string level_s(text.substr(colon + 1));
    CorruptionSpec spec;
    if (kind_s == "additive-noise") {
      spec.kind = CorruptionKind::additive_noise;
    } else if (kind_s == "affine-warp") {
      spec.kind = CorruptionKind::affine_warp;
    } else if (kind_s == "quantize") {
      spec.kind = CorruptionKind::quantize;
    } else {
      throw ConfigError("unknown corruption kind '" + std::string(kind_s) +
                        "'");
    }
    char* end = nullptr;
    const long lvl = std::strtol(level_s.c_str(), &end, 10);
    if (end == level_s.c_str() || *end != '\0' || lvl < 0) {
      throw ConfigError("corruption level must be a nonnegative integer, got '" +
                        level_s + "'");
    }
    spec.level = static_cast<int>(lvl);
    return spec;
  }

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) =
      default;
};

struct DatasetConfig {
  enum class Family { gaussian_mixture, two_moons_like };

  Family family = Family::gaussian_mixture;
  int n_pool = 600;
  int n_test = 400;
  int num_classes = 2;
  int dim = 2;
  double class_separation = 3.0;
  std::uint64_t seed = 1;
  // Corruptions applied to the in-distribution test split to build the
  // out-of-distribution splits.
  std::vector<CorruptionSpec> corruptions = {
      {CorruptionKind::additive_noise, 2}, {CorruptionKind::additive_noise, 5}};
};

struct DatasetBundle {
  std::vector<Sample> train_pool;
  std::vector<Sample> test_id;
  std::map<std::string, std::vector<Sample>> test_ood;
  int num_classes = 0;
  int dim = 0;
  std::uint64_t gen_seed = 0;

  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

enum class FileFormat { delimited_text };

namespace detail {

inline void validate(const DatasetConfig& cfg) {
  if (cfg.num_classes < 2) {
    throw ConfigError("dataset.classes must be >= 2");
  }
  if (cfg.dim < 2) {
    throw ConfigError("dataset.dim must be >= 2");
  }
  if (cfg.n_pool < cfg.num_classes) {
    throw ConfigError("dataset.n_pool must be >= dataset.classes");
  }
  if (cfg.n_test < cfg.num_classes) {
    throw ConfigError("dataset.n_test must be >= dataset.classes");
  }
  if (!(cfg.class_separation > 0.0)) {
    throw ConfigError("dataset.class_separation must be > 0");
  }
  if (cfg.family == DatasetConfig::Family::two_moons_like &&
      cfg.num_classes != 2) {
    throw ConfigError("dataset.classes must be 2 for family two-moons-like");
  }
}

// Class centers on a circle in the first two dimensions, spaced so that
// adjacent centers sit exactly class_separation apart (in noise-sigma units).
inline std::vector<std::vector<double>> mixture_centers(int num_classes,
                                                        int dim,
                                                        double separation) {
  const double radius =
      separation / (2.0 * std::sin(std::numbers::pi / num_classes));
  std::vector<std::vector<double>> centers;
  centers.reserve(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
    const double angle = 2.0 * std::numbers::pi * k / num_classes;
    c[0] = radius * std::cos(angle);
    c[1] = radius * std::sin(angle);
    centers.push_back(std::move(c));
  }
  return centers;
}

inline std::vector<Sample> draw_split(const DatasetConfig& cfg, int n,
                                      Rng& rng) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  const auto centers = mixture_centers(cfg.num_classes, cfg.dim,
                                       cfg.class_separation);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.label = i % cfg.num_classes;  // round-robin keeps splits balanced
    s.features.resize(static_cast<std::size_t>(cfg.dim));
    if (cfg.family == DatasetConfig::Family::gaussian_mixture) {
      for (int d = 0; d < cfg.dim; ++d) {
        s.features[static_cast<std::size_t>(d)] =
            centers[static_cast<std::size_t>(s.label)]
                   [static_cast<std::size_t>(d)] +
            rng.normal();
      }
    } else {
      // Two interleaved crescents scaled by class_separation, with fixed
      // observation noise; extra dimensions are uninformative unit noise.
      const double t = std::numbers::pi * rng.uniform();
      const double scale = cfg.class_separation;
      double x0, x1;
      if (s.label == 0) {
        x0 = scale * std::cos(t);
        x1 = scale * std::sin(t);
      } else {
        x0 = scale * (1.0 - std::cos(t));
        x1 = scale * (0.5 - std::sin(t));
      }
      s.features[0] = x0 + 0.25 * rng.normal();
      s.features[1] = x1 + 0.25 * rng.normal();
      for (int d = 2; d < cfg.dim; ++d) {
        s.features[static_cast<std::size_t>(d)] = rng.normal();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// Applies one corruption operator to a sample list. Labels are never
// touched; level 0 returns the features bit-exactly. Deterministic in
// (spec, seed) and independent of any other corruption applied elsewhere.
inline std::vector<Sample> corrupt(const std::vector<Sample>& samples,
                                   const CorruptionSpec& spec,
                                   std::uint64_t seed) {
  if (samples.empty()) {
    throw ConfigError("corrupt: empty input");
  }
  std::vector<Sample> out = samples;
  if (spec.level == 0) {
    return out;
  }
  const std::size_t dim = samples.front().features.size();
  Rng rng(derive_seed(seed, spec.name()));

  switch (spec.kind) {
    case CorruptionKind::additive_noise: {
      const double sigma = 0.1 * spec.level;
      for (auto& s : out) {
        for (auto& f : s.features) {
          f += sigma * rng.normal();
        }
      }
      break;
    }
    case CorruptionKind::affine_warp: {
      // One fixed matrix for the whole split: a rotation by 0.05*level
      // radians in a random coordinate plane composed with a random upper
      // triangular shear of the same magnitude (entries scaled by 1/sqrt(d)
      // so the total distortion does not grow with dimension).
      const double m = 0.05 * spec.level;
      const std::size_t ax0 = rng.below(dim);
      std::size_t ax1 = rng.below(dim - 1);
      if (ax1 >= ax0) ++ax1;
      const double c = std::cos(m);
      const double sn = std::sin(m);
      Matrix shear(dim, dim);
      for (std::size_t i = 0; i < dim; ++i) shear.at(i, i) = 1.0;
      const double entry_scale = m / std::sqrt(static_cast<double>(dim));
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) {
          shear.at(i, j) = entry_scale * rng.normal();
        }
      }
      std::vector<double> tmp(dim);
      for (auto& s : out) {
        // shear first, then rotate in the (ax0, ax1) plane
        for (std::size_t i = 0; i < dim; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < dim; ++j) {
            acc += shear.at(i, j) * s.features[j];
          }
          tmp[i] = acc;
        }
        const double a = tmp[ax0];
        const double b = tmp[ax1];
        tmp[ax0] = c * a - sn * b;
        tmp[ax1] = sn * a + c * b;
        s.features.assign(tmp.begin(), tmp.end());
      }
      break;
    }
    case CorruptionKind::quantize: {
      // Snap every feature to the centers of 2^(8-level) equal bins spanning
      // that feature's realized range.
      const int exponent = std::max(0, 8 - spec.level);
      const double bins = std::pow(2.0, exponent);
      for (std::size_t d = 0; d < dim; ++d) {
        double lo = samples.front().features[d];
        double hi = lo;
        for (const auto& s : samples) {
          lo = std::min(lo, s.features[d]);
          hi = std::max(hi, s.features[d]);
        }
        const double width = (hi - lo) / bins;
        if (width <= 0.0) continue;
        for (auto& s : out) {
          double idx = std::floor((s.features[d] - lo) / width);
          idx = std::clamp(idx, 0.0, bins - 1.0);
          s.features[d] = lo + (idx + 0.5) * width;
        }
      }
      break;
    }
  }
  return out;
}

// Generates a full bundle: a labeled pool, an in-distribution test split and
// one corrupted test split per configured corruption. Bit-identical for
// identical configs.
inline DatasetBundle generate(const DatasetConfig& cfg) {
  detail::validate(cfg);
  DatasetBundle bundle;
  bundle.num_classes = cfg.num_classes;
  bundle.dim = cfg.dim;
  bundle.gen_seed = cfg.seed;

  Rng rng(derive_seed(cfg.seed, "generate",
                      static_cast<int>(cfg.family)));
  bundle.train_pool = detail::draw_split(cfg, cfg.n_pool, rng);
  bundle.test_id = detail::draw_split(cfg, cfg.n_test, rng);

  for (const auto& spec : cfg.corruptions) {
    const std::string name = spec.name();
    if (bundle.test_ood.count(name) > 0) {
      throw ConfigError("dataset.corruptions lists '" + name + "' twice");
    }
    bundle.test_ood[name] = corrupt(bundle.test_id, spec, cfg.seed);
  }
  return bundle;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline bool valid_tag(const std::string& tag) {
  return tag == "pool" || tag == "test_id" ||
         (tag.rfind("test_ood:", 0) == 0 && tag.size() > 9);
}

inline double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ParseError("malformed feature value '" + s + "'", line);
  }
  return v;
}

inline int parse_label(const std::string& s, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < 0) {
    throw ParseError("malformed label '" + s + "'", line);
  }
  return static_cast<int>(v);
}

}  // namespace detail

// File layout: optional "# gen_seed=<n>" comment, one header row declaring
// the split tags present, then one sample per row as
// <tag>,<f0>,...,<f{d-1}>,<label>.
inline void export_bundle(const DatasetBundle& bundle, std::ostream& os) {
  os << "# gen_seed=" << bundle.gen_seed << "\n";
  std::string header = "pool,test_id";
  for (const auto& [name, split] : bundle.test_ood) {
    header += ",test_ood:" + name;
  }
  os << header << "\n";
  char buf[32];
  auto write_split = [&](const std::string& tag,
                         const std::vector<Sample>& split) {
    for (const auto& s : split) {
      os << tag;
      for (double f : s.features) {
        // 17 significant digits round-trip any IEEE double exactly
        std::snprintf(buf, sizeof(buf), "%.17g", f);
        os << ',' << buf;
      }
      os << ',' << s.label << "\n";
    }
  };
  write_split("pool", bundle.train_pool);
  write_split("test_id", bundle.test_id);
  for (const auto& [name, split] : bundle.test_ood) {
    write_split("test_ood:" + name, split);
  }
}

inline void export_bundle(const DatasetBundle& bundle,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  export_bundle(bundle, os);
}

inline DatasetBundle ingest(std::istream& is,
                            FileFormat format = FileFormat::delimited_text) {
  (void)format;  // delimited-text is the only format
  DatasetBundle bundle;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::string> declared;
  int dim = -1;
  int max_label = -1;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# gen_seed=";
      if (line.rfind(key, 0) == 0) {
        bundle.gen_seed = std::strtoull(line.c_str() + key.size(), nullptr, 10);
      }
      continue;
    }
    auto fields = detail::split_fields(line);
    if (!header_seen) {
      for (const auto& tag : fields) {
        if (!detail::valid_tag(tag)) {
          throw ParseError("header declares invalid split tag '" + tag + "'",
                           line_no);
        }
        declared.push_back(tag);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < 3) {
      throw ParseError("row has too few fields", line_no);
    }
    const std::string& tag = fields.front();
    if (std::find(declared.begin(), declared.end(), tag) == declared.end()) {
      throw ParseError("row tag '" + tag + "' not declared in header",
                       line_no);
    }
    const int row_dim = static_cast<int>(fields.size()) - 2;
    if (dim < 0) {
      dim = row_dim;
    } else if (row_dim != dim) {
      throw ParseError("schema mismatch: expected " + std::to_string(dim) +
                           " features, row has " + std::to_string(row_dim),
                       line_no);
    }
    Sample s;
    s.features.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      s.features.push_back(
          detail::parse_double(fields[static_cast<std::size_t>(i) + 1],
                               line_no));
    }
    s.label = detail::parse_label(fields.back(), line_no);
    max_label = std::max(max_label, s.label);
    if (tag == "pool") {
      bundle.train_pool.push_back(std::move(s));
    } else if (tag == "test_id") {
      bundle.test_id.push_back(std::move(s));
    } else {
      bundle.test_ood[tag.substr(9)].push_back(std::move(s));
    }
  }
  if (!header_seen) {
    throw ParseError("missing header row");
  }
  for (const auto& tag : declared) {
    const bool present =
        (tag == "pool" && !bundle.train_pool.empty()) ||
        (tag == "test_id" && !bundle.test_id.empty()) ||
        (tag.rfind("test_ood:", 0) == 0 &&
         bundle.test_ood.count(tag.substr(9)) > 0);
    if (!present) {
      throw ParseError("declared split '" + tag + "' has no rows");
    }
  }
  bundle.dim = dim;
  bundle.num_classes = max_label + 1;
  return bundle;
}

inline DatasetBundle ingest(const std::string& path,
                            FileFormat format = FileFormat::delimited_text) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("dataset file not found: '" + path + "'");
  }
  return ingest(is, format);
}

}  // namespace false_al::dataset
