#pragma once

// Seed-averaged accuracy curves and the area under the difference curve
// (AUDC) against the random baseline. Accuracies are carried in percentage
// points here; the difference curve is summed with unit round spacing over
// rounds 1..rounds_used (round 0 is excluded because every strategy shares
// the same random initial pool).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "false_al/errors.hpp"
#include "false_al/loop.hpp"

namespace false_al::metrics {

struct Curve {
  std::string strategy;
  std::string split;
  std::vector<double> mean_pp;  // index = round, starting at 0
  std::vector<double> std_pp;
  int n_seeds = 0;
};

struct AudcReport {
  std::string strategy;
  std::string split;
  double audc = 0.0;  // percentage points x rounds
  int rounds_used = 0;
};

// Pointwise mean and population standard deviation over seeds, converted to
// percentage points. Every seed must cover the identical contiguous round
// range starting at 0.
inline Curve build_curve(const std::vector<loop::RunRecord>& records,
                         const std::string& strategy,
                         const std::string& split) {
  std::map<int, std::vector<double>> by_round;
  std::set<int> seeds;
  for (const auto& rec : records) {
    if (rec.strategy != strategy || rec.split != split) continue;
    by_round[rec.round].push_back(rec.accuracy * 100.0);
    seeds.insert(rec.seed);
  }
  if (by_round.empty()) {
    throw ConfigError("no records for strategy '" + strategy + "', split '" +
                      split + "'");
  }
  const std::size_t n_seeds = seeds.size();
  Curve curve;
  curve.strategy = strategy;
  curve.split = split;
  curve.n_seeds = static_cast<int>(n_seeds);
  int expected_round = 0;
  for (const auto& [round, values] : by_round) {
    if (round != expected_round) {
      throw ShapeError("curve rounds are not contiguous from 0 for '" +
                       strategy + "'/" + split);
    }
    if (values.size() != n_seeds) {
      throw ShapeError("ragged rounds across seeds at round " +
                       std::to_string(round) + " for '" + strategy + "'/" +
                       split);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_seeds);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_seeds);
    curve.mean_pp.push_back(mean);
    curve.std_pp.push_back(std::sqrt(var));
    ++expected_round;
  }
  return curve;
}

// Sum of (strategy - baseline) accuracy over rounds 1..rounds_used, in
// percentage points. Positive values mean the strategy beats the baseline.
inline AudcReport audc(const Curve& strategy_curve, const Curve& random_curve,
                       int rounds_used = 20) {
  if (strategy_curve.split != random_curve.split) {
    throw ShapeError("audc: curves are for different splits");
  }
  if (rounds_used < 1) {
    throw ConfigError("audc: rounds_used must be >= 1");
  }
  const auto needed = static_cast<std::size_t>(rounds_used) + 1;
  if (strategy_curve.mean_pp.size() < needed ||
      random_curve.mean_pp.size() < needed) {
    throw ShapeError("audc: curves do not cover rounds 1.." +
                     std::to_string(rounds_used));
  }
  AudcReport report;
  report.strategy = strategy_curve.strategy;
  report.split = strategy_curve.split;
  report.rounds_used = rounds_used;
  double area = 0.0;
  for (int n = 1; n <= rounds_used; ++n) {
    area += strategy_curve.mean_pp[static_cast<std::size_t>(n)] -
            random_curve.mean_pp[static_cast<std::size_t>(n)];
  }
  report.audc = area;
  return report;
}

struct SummaryTable {
  std::vector<std::string> strategies;  // sorted
  std::vector<std::string> splits;      // sorted
  std::map<std::pair<std::string, std::string>, double> cells;
};

inline SummaryTable summary_table(const std::vector<AudcReport>& reports) {
  SummaryTable table;
  std::set<std::string> strategies;
  std::set<std::string> splits;
  for (const auto& r : reports) {
    const auto key = std::make_pair(r.strategy, r.split);
    if (table.cells.count(key) > 0) {
      throw StateError("duplicate summary cell (" + r.strategy + ", " +
                       r.split + ")");
    }
    table.cells[key] = r.audc;
    strategies.insert(r.strategy);
    splits.insert(r.split);
  }
  table.strategies.assign(strategies.begin(), strategies.end());
  table.splits.assign(splits.begin(), splits.end());
  return table;
}

namespace detail {

inline std::string format_audc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

// Comma-delimited table, one strategy per row; missing cells stay empty.
inline std::string render_delimited(const SummaryTable& table) {
  std::string out = "strategy";
  for (const auto& split : table.splits) out += "," + split;
  out += "\n";
  for (const auto& strategy : table.strategies) {
    out += strategy;
    for (const auto& split : table.splits) {
      out += ",";
      const auto it = table.cells.find({strategy, split});
      if (it != table.cells.end()) out += detail::format_audc(it->second);
    }
    out += "\n";
  }
  return out;
}

// Plaintext table with aligned columns; missing cells render as "-".
inline std::string render_aligned(const SummaryTable& table) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"strategy"};
  for (const auto& split : table.splits) header.push_back(split);
  rows.push_back(header);
  for (const auto& strategy : table.strategies) {
    std::vector<std::string> row{strategy};
    for (const auto& split : table.splits) {
      const auto it = table.cells.find({strategy, split});
      row.push_back(it != table.cells.end() ? detail::format_audc(it->second)
                                            : "-");
    }
    rows.push_back(row);
  }
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) {
        out.append(widths[c] - row[c].size() + 2, ' ');
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace false_al::metrics
