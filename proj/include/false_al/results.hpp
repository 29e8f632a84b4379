#pragma once

// Results and manifest persistence. The results file is the canonical
// record of a grid run: one CSV row per (strategy, seed, round, split),
// sorted, with accuracies in percentage points. Rewriting the same records
// yields byte-identical files.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "false_al/errors.hpp"
#include "false_al/loop.hpp"

namespace false_al::results {

inline constexpr std::string_view kResultsHeader =
    "strategy,seed,round,split,accuracy_pp,epochs,reached_threshold";

inline void write_results(std::ostream& os,
                          std::vector<loop::RunRecord> records) {
  std::sort(records.begin(), records.end(), loop::record_order);
  os << kResultsHeader << '\n';
  char buf[32];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.accuracy * 100.0);
    os << r.strategy << ',' << r.seed << ',' << r.round << ',' << r.split
       << ',' << buf << ',' << r.epochs_run << ','
       << (r.reached_threshold ? 1 : 0) << '\n';
  }
}

inline void write_results(const std::string& path,
                          const std::vector<loop::RunRecord>& records) {
  std::ofstream os(path);
  if (!os) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  write_results(os, records);
}

inline std::vector<loop::RunRecord> read_results(std::istream& is) {
  std::vector<loop::RunRecord> records;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kResultsHeader) {
        throw ParseError("unexpected results header '" + line + "'", line_no);
      }
      header_seen = true;
      continue;
    }
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
    if (fields.size() != 7) {
      throw ParseError("results row must have 7 fields", line_no);
    }
    loop::RunRecord rec;
    rec.strategy = fields[0];
    try {
      rec.seed = std::stoi(fields[1]);
      rec.round = std::stoi(fields[2]);
      rec.split = fields[3];
      rec.accuracy = std::stod(fields[4]) / 100.0;
      rec.epochs_run = std::stoi(fields[5]);
      rec.reached_threshold = std::stoi(fields[6]) != 0;
    } catch (const std::exception&) {
      throw ParseError("malformed results row", line_no);
    }
    records.push_back(std::move(rec));
  }
  if (!header_seen) {
    throw ParseError("results file is empty");
  }
  return records;
}

inline std::vector<loop::RunRecord> read_results(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("results file not found: '" + path + "'");
  }
  return read_results(is);
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string config_hash;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<loop::CellStatus> cells;
  std::string results_path;
};

inline void write_manifest(const std::string& path, const Manifest& manifest) {
  nlohmann::json j;
  j["config_hash"] = manifest.config_hash;
  j["version"] = manifest.version;
  j["started"] = manifest.started;
  j["finished"] = manifest.finished;
  j["results"] = manifest.results_path;
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : manifest.cells) {
    nlohmann::json c;
    c["strategy"] = cell.strategy;
    c["seed"] = cell.seed;
    c["status"] = cell.completed ? "completed" : "failed: " + cell.error;
    j["cells"].push_back(std::move(c));
  }
  std::ofstream os(path);
  if (!os) {
    throw ConfigError("cannot open '" + path + "' for writing");
  }
  os << j.dump(2) << '\n';
}

}  // namespace false_al::results
