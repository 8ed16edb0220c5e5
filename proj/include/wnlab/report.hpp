/// @file report.hpp
/// @brief Experiment reports (JSON + flat CSV tables) and the worker pool.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace wnlab {

/// One pass/fail decision with the threshold it was judged against.
struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string rule;  ///< e.g. "value <= threshold"
};

/// Rectangular table written as CSV; cells are numbers or strings.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;

  void add_row(std::vector<nlohmann::json> row);
  void write_csv(std::ostream& os) const;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config;   ///< fully resolved config, seeds included
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  std::vector<ExperimentReport> subreports;
  double wall_seconds = 0.0;

  /// All verdicts (and those of sub-reports) pass.
  bool passed() const;
  const Verdict* find(const std::string& verdict_name) const;
  const Table* table(const std::string& table_name) const;

  nlohmann::json to_json() const;
  /// Writes <name>.json and <name>_<table>.csv (recursively for sub-reports).
  void write(const std::filesystem::path& dir) const;
};

Verdict verdict_le(std::string name, double value, double threshold);
Verdict verdict_ge(std::string name, double value, double threshold);

/// Worker count used when an experiment is given 0: the WNLAB_WORKERS
/// environment variable, else hardware concurrency.
std::size_t default_workers();

/// Runs fn(i) for i in [0, count) on `workers` threads (0 = default). Each
/// index is visited at most once; on failure the exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace wnlab
