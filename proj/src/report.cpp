#include "wnlab/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "wnlab/error.hpp"

namespace wnlab {

void Table::add_row(std::vector<nlohmann::json> row) {
  if (row.size() != columns.size()) throw InvalidArgument("table '" + name + "': row width mismatch");
  rows.push_back(std::move(row));
}

namespace {

void write_cell(std::ostream& os, const nlohmann::json& v) {
  if (v.is_string()) {
    os << v.get<std::string>();
  } else if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x)) os << std::setprecision(17) << x;
    else os << (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
  } else if (v.is_null()) {
    os << "";
  } else {
    os << v.dump();
  }
}

// json has no infinities; keep them readable
nlohmann::json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

}  // namespace

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      write_cell(os, row[c]);
    }
    os << '\n';
  }
}

bool ExperimentReport::passed() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  for (const auto& r : subreports)
    if (!r.passed()) return false;
  return true;
}

const Verdict* ExperimentReport::find(const std::string& verdict_name) const {
  for (const auto& v : verdicts)
    if (v.name == verdict_name) return &v;
  for (const auto& r : subreports)
    if (const auto* v = r.find(verdict_name)) return v;
  return nullptr;
}

const Table* ExperimentReport::table(const std::string& table_name) const {
  for (const auto& t : tables)
    if (t.name == table_name) return &t;
  for (const auto& r : subreports)
    if (const auto* t = r.table(table_name)) return t;
  return nullptr;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["experiment"] = name;
  j["config"] = config;
  j["summary"] = summary;
  j["passed"] = passed();
  j["wall_seconds"] = wall_seconds;
  auto& vs = j["verdicts"] = nlohmann::json::array();
  for (const auto& v : verdicts)
    vs.push_back({{"name", v.name},
                  {"pass", v.pass},
                  {"value", finite_or_string(v.value)},
                  {"threshold", finite_or_string(v.threshold)},
                  {"rule", v.rule}});
  auto& ts = j["tables"] = nlohmann::json::object();
  for (const auto& t : tables) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
      nlohmann::json r = nlohmann::json::object();
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        r[t.columns[c]] = row[c].is_number_float() ? finite_or_string(row[c].get<double>()) : row[c];
      rows.push_back(std::move(r));
    }
    ts[t.name] = std::move(rows);
  }
  if (!subreports.empty()) {
    auto& subs = j["subreports"] = nlohmann::json::array();
    for (const auto& r : subreports) subs.push_back(r.to_json());
  }
  return j;
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / (name + ".json"));
    if (!os) throw Error("cannot write report to " + dir.string());
    os << std::setw(2) << to_json() << '\n';
  }
  for (const auto& t : tables) {
    std::ofstream os(dir / (name + "_" + t.name + ".csv"));
    if (!os) throw Error("cannot write table to " + dir.string());
    t.write_csv(os);
  }
  for (const auto& r : subreports) r.write(dir);
}

Verdict verdict_le(std::string name, double value, double threshold) {
  return {std::move(name), value <= threshold, value, threshold, "value <= threshold"};
}

Verdict verdict_ge(std::string name, double value, double threshold) {
  return {std::move(name), value >= threshold, value, threshold, "value >= threshold"};
}

std::size_t default_workers() {
  if (const char* env = std::getenv("WNLAB_WORKERS")) {
    char* end = nullptr;
    const long k = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && k > 0) return static_cast<std::size_t>(k);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        // keep the lowest failing index so the reported failure is deterministic
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error = std::current_exception();
          error_index = i;
        }
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace wnlab
