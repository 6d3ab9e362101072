#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mwl::experiments {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct Criterion {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// One CSV: header row, `n` first, floats with 17 significant digits.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  /// Column index by name; throws UsageError when absent.
  std::size_t col(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const { return rows.at(row).at(col(name)); }
};

void write_csv(std::ostream& os, const Table& t);

inline constexpr const char* kScopeNote =
    "Desk-scale trend and threshold checks only: the asymptotic statements (limits as n tends to infinity) "
    "are not reproducible by finite simulations beyond these checks.";

struct RunReport {
  std::string runner;
  std::string entry;
  std::string flags;
  bool control = false;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  std::size_t walks = 0;
  std::vector<std::size_t> n_grid;
  Table table;
  std::vector<Table> extra;
  std::vector<std::pair<std::string, Estimate>> estimates;
  std::vector<Criterion> criteria;
  double wall_seconds = 0.0;
  std::string fixture;

  bool passed() const;
  const Estimate& estimate(const std::string& name) const;
  const Criterion& criterion(const std::string& name) const;
  void add(std::string name, Estimate e) { estimates.emplace_back(std::move(name), e); }
  void check(std::string name, bool pass, double value, double threshold, std::string detail = {});
  nlohmann::ordered_json to_json() const;
};

/// Writes report.json, <runner>.csv and <runner>-<table>.csv for the extras.
/// Returns the CSV paths.
std::vector<std::filesystem::path> write_outputs(const RunReport& r, const std::filesystem::path& dir);

}  // namespace mwl::experiments
