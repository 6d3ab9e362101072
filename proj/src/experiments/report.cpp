#include "mwl/experiments/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl::experiments {

namespace {

// JSON has no NaN or infinity; those become null.
nlohmann::ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw UsageError(fmt::format("table {}: row has {} values for {} columns", name, row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t Table::col(const std::string& c) const {
  const auto it = std::find(columns.begin(), columns.end(), c);
  if (it == columns.end()) throw UsageError(fmt::format("table {} has no column '{}'", name, c));
  return static_cast<std::size_t>(it - columns.begin());
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt::format("{:.17g}", r[i]);
    os << '\n';
  }
}

bool RunReport::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

const Estimate& RunReport::estimate(const std::string& name) const {
  for (const auto& [k, e] : estimates) {
    if (k == name) return e;
  }
  throw UsageError(fmt::format("report has no estimate '{}'", name));
}

const Criterion& RunReport::criterion(const std::string& name) const {
  for (const auto& c : criteria) {
    if (c.name == name) return c;
  }
  throw UsageError(fmt::format("report has no criterion '{}'", name));
}

void RunReport::check(std::string name, bool pass, double value, double threshold, std::string detail) {
  criteria.push_back({std::move(name), pass, value, threshold, std::move(detail)});
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["runner"] = runner;
  j["entry"] = entry;
  j["flags"] = flags;
  j["control"] = control;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["replicas"] = replicas;
  j["walks_per_replica"] = walks;
  j["n_grid"] = n_grid;
  j["passed"] = passed();
  auto& cr = j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : criteria) {
    cr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"threshold", num(c.threshold)},
                  {"detail", c.detail}});
  }
  auto& es = j["estimates"] = nlohmann::ordered_json::object();
  for (const auto& [k, e] : estimates) es[k] = {{"value", num(e.value)}, {"se", num(e.se)}};
  j["fixture"] = fixture.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(fixture);
  j["wall_seconds"] = wall_seconds;
  j["note"] = kScopeNote;
  return j;
}

std::vector<std::filesystem::path> write_outputs(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  auto csv = [&](const Table& t, const std::string& file) {
    const auto p = dir / file;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw UsageError(fmt::format("cannot write {}", p.string()));
    write_csv(os, t);
    out.push_back(p);
  };
  csv(r.table, r.runner + ".csv");
  for (const auto& t : r.extra) csv(t, r.runner + "-" + t.name + ".csv");
  std::ofstream js(dir / "report.json");
  if (!js) throw UsageError(fmt::format("cannot write {}", (dir / "report.json").string()));
  js << r.to_json().dump(2) << '\n';
  return out;
}

}  // namespace mwl::experiments
