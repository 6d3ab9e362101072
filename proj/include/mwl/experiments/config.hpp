#pragma once

// Experiment configuration: an INI file with sections [steplaw], [grid] and
// [stats]. Every key is listed in README.md; unknown keys are errors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mwl/experiments/steplaw.hpp"

namespace mwl::experiments {

struct StatsSpec {
  std::vector<double> q{1.0};
  std::size_t oracle_size = 100000;
  double hill_fraction = 0.05;
  std::size_t tail_points = 40;
  std::size_t tail_kmax = 64;
  std::size_t triples = 16;
  std::size_t max_gap = 256;
  std::size_t bootstrap = 200;
  double holdout_min = 0.9;

  // Pilot-pinned thresholds.
  double wlln_ratio_max = 0.5;
  double rate_tol = 0.1;
  double w2_max = 0.05;
  double median_max = 0.1;
  double cov_tol = 0.15;

  // stable-selftest and dichotomy-verify
  std::vector<double> selftest_alpha{0.7, 1.0, 1.5, 2.0};
  std::size_t selftest_n = 100000;
  std::size_t selftest_terms = 10000;
  std::size_t tables = 200;
  std::size_t table_n_max = 1024;
};

struct ExperimentConfig {
  StepLawSpec steplaw;
  std::size_t n_min = 16;
  std::size_t n_max = 4096;
  std::size_t replicas = 64;
  std::size_t walks = 16;
  std::uint64_t seed = 0;
  StatsSpec stats;
  std::filesystem::path out_dir = "out";

  /// Dyadic grid n_min, 2 n_min, ..., n_max.
  std::vector<std::size_t> n_grid() const;

  /// Throws UsageError on syntax errors, unknown sections or keys, bad
  /// values and keys that do not apply to the chosen step-law kind. Relative
  /// step-law files resolve against base_dir.
  static ExperimentConfig parse(std::istream& is, const std::filesystem::path& base_dir = ".");
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig defaults();

  void set_seed(std::uint64_t s);
  void set_replicas(std::size_t r);

  /// Sorted "section.key=value" lines of the effective configuration, seed
  /// excluded. The config hash is the SHA-256 of this text.
  std::string canonical_text() const;
  std::string hash() const;

 private:
  std::map<std::string, std::string> canonical_;
};

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace mwl::experiments
