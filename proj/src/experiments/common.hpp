#pragma once

// Shared plumbing of the runners: report metadata, hypothesis checks, the
// replica simulation loop and small estimators with standard errors.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mwl/experiments/config.hpp"
#include "mwl/experiments/parallel.hpp"
#include "mwl/experiments/report.hpp"
#include "mwl/experiments/steplaw.hpp"
#include "mwl/random.hpp"
#include "mwl/stats.hpp"
#include "mwl/walk.hpp"

namespace mwl::experiments::detail {

struct Needs {
  bool proximal = false;
  bool strongly_irreducible = false;
  bool totally_irreducible = false;
  bool in_sl = false;
};

/// Throws UsageError naming the missing flags, unless the entry is a control.
void require_flags(const StepLawSpec& s, Needs needs, const std::string& runner);

RunReport start_report(const std::string& runner, const ExperimentConfig& cfg);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Throws DomainError when x is −inf or NaN.
double checked(double x, const char* what);

/// Auxiliary stream independent of the replica streams.
Rng aux_stream(std::uint64_t seed, std::uint64_t tag);

/// Runs per_walk(buffer) on cfg.walks walks per replica and returns the
/// records in (replica, walk) order.
template <class Rec, class F>
std::vector<Rec> simulate(const ExperimentConfig& cfg, const StepSampler& sampler, std::size_t length, F&& per_walk) {
  auto per_rep = parallel_map<std::vector<Rec>>(cfg.replicas, [&](std::size_t r) {
    Rng rng = Rng::for_replica(cfg.seed, r);
    std::vector<Rec> out;
    out.reserve(cfg.walks);
    for (std::size_t w = 0; w < cfg.walks; ++w) {
      const WalkBuffer b(sampler.walk(rng, length));
      out.push_back(per_walk(b));
    }
    return out;
  });
  std::vector<Rec> all;
  all.reserve(cfg.replicas * cfg.walks);
  for (auto& v : per_rep) {
    for (auto& rec : v) all.push_back(std::move(rec));
  }
  return all;
}

/// Mean of |x_i − c|^q with its standard error.
MeanSe mean_abs_pow(std::span<const double> x, double q, double c = 0.0);

struct VarianceEstimate {
  double var = 0.0;  // 1/n normalization
  double se = 0.0;   // sqrt((m4 − m2²)/n)
};
VarianceEstimate variance_se(std::span<const double> x);

/// Var_q = mean |x − x̄|^q and its delta-method standard error.
Estimate var_q_se(std::span<const double> x, double q);

double median(std::vector<double> x);
/// Linear-interpolated quantile of a sample.
double quantile(std::vector<double> x, double p);

/// Strictly decreasing over the last k values.
bool decreasing_tail(const std::vector<double>& v, std::size_t k);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Replica-block bootstrap: draws `blocks` blocks of `block` consecutive
/// indices with replacement, B times, and evaluates stat on each index set.
template <class F>
std::vector<double> block_bootstrap(std::size_t blocks, std::size_t block, std::size_t reps, Rng rng, F&& stat) {
  std::vector<double> out;
  out.reserve(reps);
  std::vector<std::size_t> idx(blocks * block);
  for (std::size_t b = 0; b < reps; ++b) {
    for (std::size_t i = 0; i < blocks; ++i) {
      const std::size_t src = rng.index(blocks);
      for (std::size_t j = 0; j < block; ++j) idx[i * block + j] = src * block + j;
    }
    out.push_back(stat(idx));
  }
  return out;
}

/// Sample standard deviation of bootstrap replicates (NaN entries skipped).
double bootstrap_se(const std::vector<double>& reps);

/// κ(γ̄_n), Σ κ(γ_k) and Δκ(γ̃_{0,n}) at each grid n of one walk.
struct PrefixRecord {
  std::vector<double> kappa;
  std::vector<double> sum;
  std::vector<double> delta;
};
PrefixRecord prefix_record(const WalkBuffer& b, const std::vector<std::size_t>& grid);

/// Column j of a record matrix: out[w] = get(records[w])[j].
template <class Rec, class F>
std::vector<double> column(const std::vector<Rec>& recs, F&& get) {
  std::vector<double> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(get(r));
  return out;
}

std::string qlabel(double q);

/// E N(γ_0)^{q/2} < ∞; only RotHeavyDiag has unbounded N.
void require_half_moment(const StepLawSpec& s, double q, const std::string& runner);

inline std::size_t floor_log2(std::size_t n) { return static_cast<std::size_t>(std::bit_width(n)) - 1; }

}  // namespace mwl::experiments::detail
