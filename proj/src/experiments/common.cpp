#include "common.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl::experiments {

std::size_t worker_count() {
  if (const char* env = std::getenv("MWL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

void require_flags(const StepLawSpec& s, Needs needs, const std::string& runner) {
  if (s.flags.control) return;
  std::vector<std::string> missing;
  if (needs.proximal && !s.flags.proximal) missing.emplace_back("proximal");
  if (needs.strongly_irreducible && !s.flags.strongly_irreducible) missing.emplace_back("strongly_irreducible");
  if (needs.totally_irreducible && !s.flags.totally_irreducible) missing.emplace_back("totally_irreducible");
  if (needs.in_sl && !s.flags.in_sl) missing.emplace_back("sl");
  if (missing.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
  throw UsageError(fmt::format("{} refuses entry '{}': missing hypothesis flags {}", runner, s.name, list));
}

RunReport start_report(const std::string& runner, const ExperimentConfig& cfg) {
  RunReport r;
  r.runner = runner;
  r.entry = cfg.steplaw.name;
  r.flags = cfg.steplaw.flags.to_string();
  r.control = cfg.steplaw.flags.control;
  r.config_hash = cfg.hash();
  r.seed = cfg.seed;
  r.replicas = cfg.replicas;
  r.walks = cfg.walks;
  r.n_grid = cfg.n_grid();
  r.table.name = runner;
  return r;
}

double checked(double x, const char* what) {
  if (std::isnan(x) || x == -std::numeric_limits<double>::infinity()) {
    throw DomainError(fmt::format("-inf sentinel in {}: a product or letter is singular", what));
  }
  return x;
}

Rng aux_stream(std::uint64_t seed, std::uint64_t tag) {
  return Rng::for_replica(seed, (std::uint64_t{1} << 62) + tag);
}

MeanSe mean_abs_pow(std::span<const double> x, double q, double c) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::pow(std::fabs(x[i] - c), q);
  return mean_se(v);
}

VarianceEstimate variance_se(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  if (x.empty()) throw UsageError("variance of an empty sample");
  // A constant sample has variance 0, not the rounding error of its mean.
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return {0.0, 0.0};
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return {m2, std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

Estimate var_q_se(std::span<const double> x, double q) {
  const double n = static_cast<double>(x.size());
  if (x.empty()) throw UsageError("var_q of an empty sample");
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::pow(std::fabs(x[i] - m), q);
  const auto ms = mean_se(v);
  return {ms.mean, ms.se};
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw UsageError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

bool decreasing_tail(const std::vector<double>& v, std::size_t k) {
  if (v.size() < k || k < 2) return false;
  for (std::size_t i = v.size() - k + 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw UsageError("linear fit needs at least three paired points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw UsageError("linear fit needs distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    rss += e * e;
  }
  f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return f;
}

PrefixRecord prefix_record(const WalkBuffer& b, const std::vector<std::size_t>& grid) {
  PrefixRecord r;
  for (std::size_t n : grid) {
    const double k = checked(b.kappa_window(0, n), "kappa of a prefix product");
    const double s = b.kappa_sum(0, n);
    r.kappa.push_back(k);
    r.sum.push_back(s);
    // Over Q_p the walk buffer forms Δκ exactly from valuations.
    r.delta.push_back(b.field().is_padic() ? b.delta_kappa(0, n) : k - s);
  }
  return r;
}

std::string qlabel(double q) { return fmt::format("{:g}", q); }

void require_half_moment(const StepLawSpec& s, double q, const std::string& runner) {
  if (s.kind == StepKind::RotHeavyDiag && !(q / 2.0 < s.alpha)) {
    throw UsageError(fmt::format("{}: E N^(q/2) is infinite for q = {} and tail index {}", runner, q, s.alpha));
  }
}

double bootstrap_se(const std::vector<double>& reps) {
  std::vector<double> v;
  for (double x : reps) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

}  // namespace mwl::experiments
