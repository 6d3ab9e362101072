#include "mwl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>
#include <fmt/format.h>

#include "mwl/errors.hpp"
#include "mwl/linalg.hpp"
#include "mwl/random.hpp"
#include "mwl/simd/kernels.hpp"

namespace mwl {

namespace {

void require_nonempty(std::size_t n) {
  if (n == 0) throw UsageError("empty sample");
}

std::size_t rows_of(std::span<const double> x, std::size_t dim) {
  if (dim == 0 || x.size() % dim != 0) throw UsageError("sample size is not a multiple of dim");
  return x.size() / dim;
}

std::vector<double> subsample(std::span<const double> x, std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // partial Fisher–Yates
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.index(x.size() - i)]);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = x[idx[i]];
  return out;
}

}  // namespace

MeanSe mean_se(std::span<const double> x) {
  require_nonempty(x.size());
  const double n = static_cast<double>(x.size());
  const double mean = simd::sum(x) / n;
  if (x.size() < 2) return {mean, 0.0};
  const double ss = simd::pow_abs_dev_sum(x, mean, 2.0);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double var_q(std::span<const double> x, double q) { return var_q(x, 1, q); }

double var_q(std::span<const double> x, std::size_t dim, double q) {
  const std::size_t n = rows_of(x, dim);
  require_nonempty(n);
  if (!(q > 0.0)) throw UsageError("q must be positive");
  if (dim == 1) {
    const double mean = simd::sum(x) / static_cast<double>(n);
    return simd::pow_abs_dev_sum(x, mean, q) / static_cast<double>(n);
  }
  MomentAccumulator acc(dim);
  for (std::size_t i = 0; i < n; ++i) acc.add(x.subspan(i * dim, dim));
  const auto mean = acc.mean();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += (x[i * dim + c] - mean[c]) * (x[i * dim + c] - mean[c]);
    norms[i] = std::sqrt(s);
  }
  return simd::pow_abs_dev_sum(norms, 0.0, q) / static_cast<double>(n);
}

double wasserstein_q_1d(std::span<const double> a, std::span<const double> b, double q, std::uint64_t seed) {
  require_nonempty(a.size());
  require_nonempty(b.size());
  if (!(q > 0.0)) throw UsageError("q must be positive");
  std::vector<double> sa, sb;
  if (a.size() > b.size()) {
    sa = subsample(a, b.size(), seed);
    sb.assign(b.begin(), b.end());
  } else if (b.size() > a.size()) {
    sa.assign(a.begin(), a.end());
    sb = subsample(b, a.size(), seed);
  } else {
    sa.assign(a.begin(), a.end());
    sb.assign(b.begin(), b.end());
  }
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double m = simd::pow_abs_diff_sum(sa, sb, q) / static_cast<double>(sa.size());
  return q >= 1.0 ? std::pow(m, 1.0 / q) : m;
}

std::vector<double> covariance(std::span<const double> x, std::size_t dim) {
  const std::size_t n = rows_of(x, dim);
  require_nonempty(n);
  MomentAccumulator acc(dim);
  for (std::size_t i = 0; i < n; ++i) acc.add(x.subspan(i * dim, dim));
  return acc.covariance();
}

std::vector<double> sqrt_psd(std::span<const double> m, std::size_t dim) {
  if (m.size() != dim * dim) throw UsageError("matrix size does not match dim");
  const double scale = std::max(1.0, linalg::frobenius_norm(m));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::fabs(m[i * dim + j] - m[j * dim + i]) > 1e-10 * scale) throw UsageError("sqrt_psd needs a symmetric matrix");
    }
  }
  const auto eig = linalg::symmetric_eigen(m, dim);
  std::vector<double> out(dim * dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    double v = eig.values[k];
    if (v < -1e-10 * scale) throw UsageError(fmt::format("sqrt_psd: eigenvalue {} is negative", v));
    const double s = std::sqrt(std::max(0.0, v));
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) out[r * dim + c] += s * eig.vectors[r * dim + k] * eig.vectors[c * dim + k];
    }
  }
  return out;
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> x, std::span<const double> thetas) {
  require_nonempty(x.size());
  std::vector<std::complex<double>> out;
  out.reserve(thetas.size());
  const double n = static_cast<double>(x.size());
  for (double t : thetas) {
    if (t == 0.0) {
      out.emplace_back(1.0, 0.0);
      continue;
    }
    const auto s = simd::cf_sum(x, t);
    out.emplace_back(s.cos_sum / n, s.sin_sum / n);
  }
  return out;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a.size());
  require_nonempty(b.size());
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double v;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      v = sa[i];
    } else {
      v = sb[j];
    }
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf) {
  require_nonempty(a.size());
  std::vector<double> s(a.begin(), a.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

EmpiricalSurvival::EmpiricalSurvival(std::span<const double> x) : sorted_(x.begin(), x.end()) {
  require_nonempty(sorted_.size());
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalSurvival::operator()(double t) const {
  const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

TailBound tail_bound_rhs(double t, double c, double beta, const std::function<double(double)>& tail,
                         std::size_t k_max) {
  if (!(c > 0.0)) throw UsageError("tail bound constant C must be positive");
  if (!(beta > 0.0)) throw UsageError("tail bound rate beta must be positive");
  TailBound out;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double p = tail(t / static_cast<double>(k));
    out.partial += c * std::exp(-beta * static_cast<double>(k)) * p * p;
  }
  out.remainder = c * std::exp(-beta * static_cast<double>(k_max)) / (1.0 - std::exp(-beta));
  return out;
}

IntegralSquare integral_square_check(std::span<const double> x, double q) {
  require_nonempty(x.size());
  if (!(q > 0.0)) throw UsageError("q must be positive");
  std::vector<double> s(x.begin(), x.end());
  for (double v : s) {
    if (v < 0.0) throw UsageError("integral_square_check needs nonnegative values");
  }
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  IntegralSquare out;
  double prev = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double surv = (n - static_cast<double>(i)) / n;
    const double cur = std::pow(s[i], q);
    out.lhs += surv * surv * (cur - prev);
    prev = cur;
  }
  const double m = simd::pow_abs_dev_sum(s, 0.0, q / 2.0) / n;
  out.rhs = 2.0 * m * m;
  out.ok = out.lhs <= out.rhs * 1.05;
  return out;
}

MomentAccumulator::MomentAccumulator(std::size_t dim) : dim_(dim), sum_(dim, 0.0), cross_(dim * dim, 0.0) {
  if (dim == 0) throw UsageError("dim must be >= 1");
}

void MomentAccumulator::add(std::span<const double> row) {
  if (row.size() != dim_) throw UsageError("row of the wrong dimension");
  ++n_;
  for (std::size_t i = 0; i < dim_; ++i) {
    sum_[i] += row[i];
    for (std::size_t j = 0; j < dim_; ++j) cross_[i * dim_ + j] += row[i] * row[j];
  }
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.dim_ != dim_) throw UsageError("cannot merge accumulators of different dimension");
  n_ += o.n_;
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += o.sum_[i];
  for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += o.cross_[i];
}

std::vector<double> MomentAccumulator::mean() const {
  require_nonempty(n_);
  std::vector<double> m(sum_);
  for (double& v : m) v /= static_cast<double>(n_);
  return m;
}

std::vector<double> MomentAccumulator::covariance() const {
  const auto m = mean();
  std::vector<double> c(dim_ * dim_);
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) c[i * dim_ + j] = cross_[i * dim_ + j] / n - m[i] * m[j];
  }
  // symmetrize exactly
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) c[j * dim_ + i] = c[i * dim_ + j];
  }
  return c;
}

SampleSummary SampleSummary::of(std::span<const double> x, std::size_t dim, std::span<const double> qs) {
  SampleSummary s;
  s.n = rows_of(x, dim);
  require_nonempty(s.n);
  s.dim = dim;
  MomentAccumulator acc(dim);
  for (std::size_t i = 0; i < s.n; ++i) acc.add(x.subspan(i * dim, dim));
  s.mean = acc.mean();
  // Two-pass covariance for accuracy.
  s.covariance.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        s.covariance[r * dim + c] += (x[i * dim + r] - s.mean[r]) * (x[i * dim + c] - s.mean[c]);
      }
    }
  }
  for (double& v : s.covariance) v /= static_cast<double>(s.n);
  for (double q : qs) s.var_q.emplace_back(q, mwl::var_q(x, dim, q));
  if (dim == 1) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    for (double p : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
      const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(s.n - 1)));
      s.quantiles.emplace_back(p, sorted[k]);
    }
  }
  return s;
}

std::string SampleSummary::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["dim"] = dim;
  j["mean"] = mean;
  auto vq = nlohmann::ordered_json::array();
  for (const auto& [q, v] : var_q) vq.push_back({{"q", q}, {"value", v}});
  j["var_q"] = vq;
  j["covariance"] = covariance;
  auto qt = nlohmann::ordered_json::array();
  for (const auto& [p, v] : quantiles) qt.push_back({{"p", p}, {"value", v}});
  j["quantiles"] = qt;
  return j.dump(2);
}

}  // namespace mwl
