#include "mwl/stable.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "mwl/errors.hpp"
#include "mwl/linalg.hpp"
#include "mwl/simd/kernels.hpp"

namespace mwl {

namespace {

constexpr double kPi = std::numbers::pi;

// ∫_x^y t^{-1/α} dt, y may be +inf when α < 1.
double power_integral(double x, double y, double alpha) {
  if (alpha == 1.0) return std::log(y / x);
  const double e = 1.0 - 1.0 / alpha;
  if (std::isinf(y)) return -std::pow(x, e) / e;
  return (std::pow(y, e) - std::pow(x, e)) / e;
}

}  // namespace

StableParams StableParams::make(double alpha, double beta, double a, double b) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw UsageError(fmt::format("alpha = {} outside (0, 2]", alpha));
  if (!(beta >= -1.0 && beta <= 1.0)) throw UsageError(fmt::format("beta = {} outside [-1, 1]", beta));
  if (!(a > 0.0) || !std::isfinite(a)) throw UsageError(fmt::format("scale a = {} must be positive", a));
  if (!std::isfinite(b)) throw UsageError("shift b must be finite");
  return {alpha, alpha == 2.0 ? 0.0 : beta, a, b};
}

double c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw UsageError(fmt::format("alpha = {} outside (0, 2]", alpha));
  if (alpha == 2.0) return 1.0;
  if (alpha == 1.0) return kPi / 2.0;
  return std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0);
}

std::complex<double> char_fn(const StableParams& p, double theta) {
  if (theta == 0.0) return {1.0, 0.0};
  const double at = std::fabs(p.a * theta);
  const double sign = theta > 0.0 ? 1.0 : -1.0;
  double re = 0.0, im = theta * p.b;
  if (p.alpha == 1.0) {
    re = -c_alpha(1.0) * at;
    im -= 2.0 * p.beta * p.a * theta * std::log(at) / kPi;
  } else {
    const double mag = c_alpha(p.alpha) * std::pow(at, p.alpha);
    re = -mag;
    im += mag * p.beta * sign * std::tan(kPi * p.alpha / 2.0);
  }
  return std::exp(std::complex<double>(re, im));
}

double sample_one(const StableParams& p, Rng& rng) {
  const double v = kPi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  if (p.alpha == 1.0) {
    // Standard α = 1 variable with skewness 2β/π, then scale (π/2)a.
    const double bs = 2.0 * p.beta / kPi;
    const double h = kPi / 2.0 + bs * v;
    const double x = (2.0 / kPi) * (h * std::tan(v) - bs * std::log((kPi / 2.0) * w * std::cos(v) / h));
    const double sigma = kPi / 2.0 * p.a;
    const double mu = p.b - (2.0 / kPi) * p.beta * p.a * std::log(p.a);
    return sigma * x + (2.0 / kPi) * bs * sigma * std::log(sigma) + mu;
  }
  const double t = p.beta * std::tan(kPi * p.alpha / 2.0);
  const double bshift = std::atan(t) / p.alpha;
  const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * p.alpha));
  const double av = p.alpha * (v + bshift);
  const double x = s * std::sin(av) / std::pow(std::cos(v), 1.0 / p.alpha) *
                   std::pow(std::cos(v - av) / w, (1.0 - p.alpha) / p.alpha);
  const double gamma = std::pow(c_alpha(p.alpha), 1.0 / p.alpha) * p.a;
  return gamma * x + p.b;
}

std::vector<double> sample(const StableParams& p, Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) x = sample_one(p, rng);
  return out;
}

std::vector<double> sample(const StableParams& p, std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  return sample(p, rng, n);
}

StableParams stable_convolve(const StableParams& p0, const StableParams& p1) {
  if (p0.alpha != p1.alpha) throw UsageError("convolution needs equal alpha");
  if (p0.beta != p1.beta) throw UsageError("convolution needs equal beta");
  const double al = p0.alpha;
  const double a2 = std::pow(std::pow(p0.a, al) + std::pow(p1.a, al), 1.0 / al);
  double b2 = p0.b + p1.b;
  if (al == 1.0) {
    b2 += 2.0 * p0.beta / kPi * (a2 * std::log(a2) - p0.a * std::log(p0.a) - p1.a * std::log(p1.a));
  }
  return StableParams::make(al, p0.beta, a2, b2);
}

HarmonicMeasure::HarmonicMeasure(std::size_t dim, std::vector<std::vector<double>> directions,
                                 std::vector<double> weights)
    : dim_(dim), directions_(std::move(directions)), weights_(std::move(weights)) {
  if (dim_ == 0) throw UsageError("harmonic measure dimension must be >= 1");
  if (directions_.empty() || directions_.size() != weights_.size()) {
    throw UsageError("harmonic measure needs one weight per direction");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0)) throw UsageError("harmonic measure weights must be positive");
    total += weights_[i];
    if (directions_[i].size() != dim_) throw UsageError("direction of the wrong dimension");
    double norm2 = 0.0;
    for (double x : directions_[i]) norm2 += x * x;
    if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-12) throw UsageError("directions must be unit vectors");
  }
  if (std::fabs(total - 1.0) > 1e-12) throw UsageError(fmt::format("weights sum to {}, not 1", total));

  mean_.assign(dim_, 0.0);
  std::vector<double> second(dim_ * dim_, 0.0);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    for (std::size_t r = 0; r < dim_; ++r) {
      mean_[r] += weights_[i] * directions_[i][r];
      for (std::size_t c = 0; c < dim_; ++c) second[r * dim_ + c] += weights_[i] * directions_[i][r] * directions_[i][c];
    }
  }
  const auto eig = linalg::symmetric_eigen(second, dim_);
  second_sqrt_.assign(dim_ * dim_, 0.0);
  for (std::size_t k = 0; k < dim_; ++k) {
    const double s = std::sqrt(std::max(0.0, eig.values[k]));
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c) {
        second_sqrt_[r * dim_ + c] += s * eig.vectors[r * dim_ + k] * eig.vectors[c * dim_ + k];
      }
    }
  }
}

HarmonicMeasure HarmonicMeasure::symmetric_line() { return line(0.0); }

HarmonicMeasure HarmonicMeasure::line(double beta) {
  if (!(beta >= -1.0 && beta <= 1.0)) throw UsageError("beta outside [-1, 1]");
  if (beta == 1.0) return atom({1.0});
  if (beta == -1.0) return atom({-1.0});
  return HarmonicMeasure(1, {{1.0}, {-1.0}}, {(1.0 + beta) / 2.0, (1.0 - beta) / 2.0});
}

HarmonicMeasure HarmonicMeasure::atom(std::vector<double> direction) {
  const std::size_t d = direction.size();
  return HarmonicMeasure(d, {std::move(direction)}, {1.0});
}

HarmonicMeasure HarmonicMeasure::parse(std::istream& is) {
  std::vector<std::vector<double>> dirs;
  std::vector<double> weights;
  std::string line;
  std::size_t dim = 0;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double w = 0.0;
    if (!(row >> w)) continue;
    std::vector<double> y;
    double x = 0.0;
    while (row >> x) y.push_back(x);
    if (!row.eof()) throw UsageError("bad harmonic measure line '" + line + "'");
    if (dim == 0) dim = y.size();
    weights.push_back(w);
    dirs.push_back(std::move(y));
  }
  return HarmonicMeasure(dim, std::move(dirs), std::move(weights));
}

std::vector<double> sample_series(const StableParams& p, const HarmonicMeasure& h, Rng& rng, std::size_t n,
                                  std::size_t terms) {
  if (p.alpha >= 2.0) throw UsageError("series representation needs alpha < 2");
  if (terms == 0) throw UsageError("series needs at least one term");
  const std::size_t dim = h.dim();
  const double inv_alpha = 1.0 / p.alpha;
  const bool compensated = p.alpha >= 1.0;
  const bool two_point_fair = h.size() == 2 && h.weights()[0] == 0.5;
  const bool single = h.size() == 1;

  constexpr std::size_t kBatch = 512;
  std::vector<double> out(n * dim);
  std::vector<double> gamma(kBatch), incr(kBatch), w(kBatch), u(kBatch);
  std::vector<double> acc(kBatch * dim), y(kBatch * dim);
  std::vector<std::size_t> pick(kBatch);

  const double total_comp = compensated ? power_integral(1.0, static_cast<double>(terms) + 1.0, p.alpha) : 0.0;
  const double rem_var_exp = 1.0 - 2.0 * inv_alpha;
  const double rem_var_den = 2.0 * inv_alpha - 1.0;

  for (std::size_t start = 0; start < n; start += kBatch) {
    const std::size_t m = std::min(kBatch, n - start);
    std::span<double> g(gamma.data(), m), in(incr.data(), m), ww(w.data(), m), uu(u.data(), m);
    std::fill(gamma.begin(), gamma.end(), 0.0);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 1; k <= terms; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::uint64_t bits = rng.next();
        u[i] = static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
        if (two_point_fair) {
          pick[i] = bits & 1U;
        } else if (!single) {
          pick[i] = rng.discrete(h.weights());
        } else {
          pick[i] = 0;
        }
      }
      simd::neg_log(uu, in);
      simd::advance_arrivals(g, in, inv_alpha, ww);
      for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < m; ++i) y[c * kBatch + i] = h.direction(pick[i])[c];
        simd::fma_accumulate(std::span<double>(acc.data() + c * kBatch, m), ww,
                             std::span<const double>(y.data() + c * kBatch, m));
      }
    }
    // Tail k > K, conditionally on τ̄_K.
    std::vector<double> z(dim);
    for (std::size_t i = 0; i < m; ++i) {
      const double gk = gamma[i];
      double mean_tail = compensated ? power_integral(gk, static_cast<double>(terms) + 1.0, p.alpha)
                                     : power_integral(gk, INFINITY, p.alpha);
      const double sd = std::sqrt(std::pow(gk, rem_var_exp) / rem_var_den);
      for (std::size_t c = 0; c < dim; ++c) z[c] = rng.normal();
      for (std::size_t c = 0; c < dim; ++c) {
        double noise = 0.0;
        for (std::size_t k = 0; k < dim; ++k) noise += h.second_moment_sqrt()[c * dim + k] * z[k];
        const double series = acc[c * kBatch + i] - total_comp * h.mean()[c] + mean_tail * h.mean()[c] + sd * noise;
        out[(start + i) * dim + c] = p.b + p.a * series;
      }
    }
  }
  return out;
}

std::vector<double> series_mean_offset(const StableParams& p, const HarmonicMeasure& h) {
  if (!(p.alpha > 1.0 && p.alpha < 2.0)) throw UsageError("series mean offset needs 1 < alpha < 2");
  std::vector<double> out(h.mean());
  for (auto& v : out) v *= p.a * p.alpha / (p.alpha - 1.0);
  return out;
}

DoaTable doa_diagnostic(std::span<const double> x, double alpha, std::span<const double> r_grid,
                        std::span<const double> t_grid) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw UsageError("alpha outside (0, 2]");
  DoaTable out;
  out.r_grid.assign(r_grid.begin(), r_grid.end());
  out.t_grid.assign(t_grid.begin(), t_grid.end());
  out.target_exponent = 2.0 - alpha;
  std::vector<double> sq(x.size());
  std::vector<double> ax(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ax[i] = std::fabs(x[i]);
  std::sort(ax.begin(), ax.end());
  // prefix sums of x² over the sorted sample
  std::vector<double> pre(ax.size() + 1, 0.0);
  for (std::size_t i = 0; i < ax.size(); ++i) pre[i + 1] = pre[i] + ax[i] * ax[i];
  auto truncated = [&](double t) {
    const auto k = static_cast<std::size_t>(std::upper_bound(ax.begin(), ax.end(), t) - ax.begin());
    return pre[k];
  };
  for (double r : r_grid) {
    for (double t : t_grid) {
      const double den = truncated(t);
      if (den == 0.0) {
        out.sufficient = false;
        out.diagnostic = "insufficient tail data";
        out.ratio.push_back(NAN);
        continue;
      }
      const double ratio = truncated(r * t) / den;
      out.ratio.push_back(ratio);
      out.sup_distance = std::max(out.sup_distance, std::fabs(ratio - std::pow(r, out.target_exponent)));
    }
  }
  if (!out.sufficient) out.sup_distance = INFINITY;
  return out;
}

NormSeq normalizing_sequences(const TailLaw& law, std::span<const std::size_t> n_grid) {
  if (!(law.alpha > 0.0 && law.alpha <= 2.0)) throw UsageError("alpha outside (0, 2]");
  NormSeq out;
  out.n.assign(n_grid.begin(), n_grid.end());
  const double al = law.alpha;
  if (al == 2.0) {
    if (!law.mean) throw UsageError("alpha = 2 normalization needs the mean");
    out.limit = StableParams::make(2.0, 0.0, 1.0 / std::numbers::sqrt2, 0.0);
  } else {
    if (!(law.tail_constant > 0.0)) throw UsageError("tail constant must be positive");
    if (al > 1.0 && !law.mean) throw UsageError("alpha > 1 normalization needs the mean");
    if (al == 1.0 && !law.truncated_mean) throw UsageError("alpha = 1 normalization needs the truncated mean");
    // The α = 1 family of the characteristic function only reaches skewness 2/π.
    const double beta = al == 1.0 ? std::clamp(law.beta * kPi / 2.0, -1.0, 1.0) : law.beta;
    out.limit = StableParams::make(al, beta, 1.0, 0.0);
  }
  for (std::size_t n : out.n) {
    const double dn = static_cast<double>(n);
    double an = 0.0, bn = 0.0;
    if (al == 2.0) {
      an = law.sigma * std::sqrt(dn);
      bn = dn * *law.mean;
    } else {
      an = std::pow(law.tail_constant * dn, 1.0 / al);
      if (al > 1.0) bn = dn * *law.mean;
      if (al == 1.0) bn = dn * law.truncated_mean(an);
    }
    if (!out.a.empty() && an < out.a.back()) throw UsageError("n grid must be nondecreasing");
    out.a.push_back(an);
    out.b.push_back(bn);
  }
  return out;
}

double hill_tail_index(std::span<const double> x, std::size_t k) {
  if (k == 0 || k >= x.size()) throw UsageError(fmt::format("Hill estimator needs 1 <= k < {}, got {}", x.size(), k));
  std::vector<double> s(x.begin(), x.end());
  // top k+1 values in descending order
  std::partial_sort(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k + 1), s.end(), std::greater<>());
  const double base = s[k];
  if (!(base > 0.0)) throw UsageError("Hill estimator needs positive upper order statistics");
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(s[i] / base);
  if (acc == 0.0) throw UsageError("Hill estimator undefined on a degenerate sample");
  return static_cast<double>(k) / acc;
}

}  // namespace mwl
