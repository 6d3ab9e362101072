#pragma once

// Statistical functionals: fractional variance, 1-d Wasserstein, covariance
// and its PSD square root, empirical CF, Kolmogorov–Smirnov, and the tail
// bound and integral-square checks. Vector samples are row-major spans of
// n * dim values.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mwl {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean (0 for n < 2)
};
MeanSe mean_se(std::span<const double> x);

/// Mean of ||x − mean||^q; q ∈ (0, 2] (q >= 1 in the fractional-variance
/// sense). Throws UsageError on an empty sample.
double var_q(std::span<const double> x, double q);
double var_q(std::span<const double> x, std::size_t dim, double q);

/// (mean over ranks |A_(i) − B_(i)|^q)^{min(1, 1/q)}. When the sizes differ the
/// larger sample is subsampled without replacement using seed.
double wasserstein_q_1d(std::span<const double> a, std::span<const double> b, double q, std::uint64_t seed = 0);

/// Biased (1/n) covariance, row-major dim x dim.
std::vector<double> covariance(std::span<const double> x, std::size_t dim);
/// Symmetric PSD square root by Jacobi eigendecomposition; eigenvalues down to
/// −1e-10 (relative) are clamped to 0. Throws UsageError on asymmetric input or
/// a clearly negative eigenvalue.
std::vector<double> sqrt_psd(std::span<const double> m, std::size_t dim);

/// Σ_i cos/sin(θ x_i) / n for each θ.
std::vector<std::complex<double>> empirical_cf(std::span<const double> x, std::span<const double> thetas);
double ks_distance(std::span<const double> a, std::span<const double> b);
double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf);

/// Right-continuous empirical survival t ↦ P(X > t).
class EmpiricalSurvival {
 public:
  explicit EmpiricalSurvival(std::span<const double> x);
  double operator()(double t) const;
  std::size_t size() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

struct TailBound {
  double partial = 0.0;    // Σ_{k=1}^{k_max} C e^{−βk} tail(t/k)²
  double remainder = 0.0;  // C e^{−β k_max} / (1 − e^{−β})
  double total() const { return partial + remainder; }
};
/// tail must be nonincreasing on [0, ∞). Throws UsageError for C <= 0 or β <= 0.
TailBound tail_bound_rhs(double t, double c, double beta, const std::function<double(double)>& tail,
                         std::size_t k_max);

struct IntegralSquare {
  double lhs = 0.0;  // ∫ q t^{q−1} P(x > t)² dt, exact for the empirical law
  double rhs = 0.0;  // 2 (E x^{q/2})²
  bool ok = true;    // lhs <= rhs · 1.05
};
/// Throws UsageError on negative values or q <= 0.
IntegralSquare integral_square_check(std::span<const double> x, double q);

/// Counts, sums and cross products; merging is associative and, for a fixed
/// merge order, bit-reproducible.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim);
  void add(std::span<const double> row);
  void merge(const MomentAccumulator& o);
  std::size_t count() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::vector<double> mean() const;
  std::vector<double> covariance() const;

 private:
  std::size_t dim_;
  std::size_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> cross_;
};

struct SampleSummary {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> mean;
  std::vector<std::pair<double, double>> var_q;  // (q, value)
  std::vector<double> covariance;
  std::vector<std::pair<double, double>> quantiles;  // (prob, value); dim = 1 only

  static SampleSummary of(std::span<const double> x, std::size_t dim, std::span<const double> qs);
  /// Keys in the order n, dim, mean, var_q, covariance, quantiles.
  std::string to_json() const;
};

}  // namespace mwl
