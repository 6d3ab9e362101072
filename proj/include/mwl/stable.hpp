#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwl/random.hpp"

namespace mwl {

/// Stable law L^{α,β}_{a,b}. α = 2 canonicalizes β to 0.
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double a = 1.0;
  double b = 0.0;

  /// Validates ranges (α ∈ (0,2], β ∈ [-1,1], a > 0); throws UsageError.
  static StableParams make(double alpha, double beta, double a, double b);
};

/// C_α = Γ(1−α) cos(πα/2) for α ≠ 1, C_1 = π/2, C_2 = 1. With this constant the
/// upper tail of L^{α,β}_{a,b} satisfies t^α P(X > t) → (1+β)/2 · a^α for α ≠ 1.
double c_alpha(double alpha);

/// exp(iθb − C_α|aθ|^α (1 − iβ sign(θ) tan(πα/2))) for α ≠ 1 and
/// exp(iθb − C_1|aθ| − 2iβaθ log|aθ| / π) for α = 1.
std::complex<double> char_fn(const StableParams& p, double theta);

/// Chambers–Mallows–Stuck transform sampler.
double sample_one(const StableParams& p, Rng& rng);
std::vector<double> sample(const StableParams& p, Rng& rng, std::size_t n);
std::vector<double> sample(const StableParams& p, std::uint64_t seed, std::size_t n);

/// Parameters of L^{α,β}_{a0,b0} * L^{α,β}_{a1,b1}: a2^α = a0^α + a1^α and, for
/// α = 1, b2 = b0 + b1 + (2β/π)(a2 log a2 − a0 log a0 − a1 log a1).
StableParams stable_convolve(const StableParams& p0, const StableParams& p1);

/// Discrete probability measure on the unit sphere of R^dim.
class HarmonicMeasure {
 public:
  HarmonicMeasure(std::size_t dim, std::vector<std::vector<double>> directions, std::vector<double> weights);
  /// Uniform on {−1, +1}.
  static HarmonicMeasure symmetric_line();
  /// Weight (1+β)/2 on +1 and (1−β)/2 on −1.
  static HarmonicMeasure line(double beta);
  static HarmonicMeasure atom(std::vector<double> direction);
  /// Lines "w x_1 ... x_dim"; '#' comments. Weights must sum to 1 within 1e-12.
  static HarmonicMeasure parse(std::istream& is);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> direction(std::size_t i) const { return directions_.at(i); }
  std::span<const double> weights() const noexcept { return weights_; }
  /// E(y)
  const std::vector<double>& mean() const noexcept { return mean_; }
  /// Symmetric square root of E(y y^T), row-major.
  const std::vector<double>& second_moment_sqrt() const noexcept { return second_sqrt_; }

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> directions_;
  std::vector<double> weights_;
  std::vector<double> mean_;
  std::vector<double> second_sqrt_;
};

/// Default truncation of the series sampler.
inline constexpr std::size_t kSeriesTerms = 10000;

/// Truncated series b + a Σ_{k<=K} (τ̄_k^{-1/α} y_k − ∫_k^{k+1} t^{-1/α}dt E(y)),
/// the compensator being present for α >= 1. The discarded tail k > K is
/// replaced by its Gaussian approximation given τ̄_K: mean
/// E(y) ∫_{τ̄_K}^{∞} t^{-1/α}dt (minus ∫_{K+1}^{∞} when compensated) and
/// covariance E(yy^T) τ̄_K^{1−2/α}/(2/α − 1). Without that correction the bias
/// is of order K^{1/2−1/α}. p.beta is ignored (skewness comes from the
/// harmonic measure). Returns n rows of dim values, row-major.
/// Throws UsageError for α = 2 or K = 0.
std::vector<double> sample_series(const StableParams& p, const HarmonicMeasure& h, Rng& rng, std::size_t n,
                                  std::size_t terms = kSeriesTerms);

/// For 1 < α < 2 the series law has mean b + a E(y) α/(α−1), because the
/// compensator ∫_k^{k+1} differs from E τ̄_k^{-1/α} = Γ(k−1/α)/Γ(k). The law
/// with characteristic-function shift b is the series minus a E(y) α/(α−1).
/// Throws UsageError outside 1 < α < 2.
std::vector<double> series_mean_offset(const StableParams& p, const HarmonicMeasure& h);

struct DoaTable {
  std::vector<double> r_grid;
  std::vector<double> t_grid;
  /// ratio[i * t_grid.size() + j] = Σ_{x <= r_i t_j} x² / Σ_{x <= t_j} x²
  std::vector<double> ratio;
  double target_exponent = 0.0;  // 2 − α
  /// sup |ratio − r^{2−α}|
  double sup_distance = 0.0;
  bool sufficient = true;
  std::string diagnostic;
};

/// Truncated second-moment ratios of |x| for the domain-of-attraction test.
DoaTable doa_diagnostic(std::span<const double> x, double alpha, std::span<const double> r_grid,
                        std::span<const double> t_grid);

/// Tail data of a real law in a stable domain of attraction.
struct TailLaw {
  double alpha = 2.0;
  /// P(X > t) + P(X < −t) ~ tail_constant · t^{-α} (α < 2)
  double tail_constant = 1.0;
  double beta = 1.0;
  /// E X (α > 1 and α = 2)
  std::optional<double> mean;
  /// a ↦ E(X; |X| <= a) (α = 1)
  std::function<double(double)> truncated_mean;
  /// standard deviation (α = 2)
  double sigma = 1.0;
};

struct NormSeq {
  std::vector<std::size_t> n;
  std::vector<double> a;
  std::vector<double> b;
  /// Limit of (S_n − b_n)/a_n. For α = 2 this is N(0, 1), i.e. a = 1/√2.
  StableParams limit;
};

/// a_n = (c n)^{1/α} and b_n = 0 (α < 1), n E X (α > 1), n E(X; |X| <= a_n) (α = 1);
/// α = 2: a_n = σ √n, b_n = n E X. Throws UsageError when the needed moment
/// data is missing.
NormSeq normalizing_sequences(const TailLaw& law, std::span<const std::size_t> n_grid);

/// Hill estimator over the top k order statistics. Throws UsageError unless
/// 1 <= k < size, the (k+1)-th largest value is positive and the top values are
/// not all equal.
double hill_tail_index(std::span<const double> x, std::size_t k);

}  // namespace mwl
