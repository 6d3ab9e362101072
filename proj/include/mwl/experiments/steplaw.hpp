#pragma once

// Step laws ν for the experiments: finite supports, rotated heavy-tailed
// diagonals over R, and the p-adic Haar-ball example. Hypothesis flags are
// declared per entry, not verified.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwl/matrix.hpp"
#include "mwl/random.hpp"
#include "mwl/stable.hpp"
#include "mwl/walk.hpp"

namespace mwl::experiments {

enum class StepKind { FiniteSupport, RotHeavyDiag, PadicHaarBall, Custom };

struct HypothesisFlags {
  bool proximal = false;
  bool strongly_irreducible = false;
  bool totally_irreducible = false;
  bool in_sl = false;
  /// Baseline entries (deterministic or commuting). Runners accept them
  /// without hypothesis flags and mark the report as a control.
  bool control = false;

  /// Comma-separated names: proximal, strongly_irreducible,
  /// totally_irreducible, sl, control. Throws UsageError on unknown names.
  static HypothesisFlags parse(const std::string& list);
  std::string to_string() const;
};

struct StepLawSpec {
  StepKind kind = StepKind::FiniteSupport;
  std::string name;
  FieldSpec field = FieldSpec::real();
  std::size_t d = 2;
  HypothesisFlags flags;

  // FiniteSupport and Custom
  std::vector<Matrix> support;
  std::vector<double> weights;
  std::string file;

  // RotHeavyDiag: X = scale * Pareto(alpha), exponents X * c_i with
  // c_i = (d − 1 − 2i)/(d − 1), composed on the left with the product of
  // planar rotations R_{i,i+1}(angle).
  double alpha = 1.5;
  double scale = 1.0;
  double angle = 1.0;

  // PadicHaarBall: entries p·u with u uniform mod p^(digits − 1), plus 1 at (0, 0).
  unsigned digits = 6;

  /// Weights positive and summing to 1 within 1e-12, support invertible,
  /// dimensions consistent. Throws UsageError.
  void validate() const;

  static StepLawSpec builtin(const std::string& name);
  static std::vector<std::string> builtin_names();
  /// Matrix blocks in the text format of read_matrices.
  static StepLawSpec custom(const std::string& path, std::vector<double> weights, HypothesisFlags flags);
  static StepLawSpec rot_heavy_diag(std::size_t d, double alpha, double scale, double angle, HypothesisFlags flags);
  static StepLawSpec padic_haar_ball(std::uint64_t p, std::size_t d, unsigned digits, HypothesisFlags flags);
};

std::string kind_name(StepKind k);

/// Draws steps of a validated spec. Real diagonal support matrices and
/// RotHeavyDiag letters get their exterior powers in closed form, so products
/// of commuting diagonals stay bit-exact.
class StepSampler {
 public:
  explicit StepSampler(StepLawSpec spec);

  const StepLawSpec& spec() const noexcept { return spec_; }
  bool deterministic() const;

  Step draw(Rng& rng) const;
  std::vector<Step> walk(Rng& rng, std::size_t length) const;

  /// E κ(γ_0) when known in closed form (finite support, RotHeavyDiag with
  /// α > 1, Haar ball); nullopt when infinite.
  std::optional<double> mean_kappa() const;
  /// Whether E κ(γ_0)^2 is finite.
  bool kappa_square_integrable() const;
  /// Tail data of κ(γ_0) for RotHeavyDiag; nullopt otherwise.
  std::optional<TailLaw> kappa_tail() const;

 private:
  Step diagonal_step(const std::vector<double>& exponents, const std::vector<double>& signs) const;
  Step heavy_step(double x) const;
  Step haar_step(Rng& rng) const;

  StepLawSpec spec_;
  std::vector<Step> support_steps_;
  // RotHeavyDiag: ∧^k R, row-major, k = 1..d-1, and exponent coefficients.
  std::vector<std::vector<double>> rot_wedges_;
  std::vector<std::vector<std::vector<std::size_t>>> subsets_;
  std::vector<double> coeffs_;
};

}  // namespace mwl::experiments
