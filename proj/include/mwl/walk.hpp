#pragma once

// Random walk data: steps carrying exterior powers and exact Cartan vectors,
// and a buffer answering window queries γ_{m,n}, Δκ and Δκ̇ from cached
// prefix data. Real products are kept as exp(log_scale) * (normalized matrix)
// so that long heavy-tailed products neither overflow nor underflow.

#include <cstddef>
#include <optional>
#include <vector>

#include "mwl/matrix.hpp"

namespace mwl {

struct ScaledMatrix {
  double log_scale = 0.0;
  std::size_t dim = 0;
  std::vector<double> m;  // row-major, max |entry| = 1 unless zero

  static ScaledMatrix identity(std::size_t d);
  /// Throws UsageError for p-adic input.
  static ScaledMatrix from(const Matrix& g);
  /// exp(log_scale) * normalized, renormalizing the max entry to 1.
  static ScaledMatrix normalize(double log_scale, std::size_t d, std::vector<double> entries);

  ScaledMatrix operator*(const ScaledMatrix& o) const;
  /// log of the operator norm; -inf for zero.
  double log_norm() const;
  /// Explicit matrix; throws RangeError when the scale overflows a double.
  Matrix to_matrix() const;
};

/// One letter of a walk.
struct Step {
  FieldSpec field = FieldSpec::real();
  std::size_t d = 0;
  /// Real only: ∧^k g for k = 1..d-1 (wedges[0] is g).
  std::vector<ScaledMatrix> wedges;
  /// Always set over Q_p; set over R when the letter is representable.
  std::optional<Matrix> exact;
  /// Q_p only: elementary valuations e_1 <= ... <= e_d.
  std::vector<long> elementary;
  CartanVector cartan;
  double log_abs_det = 0.0;

  double kappa() const { return cartan.top(); }
  double big_n() const { return cartan.spread(); }

  /// Real step from an explicit invertible matrix.
  static Step from_real(const Matrix& g);
  /// p-adic step from an exact invertible matrix.
  static Step from_padic(const Matrix& g);
};

/// Single-owner cache over a finite walk γ_0, ..., γ_{L-1}.
class WalkBuffer {
 public:
  explicit WalkBuffer(std::vector<Step> steps);

  std::size_t length() const noexcept { return steps_.size(); }
  std::size_t dim() const noexcept { return d_; }
  const FieldSpec& field() const noexcept { return field_; }
  const Step& step(std::size_t k) const { return steps_.at(k); }

  /// Σ_{m<=k<n} κ(γ_k) and its Cartan analogue, from prefix sums.
  double kappa_sum(std::size_t m, std::size_t n) const;
  std::vector<double> cartan_sum(std::size_t m, std::size_t n) const;

  /// κ(γ_{m,n}) and κ̇(γ_{m,n}); prefixes (m = 0) are cached.
  double kappa_window(std::size_t m, std::size_t n) const;
  CartanVector cartan_window(std::size_t m, std::size_t n) const;

  /// Δκ(γ̃_{m,n}) = κ(γ_{m,n}) − Σ κ(γ_k); exact over Q_p.
  double delta_kappa(std::size_t m, std::size_t n) const;
  std::vector<double> delta_cartan(std::size_t m, std::size_t n) const;
  /// Δκ(γ_{l,m}, γ_{m,n}) = κ(γ_{l,n}) − κ(γ_{l,m}) − κ(γ_{m,n}).
  double delta_kappa_pair(std::size_t l, std::size_t m, std::size_t n) const;

  /// Literal product γ_m ⋯ γ_{n-1}: exact over Q_p; over R it throws
  /// RangeError when the product is not representable.
  Matrix product(std::size_t m, std::size_t n) const;

 private:
  void check(std::size_t m, std::size_t n) const;
  // κ̄_1..κ̄_d of a window, in natural-log units (real) or valuation units (p-adic).
  std::vector<double> real_kbars(std::size_t m, std::size_t n) const;
  std::vector<long> padic_elementary(std::size_t m, std::size_t n) const;

  FieldSpec field_;
  std::size_t d_;
  std::vector<Step> steps_;
  std::vector<double> kappa_prefix_;               // Σ κ(γ_k), k < n
  std::vector<std::vector<double>> cartan_prefix_;  // per n, per coordinate
  std::vector<std::vector<long>> elem_prefix_;      // p-adic: per n, Σ e_i(γ_k)
  std::vector<double> log_det_prefix_;
  mutable std::vector<std::vector<ScaledMatrix>> wedge_prefix_;  // real: [k][n]
  mutable std::vector<std::optional<std::vector<double>>> kbar_cache_;
  mutable std::vector<Matrix> exact_prefix_;  // p-adic
};

}  // namespace mwl
