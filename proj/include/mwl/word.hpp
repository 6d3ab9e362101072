#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mwl/matrix.hpp"

namespace mwl {

/// Finite word of matrices over one field and dimension.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Matrix> letters);

  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  const Matrix& operator[](std::size_t k) const { return letters_.at(k); }
  std::span<const Matrix> letters() const noexcept { return letters_; }
  const FieldSpec& field() const;
  std::size_t dim() const;

  void push_back(Matrix g);
  /// Concatenation w ⊙ v.
  Word concat(const Word& v) const;
  /// The sub-word (γ_m, ..., γ_{n-1}).
  Word window(std::size_t m, std::size_t n) const;

 private:
  std::vector<Matrix> letters_;
};

/// γ_m ⋯ γ_{n-1}; the identity when m = n. Throws RangeError unless 0 <= m <= n <= size.
Matrix product(const Word& w, std::size_t m, std::size_t n);

/// κ(Π w) − Σ κ(γ_k) <= 0. Over Q_p the difference is formed in integer
/// valuation units, so it is exact. -inf propagates from singular letters.
double delta_kappa(const Word& w);
/// Δκ of the window (γ_a, ..., γ_{b-1}).
double delta_kappa(const Word& w, std::size_t a, std::size_t b);
/// κ(gh) − κ(g) − κ(h)
double delta_kappa_pair(const Matrix& g, const Matrix& h);
/// Coordinate-wise κ̇(gh) − κ̇(g) − κ̇(h)
std::vector<double> delta_cartan_pair(const Matrix& g, const Matrix& h);

struct Subordination {
  /// i_0 <= ... <= i_L with sub_k = product(sup, i_k, i_{k+1}); empty when none exists.
  std::optional<std::vector<std::size_t>> witness;
  double delta_sub = 0.0;
  double delta_sup = 0.0;
  /// Δκ(sup) <= Δκ(sub) + 1e-9; only meaningful with a witness.
  bool monotone = false;
};

/// Searches for a subordination witness. Letters compare exactly over Q_p and
/// entrywise with relative tolerance 1e-9 over R. Among witnesses the
/// lexicographically smallest is returned.
Subordination subordinate_check(const Word& sub, const Word& sup);

struct WindowCancellation {
  /// Σ N(γ_k) − max N(γ_k) over the window.
  double r = 0.0;
  /// min_i Σ_{j != i} N(γ_j), computed independently.
  double r_min_form = 0.0;
  /// First index attaining the max.
  std::size_t argmax = 0;
  double delta_kappa = 0.0;
  /// |Δκ| <= R + 1e-9
  bool bound_ok = true;
};

/// Throws NumericError if the two forms of R disagree beyond 1e-12.
WindowCancellation window_cancellation(const Word& w, std::size_t a, std::size_t b);

struct GridGap {
  std::uint64_t floor = 0;  // ⌊n⌋_p
  std::uint64_t ceil = 0;   // ⌈n⌉_p
  std::uint64_t gap = 0;
  /// l with p̄_l <= n < p̄_{l+1}
  std::size_t index = 0;
};

/// Position of n among the prefix sums p̄_0 = 0, p̄_{k+1} = p̄_k + p_k. Throws
/// UsageError on p_k = 0 and RangeError when the prefix sums do not reach n.
GridGap grid_gap(std::span<const std::uint64_t> p, std::uint64_t n);

}  // namespace mwl
