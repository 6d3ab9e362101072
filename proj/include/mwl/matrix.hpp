#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mwl/local_field.hpp"

namespace mwl {

/// Square d x d matrix over a local field, row-major. Real matrices store
/// doubles; p-adic matrices store exact rationals.
class Matrix {
 public:
  Matrix(FieldSpec field, std::size_t d);

  static Matrix identity(FieldSpec field, std::size_t d);
  static Matrix real(std::size_t d, std::vector<double> entries);
  static Matrix padic(std::uint64_t p, std::size_t d, std::vector<Rational> entries);
  static Matrix diagonal(FieldSpec field, std::span<const Scalar> diag);
  /// Planar rotation by angle theta in the (i, j) coordinate plane of R^d.
  static Matrix rotation(std::size_t d, std::size_t i, std::size_t j, double theta);

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t dim() const noexcept { return d_; }

  Scalar at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, const Scalar& x);
  double real_at(std::size_t i, std::size_t j) const { return real_[i * d_ + j]; }
  const Rational& exact_at(std::size_t i, std::size_t j) const { return exact_[i * d_ + j]; }
  std::span<const double> real_data() const noexcept { return real_; }
  std::span<const Rational> exact_data() const noexcept { return exact_; }

  bool is_zero() const;
  Matrix transpose() const;
  Matrix operator*(const Matrix& o) const;
  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  FieldSpec field_;
  std::size_t d_;
  std::vector<double> real_;
  std::vector<Rational> exact_;
};

/// Cartan projection (kappa_1 >= ... >= kappa_d), natural-log units.
struct CartanVector {
  std::vector<double> kappas;

  std::size_t dim() const noexcept { return kappas.size(); }
  double operator[](std::size_t i) const { return kappas[i]; }
  /// kappa_1 + ... + kappa_k = log ||wedge^k g||; kbar(0) = 0.
  double kbar(std::size_t k) const;
  double top() const { return kappas.front(); }
  /// kappa_1 - kappa_d, which equals N(g) = kappa(g) + kappa(g^-1).
  double spread() const { return kappas.front() - kappas.back(); }
  bool is_non_increasing(double tol) const;
};

void require_same_shape(const Matrix& a, const Matrix& b);

Scalar determinant(const Matrix& g);
/// Exact over Q_p; partial pivoting over R. Throws DomainError when singular.
Matrix inverse(const Matrix& g);

/// log of the operator norm; -infinity for the zero matrix. Over Q_p the norm
/// is the max-norm operator norm, i.e. the largest entry modulus.
double kappa(const Matrix& g);
/// N(g) = kappa(g) + kappa(g^-1) >= 0. Throws DomainError when singular.
double big_n(const Matrix& g);

/// Descending singular values of a real matrix (one-sided Jacobi, 1e-12, 30 sweeps).
std::vector<double> singular_values(const Matrix& g);

/// All k-subsets of {0..d-1} in colexicographic order (compare largest element first).
std::vector<std::vector<std::size_t>> k_subsets_colex(std::size_t d, std::size_t k);

/// k-th exterior power: entry (S, T) is the minor with rows S and columns T,
/// subsets in colexicographic order. Throws UsageError unless 1 <= k <= d.
Matrix exterior_power(const Matrix& g, std::size_t k);

/// Cartan projection. Real: log singular values. Q_p: differences of
/// log ||wedge^k g|| computed exactly from minor valuations.
CartanVector cartan(const Matrix& g);
/// Cartan projection from quotients of exterior-power operator norms. Over R
/// this is an independent route (Gram matrix eigenvalues); over Q_p it is the
/// same minor computation as cartan().
CartanVector cartan_via_exterior(const Matrix& g);
/// Over Q_p: e_1 <= ... <= e_d with kappa_i = -e_i log p; e_1 + .. + e_k is the
/// minimal valuation of a k x k minor.
std::vector<long> padic_elementary_valuations(const Matrix& g);

/// log |f g v|, -infinity when the coefficient vanishes.
double log_coefficient(std::span<const Scalar> f, const Matrix& g, std::span<const Scalar> v);

/// Entrywise comparison used for real-field equality: |a - b| <= rel * max(1, max |entry|).
/// p-adic matrices compare exactly.
bool approx_equal(const Matrix& a, const Matrix& b, double rel = 1e-9);

/// Block text format: header "<field> <d>", then d rows. Real entries are
/// printed with 17 significant digits, p-adic ones as num/den.
void write_matrix(std::ostream& os, const Matrix& g);
std::vector<Matrix> read_matrices(std::istream& is);
std::string to_text(const Matrix& g);
Matrix matrix_from_text(const std::string& text);

}  // namespace mwl
