#pragma once

#include <cstdint>
#include <compare>
#include <iosfwd>
#include <string>
#include <variant>

#include <gmpxx.h>

namespace mwl {

using Rational = mpq_class;
using Integer = mpz_class;

enum class FieldKind { Real, Padic };

bool is_prime(std::uint64_t n);

/// The local field a matrix lives over: the reals or Q_p for a prime p.
class FieldSpec {
 public:
  static FieldSpec real() { return FieldSpec(FieldKind::Real, 0); }
  /// Throws UsageError unless p is prime.
  static FieldSpec padic(std::uint64_t p);

  FieldKind kind() const noexcept { return kind_; }
  bool is_real() const noexcept { return kind_ == FieldKind::Real; }
  bool is_padic() const noexcept { return kind_ == FieldKind::Padic; }
  /// Prime of a p-adic field; 0 for the reals.
  std::uint64_t prime() const noexcept { return p_; }
  /// log p, the unit in which p-adic log-norms are measured.
  double log_prime() const;

  /// "real" or "padic:<p>", the token used by the matrix text format.
  std::string token() const;
  static FieldSpec parse(const std::string& token);

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;

 private:
  FieldSpec(FieldKind kind, std::uint64_t p) : kind_(kind), p_(p) {}

  FieldKind kind_;
  std::uint64_t p_;
};

/// p-adic valuation; +infinity for zero.
class Valuation {
 public:
  constexpr Valuation() = default;
  constexpr explicit Valuation(long v) : value_(v), infinite_(false) {}
  static constexpr Valuation infinity() {
    Valuation v;
    v.infinite_ = true;
    return v;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  /// Meaningless for the infinite valuation.
  constexpr long value() const noexcept { return value_; }

  friend constexpr bool operator==(const Valuation& a, const Valuation& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::strong_ordering operator<=>(const Valuation& a, const Valuation& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }
  friend constexpr Valuation operator+(const Valuation& a, const Valuation& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return Valuation(a.value_ + b.value_);
  }

 private:
  long value_ = 0;
  bool infinite_ = false;
};

/// v_p(n) for a nonzero integer; +infinity for zero.
Valuation valuation(const Integer& n, std::uint64_t p);
/// v_p(num) - v_p(den); +infinity for zero. Throws UsageError if p is not prime.
Valuation valuation(const Rational& x, std::uint64_t p);

/// An element of R (double) or of Q (exact, lowest terms) viewed inside Q_p.
class Scalar {
 public:
  Scalar() : value_(0.0) {}
  Scalar(double x) : value_(x) {}  // NOLINT(google-explicit-constructor)
  Scalar(Rational x) : value_(std::move(x)) { std::get<Rational>(value_).canonicalize(); }  // NOLINT
  static Scalar rational(long num, long den = 1) { return Scalar(Rational(num, den)); }

  bool is_real() const noexcept { return std::holds_alternative<double>(value_); }
  bool is_rational() const noexcept { return std::holds_alternative<Rational>(value_); }
  double real() const;
  const Rational& rational() const;
  bool is_zero() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  /// Throws ArithmeticError on zero.
  Scalar inverse() const;

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value_ == b.value_; }

 private:
  std::variant<double, Rational> value_;
};

/// |x| in the field f: the usual modulus over R, p^(-v_p(x)) over Q_p.
/// Throws UsageError when x does not belong to f.
double abs_value(const Scalar& x, const FieldSpec& f);
/// |x|_p as an exact rational (0 for x = 0).
Rational padic_abs_exact(const Rational& x, std::uint64_t p);

std::ostream& operator<<(std::ostream& os, const Scalar& x);

}  // namespace mwl
