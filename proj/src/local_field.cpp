#include "mwl/local_field.hpp"

#include <cmath>
#include <ostream>

#include "mwl/errors.hpp"

namespace mwl {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d <= n / d; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

FieldSpec FieldSpec::padic(std::uint64_t p) {
  if (!is_prime(p)) throw UsageError("p-adic field needs a prime, got " + std::to_string(p));
  return FieldSpec(FieldKind::Padic, p);
}

double FieldSpec::log_prime() const {
  if (!is_padic()) throw UsageError("log_prime on the real field");
  return std::log(static_cast<double>(p_));
}

std::string FieldSpec::token() const {
  return is_real() ? std::string("real") : "padic:" + std::to_string(p_);
}

FieldSpec FieldSpec::parse(const std::string& token) {
  if (token == "real") return real();
  const std::string prefix = "padic:";
  if (token.rfind(prefix, 0) == 0) {
    const auto digits = token.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("bad field token '" + token + "'");
    }
    return padic(std::stoull(digits));
  }
  throw UsageError("unknown field token '" + token + "'");
}

Valuation valuation(const Integer& n, std::uint64_t p) {
  if (n == 0) return Valuation::infinity();
  Integer rest;
  Integer prime(static_cast<unsigned long>(p));
  const auto v = mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), prime.get_mpz_t());
  return Valuation(static_cast<long>(v));
}

Valuation valuation(const Rational& x, std::uint64_t p) {
  if (!is_prime(p)) throw UsageError("valuation needs a prime, got " + std::to_string(p));
  if (x == 0) return Valuation::infinity();
  const auto num = valuation(Integer(x.get_num()), p);
  const auto den = valuation(Integer(x.get_den()), p);
  return Valuation(num.value() - den.value());
}

double Scalar::real() const {
  if (!is_real()) throw UsageError("scalar is rational, not real");
  return std::get<double>(value_);
}

const Rational& Scalar::rational() const {
  if (!is_rational()) throw UsageError("scalar is real, not rational");
  return std::get<Rational>(value_);
}

bool Scalar::is_zero() const {
  return is_real() ? std::get<double>(value_) == 0.0 : std::get<Rational>(value_) == 0;
}

namespace {

void require_same_kind(const Scalar& a, const Scalar& b) {
  if (a.is_real() != b.is_real()) throw UsageError("mixing real and rational scalars");
}

}  // namespace

Scalar Scalar::operator+(const Scalar& o) const {
  require_same_kind(*this, o);
  if (is_real()) return Scalar(real() + o.real());
  return Scalar(Rational(rational() + o.rational()));
}

Scalar Scalar::operator-(const Scalar& o) const {
  require_same_kind(*this, o);
  if (is_real()) return Scalar(real() - o.real());
  return Scalar(Rational(rational() - o.rational()));
}

Scalar Scalar::operator*(const Scalar& o) const {
  require_same_kind(*this, o);
  if (is_real()) return Scalar(real() * o.real());
  return Scalar(Rational(rational() * o.rational()));
}

Scalar Scalar::operator-() const {
  if (is_real()) return Scalar(-real());
  return Scalar(Rational(-rational()));
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw ArithmeticError("inverse of zero");
  if (is_real()) return Scalar(1.0 / real());
  return Scalar(Rational(1 / rational()));
}

double abs_value(const Scalar& x, const FieldSpec& f) {
  if (f.is_real()) {
    if (!x.is_real()) throw UsageError("rational scalar used with the real field");
    return std::fabs(x.real());
  }
  if (!x.is_rational()) throw UsageError("real scalar used with a p-adic field");
  const auto v = valuation(x.rational(), f.prime());
  if (v.is_infinite()) return 0.0;
  return std::pow(static_cast<double>(f.prime()), static_cast<double>(-v.value()));
}

Rational padic_abs_exact(const Rational& x, std::uint64_t p) {
  const auto v = valuation(x, p);
  if (v.is_infinite()) return Rational(0);
  Integer power;
  mpz_ui_pow_ui(power.get_mpz_t(), p, static_cast<unsigned long>(std::labs(v.value())));
  Rational out = v.value() >= 0 ? Rational(Integer(1), power) : Rational(power, Integer(1));
  out.canonicalize();
  return out;
}

std::ostream& operator<<(std::ostream& os, const Scalar& x) {
  if (x.is_real()) return os << x.real();
  return os << x.rational().get_str();
}

}  // namespace mwl
