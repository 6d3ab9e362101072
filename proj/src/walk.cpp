#include "mwl/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "mwl/errors.hpp"
#include "mwl/linalg.hpp"

namespace mwl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Products are rescaled by a power of two only when the max entry leaves
// [2^-kRescaleBits, 2^kRescaleBits]; inside that band the scale is untouched,
// which keeps commuting products bit-exact.
constexpr int kRescaleBits = 30;

void rescale(ScaledMatrix& s) {
  double mx = 0.0;
  for (double x : s.m) mx = std::max(mx, std::fabs(x));
  if (mx == 0.0 || !std::isfinite(mx)) return;
  int e = 0;
  std::frexp(mx, &e);
  if (e > kRescaleBits || e < -kRescaleBits) {
    for (double& x : s.m) x = std::ldexp(x, -e);
    s.log_scale += e * std::numbers::ln2;
  }
}

}  // namespace

ScaledMatrix ScaledMatrix::identity(std::size_t d) {
  ScaledMatrix s;
  s.dim = d;
  s.m.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) s.m[i * d + i] = 1.0;
  return s;
}

ScaledMatrix ScaledMatrix::from(const Matrix& g) {
  if (!g.field().is_real()) throw UsageError("scaled matrices are real");
  return normalize(0.0, g.dim(), {g.real_data().begin(), g.real_data().end()});
}

ScaledMatrix ScaledMatrix::normalize(double log_scale, std::size_t d, std::vector<double> entries) {
  if (entries.size() != d * d) throw UsageError("entry count does not match d*d");
  ScaledMatrix s{log_scale, d, std::move(entries)};
  rescale(s);
  return s;
}

ScaledMatrix ScaledMatrix::operator*(const ScaledMatrix& o) const {
  if (dim != o.dim) throw UsageError("scaled matrix dimensions differ");
  ScaledMatrix c{log_scale + o.log_scale, dim, linalg::multiply(m, o.m, dim)};
  rescale(c);
  return c;
}

double ScaledMatrix::log_norm() const {
  if (std::all_of(m.begin(), m.end(), [](double x) { return x == 0.0; })) return kNegInf;
  return log_scale + std::log(linalg::singular_values(m, dim, dim).front());
}

Matrix ScaledMatrix::to_matrix() const {
  const double f = std::exp(log_scale);
  if (!std::isfinite(f) || f == 0.0) throw RangeError("scaled matrix is not representable in double precision");
  std::vector<double> e(m);
  for (double& x : e) x *= f;
  return Matrix::real(dim, std::move(e));
}

Step Step::from_real(const Matrix& g) {
  if (!g.field().is_real()) throw UsageError("from_real needs a real matrix");
  Step s;
  s.field = g.field();
  s.d = g.dim();
  for (std::size_t k = 1; k < s.d; ++k) s.wedges.push_back(ScaledMatrix::from(exterior_power(g, k)));
  s.cartan = mwl::cartan(g);
  for (double x : s.cartan.kappas) s.log_abs_det += x;
  if (!std::isfinite(s.log_abs_det)) throw DomainError("walk steps must be invertible");
  s.exact = g;
  return s;
}

Step Step::from_padic(const Matrix& g) {
  if (!g.field().is_padic()) throw UsageError("from_padic needs a p-adic matrix");
  Step s;
  s.field = g.field();
  s.d = g.dim();
  s.elementary = padic_elementary_valuations(g);
  const double lp = g.field().log_prime();
  for (long e : s.elementary) {
    s.cartan.kappas.push_back(-static_cast<double>(e) * lp);
    s.log_abs_det -= static_cast<double>(e) * lp;
  }
  s.exact = g;
  return s;
}

WalkBuffer::WalkBuffer(std::vector<Step> steps) : field_(FieldSpec::real()), d_(0), steps_(std::move(steps)) {
  if (steps_.empty()) throw UsageError("walk needs at least one step");
  field_ = steps_.front().field;
  d_ = steps_.front().d;
  if (d_ < 2) throw UsageError("walks need dimension >= 2");
  const std::size_t len = steps_.size();
  for (const auto& s : steps_) {
    if (!(s.field == field_) || s.d != d_) throw UsageError("walk steps differ in field or dimension");
  }

  kappa_prefix_.assign(len + 1, 0.0);
  cartan_prefix_.assign(len + 1, std::vector<double>(d_, 0.0));
  log_det_prefix_.assign(len + 1, 0.0);
  for (std::size_t n = 0; n < len; ++n) {
    kappa_prefix_[n + 1] = kappa_prefix_[n] + steps_[n].kappa();
    log_det_prefix_[n + 1] = log_det_prefix_[n] + steps_[n].log_abs_det;
    for (std::size_t i = 0; i < d_; ++i) cartan_prefix_[n + 1][i] = cartan_prefix_[n][i] + steps_[n].cartan[i];
  }

  if (field_.is_padic()) {
    elem_prefix_.assign(len + 1, std::vector<long>(d_, 0));
    exact_prefix_.reserve(len + 1);
    exact_prefix_.push_back(Matrix::identity(field_, d_));
    for (std::size_t n = 0; n < len; ++n) {
      for (std::size_t i = 0; i < d_; ++i) elem_prefix_[n + 1][i] = elem_prefix_[n][i] + steps_[n].elementary[i];
      exact_prefix_.push_back(exact_prefix_.back() * *steps_[n].exact);
    }
    return;
  }

  wedge_prefix_.resize(d_ - 1);
  for (std::size_t k = 1; k < d_; ++k) {
    const std::size_t wd = steps_.front().wedges[k - 1].dim;
    auto& pre = wedge_prefix_[k - 1];
    pre.reserve(len + 1);
    pre.push_back(ScaledMatrix::identity(wd));
    for (std::size_t n = 0; n < len; ++n) pre.push_back(pre.back() * steps_[n].wedges[k - 1]);
  }
  kbar_cache_.resize(len + 1);
}

void WalkBuffer::check(std::size_t m, std::size_t n) const {
  if (m > n || n > steps_.size()) {
    throw RangeError(fmt::format("window [{}, {}) outside walk of length {}", m, n, steps_.size()));
  }
}

double WalkBuffer::kappa_sum(std::size_t m, std::size_t n) const {
  check(m, n);
  return kappa_prefix_[n] - kappa_prefix_[m];
}

std::vector<double> WalkBuffer::cartan_sum(std::size_t m, std::size_t n) const {
  check(m, n);
  std::vector<double> out(d_);
  for (std::size_t i = 0; i < d_; ++i) out[i] = cartan_prefix_[n][i] - cartan_prefix_[m][i];
  return out;
}

std::vector<double> WalkBuffer::real_kbars(std::size_t m, std::size_t n) const {
  std::vector<double> kbar(d_, 0.0);
  if (m == n) return kbar;
  if (m == 0 && kbar_cache_[n]) return *kbar_cache_[n];
  for (std::size_t k = 1; k < d_; ++k) {
    if (m == 0) {
      kbar[k - 1] = wedge_prefix_[k - 1][n].log_norm();
    } else {
      ScaledMatrix acc = steps_[m].wedges[k - 1];
      for (std::size_t j = m + 1; j < n; ++j) acc = acc * steps_[j].wedges[k - 1];
      kbar[k - 1] = acc.log_norm();
    }
  }
  kbar[d_ - 1] = log_det_prefix_[n] - log_det_prefix_[m];
  if (m == 0) kbar_cache_[n] = kbar;
  return kbar;
}

std::vector<long> WalkBuffer::padic_elementary(std::size_t m, std::size_t n) const {
  if (m == n) return std::vector<long>(d_, 0);
  if (m == 0) return padic_elementary_valuations(exact_prefix_[n]);
  return padic_elementary_valuations(product(m, n));
}

double WalkBuffer::kappa_window(std::size_t m, std::size_t n) const {
  check(m, n);
  if (m == n) return 0.0;
  if (field_.is_padic()) return -static_cast<double>(padic_elementary(m, n).front()) * field_.log_prime();
  if (m == 0) return real_kbars(0, n).front();
  ScaledMatrix acc = steps_[m].wedges[0];
  for (std::size_t j = m + 1; j < n; ++j) acc = acc * steps_[j].wedges[0];
  return acc.log_norm();
}

CartanVector WalkBuffer::cartan_window(std::size_t m, std::size_t n) const {
  check(m, n);
  CartanVector out;
  out.kappas.resize(d_);
  if (field_.is_padic()) {
    const auto e = padic_elementary(m, n);
    for (std::size_t i = 0; i < d_; ++i) out.kappas[i] = -static_cast<double>(e[i]) * field_.log_prime();
    return out;
  }
  const auto kbar = real_kbars(m, n);
  double prev = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    out.kappas[i] = kbar[i] - prev;
    prev = kbar[i];
  }
  return out;
}

double WalkBuffer::delta_kappa(std::size_t m, std::size_t n) const {
  check(m, n);
  if (m == n) return 0.0;
  if (field_.is_padic()) {
    const long units = padic_elementary(m, n).front() - (elem_prefix_[n][0] - elem_prefix_[m][0]);
    return -static_cast<double>(units) * field_.log_prime();
  }
  return kappa_window(m, n) - kappa_sum(m, n);
}

std::vector<double> WalkBuffer::delta_cartan(std::size_t m, std::size_t n) const {
  check(m, n);
  std::vector<double> out(d_, 0.0);
  if (m == n) return out;
  if (field_.is_padic()) {
    const auto e = padic_elementary(m, n);
    for (std::size_t i = 0; i < d_; ++i) {
      const long units = e[i] - (elem_prefix_[n][i] - elem_prefix_[m][i]);
      out[i] = -static_cast<double>(units) * field_.log_prime();
    }
    return out;
  }
  const auto c = cartan_window(m, n);
  const auto s = cartan_sum(m, n);
  for (std::size_t i = 0; i < d_; ++i) out[i] = c[i] - s[i];
  return out;
}

double WalkBuffer::delta_kappa_pair(std::size_t l, std::size_t m, std::size_t n) const {
  check(l, m);
  check(m, n);
  if (field_.is_padic()) {
    auto e1 = [&](std::size_t a, std::size_t b) { return a == b ? 0L : padic_elementary(a, b).front(); };
    const long units = e1(l, n) - e1(l, m) - e1(m, n);
    return -static_cast<double>(units) * field_.log_prime();
  }
  return kappa_window(l, n) - kappa_window(l, m) - kappa_window(m, n);
}

Matrix WalkBuffer::product(std::size_t m, std::size_t n) const {
  check(m, n);
  if (field_.is_padic()) {
    if (m == 0) return exact_prefix_[n];
    Matrix acc = Matrix::identity(field_, d_);
    for (std::size_t j = m; j < n; ++j) acc = acc * *steps_[j].exact;
    return acc;
  }
  ScaledMatrix acc = ScaledMatrix::identity(d_);
  for (std::size_t j = m; j < n; ++j) acc = acc * steps_[j].wedges[0];
  return acc.to_matrix();
}

}  // namespace mwl
