#include "mwl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mwl/errors.hpp"
#include "mwl/linalg.hpp"

namespace mwl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Rational exact_determinant(std::vector<Rational> a, std::size_t n) {
  Rational det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && a[pivot * n + c] == 0) ++pivot;
    if (pivot == n) return Rational(0);
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[pivot * n + k]);
      det = -det;
    }
    const Rational d = a[c * n + c];
    det *= d;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r * n + c] == 0) continue;
      const Rational f = a[r * n + c] / d;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  det.canonicalize();
  return det;
}

template <class T>
std::vector<T> submatrix(std::span<const T> a, std::size_t n, const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols) {
  std::vector<T> out;
  out.reserve(rows.size() * cols.size());
  for (auto r : rows) {
    for (auto c : cols) out.push_back(a[r * n + c]);
  }
  return out;
}

long min_minor_valuation(const Matrix& g, std::size_t k) {
  const auto p = g.field().prime();
  const auto subsets = k_subsets_colex(g.dim(), k);
  Valuation best = Valuation::infinity();
  for (const auto& rows : subsets) {
    for (const auto& cols : subsets) {
      const auto minor = exact_determinant(submatrix(g.exact_data(), g.dim(), rows, cols), k);
      best = std::min(best, valuation(minor, p));
    }
  }
  if (best.is_infinite()) throw DomainError("all k x k minors vanish: matrix is singular");
  return best.value();
}

}  // namespace

Matrix::Matrix(FieldSpec field, std::size_t d) : field_(field), d_(d) {
  if (d == 0) throw UsageError("matrix dimension must be >= 1");
  if (field_.is_real()) {
    real_.assign(d * d, 0.0);
  } else {
    exact_.assign(d * d, Rational(0));
  }
}

Matrix Matrix::identity(FieldSpec field, std::size_t d) {
  Matrix m(field, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (field.is_real()) {
      m.real_[i * d + i] = 1.0;
    } else {
      m.exact_[i * d + i] = 1;
    }
  }
  return m;
}

Matrix Matrix::real(std::size_t d, std::vector<double> entries) {
  if (entries.size() != d * d) throw UsageError("entry count does not match d*d");
  Matrix m(FieldSpec::real(), d);
  m.real_ = std::move(entries);
  return m;
}

Matrix Matrix::padic(std::uint64_t p, std::size_t d, std::vector<Rational> entries) {
  if (entries.size() != d * d) throw UsageError("entry count does not match d*d");
  Matrix m(FieldSpec::padic(p), d);
  for (auto& e : entries) e.canonicalize();
  m.exact_ = std::move(entries);
  return m;
}

Matrix Matrix::diagonal(FieldSpec field, std::span<const Scalar> diag) {
  Matrix m(field, diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
  return m;
}

Matrix Matrix::rotation(std::size_t d, std::size_t i, std::size_t j, double theta) {
  if (i >= d || j >= d || i == j) throw UsageError("bad rotation plane");
  Matrix m = identity(FieldSpec::real(), d);
  const double c = std::cos(theta), s = std::sin(theta);
  m.real_[i * d + i] = c;
  m.real_[i * d + j] = -s;
  m.real_[j * d + i] = s;
  m.real_[j * d + j] = c;
  return m;
}

Scalar Matrix::at(std::size_t i, std::size_t j) const {
  if (i >= d_ || j >= d_) throw RangeError("matrix index out of range");
  if (field_.is_real()) return Scalar(real_[i * d_ + j]);
  return Scalar(exact_[i * d_ + j]);
}

void Matrix::set(std::size_t i, std::size_t j, const Scalar& x) {
  if (i >= d_ || j >= d_) throw RangeError("matrix index out of range");
  if (field_.is_real()) {
    real_[i * d_ + j] = x.real();
  } else {
    exact_[i * d_ + j] = x.rational();
  }
}

bool Matrix::is_zero() const {
  if (field_.is_real()) return std::all_of(real_.begin(), real_.end(), [](double x) { return x == 0.0; });
  return std::all_of(exact_.begin(), exact_.end(), [](const Rational& x) { return x == 0; });
}

Matrix Matrix::transpose() const {
  Matrix t(field_, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      if (field_.is_real()) {
        t.real_[j * d_ + i] = real_[i * d_ + j];
      } else {
        t.exact_[j * d_ + i] = exact_[i * d_ + j];
      }
    }
  }
  return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
  require_same_shape(*this, o);
  Matrix c(field_, d_);
  if (field_.is_real()) {
    c.real_ = linalg::multiply(real_, o.real_, d_);
    return c;
  }
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t k = 0; k < d_; ++k) {
      const Rational& aik = exact_[i * d_ + k];
      if (aik == 0) continue;
      for (std::size_t j = 0; j < d_; ++j) c.exact_[i * d_ + j] += aik * o.exact_[k * d_ + j];
    }
  }
  return c;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.field_ == b.field_ && a.d_ == b.d_ && a.real_ == b.real_ && a.exact_ == b.exact_;
}

double CartanVector::kbar(std::size_t k) const {
  if (k > kappas.size()) throw RangeError("kbar index out of range");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += kappas[i];
  return s;
}

bool CartanVector::is_non_increasing(double tol) const {
  for (std::size_t i = 0; i + 1 < kappas.size(); ++i) {
    if (kappas[i + 1] > kappas[i] + tol) return false;
  }
  return true;
}

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (!(a.field() == b.field())) throw UsageError("matrices live over different fields");
  if (a.dim() != b.dim()) throw UsageError("matrix dimensions differ");
}

Scalar determinant(const Matrix& g) {
  const auto n = g.dim();
  if (g.field().is_real()) {
    return Scalar(linalg::determinant({g.real_data().begin(), g.real_data().end()}, n));
  }
  return Scalar(exact_determinant({g.exact_data().begin(), g.exact_data().end()}, n));
}

Matrix inverse(const Matrix& g) {
  const auto n = g.dim();
  if (g.field().is_real()) {
    auto inv = linalg::inverse({g.real_data().begin(), g.real_data().end()}, n);
    if (inv.empty()) throw DomainError("singular matrix has no inverse");
    return Matrix::real(n, std::move(inv));
  }
  std::vector<Rational> a(g.exact_data().begin(), g.exact_data().end());
  std::vector<Rational> inv(n * n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && a[pivot * n + c] == 0) ++pivot;
    if (pivot == n) throw DomainError("singular matrix has no inverse");
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a[c * n + k], a[pivot * n + k]);
        std::swap(inv[c * n + k], inv[pivot * n + k]);
      }
    }
    const Rational d = a[c * n + c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c * n + k] /= d;
      inv[c * n + k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r * n + c] == 0) continue;
      const Rational f = a[r * n + c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[c * n + k];
        inv[r * n + k] -= f * inv[c * n + k];
      }
    }
  }
  return Matrix::padic(g.field().prime(), n, std::move(inv));
}

double kappa(const Matrix& g) {
  if (g.is_zero()) return kNegInf;
  if (g.field().is_real()) return std::log(singular_values(g).front());
  Valuation best = Valuation::infinity();
  for (const auto& x : g.exact_data()) best = std::min(best, valuation(x, g.field().prime()));
  return -static_cast<double>(best.value()) * g.field().log_prime();
}

double big_n(const Matrix& g) {
  if (g.field().is_padic()) {
    // Keep the sum exact in units of log p.
    const auto p = g.field().prime();
    Valuation vg = Valuation::infinity(), vinv = Valuation::infinity();
    const auto inv = inverse(g);
    for (const auto& x : g.exact_data()) vg = std::min(vg, valuation(x, p));
    for (const auto& x : inv.exact_data()) vinv = std::min(vinv, valuation(x, p));
    return -static_cast<double>(vg.value() + vinv.value()) * g.field().log_prime();
  }
  return kappa(g) + kappa(inverse(g));
}

std::vector<double> singular_values(const Matrix& g) {
  if (!g.field().is_real()) throw UsageError("singular_values needs a real matrix");
  return linalg::singular_values(g.real_data(), g.dim(), g.dim());
}

std::vector<std::vector<std::size_t>> k_subsets_colex(std::size_t d, std::size_t k) {
  if (k < 1 || k > d) throw UsageError(fmt::format("subset size {} out of range 1..{}", k, d));
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    // Colex successor: bump the lowest position that can move up.
    std::size_t i = 0;
    while (i < k && s[i] + 1 == (i + 1 < k ? s[i + 1] : d)) ++i;
    if (i == k) break;
    ++s[i];
    for (std::size_t j = 0; j < i; ++j) s[j] = j;
  }
  return out;
}

Matrix exterior_power(const Matrix& g, std::size_t k) {
  const auto d = g.dim();
  if (k < 1 || k > d) throw UsageError(fmt::format("exterior power {} out of range 1..{}", k, d));
  const auto subsets = k_subsets_colex(d, k);
  const auto m = subsets.size();
  Matrix out(g.field(), m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (g.field().is_real()) {
        out.set(r, c, Scalar(linalg::determinant(submatrix(g.real_data(), d, subsets[r], subsets[c]), k)));
      } else {
        out.set(r, c, Scalar(exact_determinant(submatrix(g.exact_data(), d, subsets[r], subsets[c]), k)));
      }
    }
  }
  return out;
}

std::vector<long> padic_elementary_valuations(const Matrix& g) {
  if (!g.field().is_padic()) throw UsageError("elementary valuations need a p-adic matrix");
  std::vector<long> e(g.dim());
  long prev = 0;
  for (std::size_t k = 1; k <= g.dim(); ++k) {
    const long cur = min_minor_valuation(g, k);
    e[k - 1] = cur - prev;
    prev = cur;
  }
  return e;
}

CartanVector cartan(const Matrix& g) {
  CartanVector out;
  if (g.field().is_real()) {
    for (double s : singular_values(g)) out.kappas.push_back(std::log(s));
    return out;
  }
  const double lp = g.field().log_prime();
  for (long e : padic_elementary_valuations(g)) out.kappas.push_back(-static_cast<double>(e) * lp);
  return out;
}

CartanVector cartan_via_exterior(const Matrix& g) {
  if (g.field().is_padic()) return cartan(g);
  CartanVector out;
  double prev = 0.0;
  for (std::size_t k = 1; k <= g.dim(); ++k) {
    const auto w = exterior_power(g, k);
    const double kbar = 0.5 * std::log(linalg::squared_operator_norm(w.real_data(), w.dim(), w.dim()));
    out.kappas.push_back(kbar - prev);
    prev = kbar;
  }
  return out;
}

double log_coefficient(std::span<const Scalar> f, const Matrix& g, std::span<const Scalar> v) {
  const auto d = g.dim();
  if (f.size() != d || v.size() != d) throw UsageError("covector/vector dimension mismatch");
  const Scalar zero = g.field().is_real() ? Scalar(0.0) : Scalar(Rational(0));
  Scalar acc = zero;
  for (std::size_t i = 0; i < d; ++i) {
    Scalar row = zero;
    for (std::size_t j = 0; j < d; ++j) row = row + g.at(i, j) * v[j];
    acc = acc + f[i] * row;
  }
  if (acc.is_zero()) return kNegInf;
  return std::log(abs_value(acc, g.field()));
}

bool approx_equal(const Matrix& a, const Matrix& b, double rel) {
  if (!(a.field() == b.field()) || a.dim() != b.dim()) return false;
  if (a.field().is_padic()) return a == b;
  double scale = 1.0;
  for (double x : a.real_data()) scale = std::max(scale, std::fabs(x));
  for (double x : b.real_data()) scale = std::max(scale, std::fabs(x));
  for (std::size_t i = 0; i < a.real_data().size(); ++i) {
    if (std::fabs(a.real_data()[i] - b.real_data()[i]) > rel * scale) return false;
  }
  return true;
}

void write_matrix(std::ostream& os, const Matrix& g) {
  os << g.field().token() << ' ' << g.dim() << '\n';
  for (std::size_t i = 0; i < g.dim(); ++i) {
    for (std::size_t j = 0; j < g.dim(); ++j) {
      if (j) os << ' ';
      if (g.field().is_real()) {
        os << fmt::format("{:.17g}", g.real_at(i, j));
      } else {
        os << g.exact_at(i, j).get_str();
      }
    }
    os << '\n';
  }
}

std::vector<Matrix> read_matrices(std::istream& is) {
  std::vector<Matrix> out;
  std::string line;
  auto next_content_line = [&](std::string& l) {
    while (std::getline(is, l)) {
      const auto hash = l.find('#');
      if (hash != std::string::npos) l.erase(hash);
      if (l.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  while (next_content_line(line)) {
    std::istringstream header(line);
    std::string token;
    std::size_t d = 0;
    if (!(header >> token >> d) || d == 0) throw UsageError("bad matrix header '" + line + "'");
    const auto field = FieldSpec::parse(token);
    Matrix m(field, d);
    for (std::size_t i = 0; i < d; ++i) {
      if (!next_content_line(line)) throw UsageError("matrix block truncated");
      std::istringstream row(line);
      for (std::size_t j = 0; j < d; ++j) {
        std::string entry;
        if (!(row >> entry)) throw UsageError("matrix row too short: '" + line + "'");
        if (field.is_real()) {
          std::size_t used = 0;
          const double x = std::stod(entry, &used);
          if (used != entry.size()) throw UsageError("bad real entry '" + entry + "'");
          m.set(i, j, Scalar(x));
        } else {
          Rational q;
          if (q.set_str(entry, 10) != 0) throw UsageError("bad rational entry '" + entry + "'");
          if (q.get_den() == 0) throw UsageError("zero denominator in '" + entry + "'");
          q.canonicalize();
          m.set(i, j, Scalar(q));
        }
      }
      std::string extra;
      if (row >> extra) throw UsageError("matrix row too long: '" + line + "'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string to_text(const Matrix& g) {
  std::ostringstream os;
  write_matrix(os, g);
  return os.str();
}

Matrix matrix_from_text(const std::string& text) {
  std::istringstream is(text);
  auto ms = read_matrices(is);
  if (ms.size() != 1) throw UsageError("expected exactly one matrix block");
  return std::move(ms.front());
}

}  // namespace mwl
