#include "mwl/word.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// -v_p-minimum of the entries, i.e. κ in units of log p. nullopt for zero.
std::optional<long> padic_kappa_units(const Matrix& g) {
  Valuation best = Valuation::infinity();
  for (const auto& x : g.exact_data()) best = std::min(best, valuation(x, g.field().prime()));
  if (best.is_infinite()) return std::nullopt;
  return -best.value();
}

void check_window(const Word& w, std::size_t m, std::size_t n) {
  if (m > n || n > w.size()) throw RangeError(fmt::format("window [{}, {}) outside word of length {}", m, n, w.size()));
}

}  // namespace

Word::Word(std::vector<Matrix> letters) : letters_(std::move(letters)) {
  for (const auto& g : letters_) require_same_shape(letters_.front(), g);
}

const FieldSpec& Word::field() const {
  if (letters_.empty()) throw UsageError("empty word has no field");
  return letters_.front().field();
}

std::size_t Word::dim() const {
  if (letters_.empty()) throw UsageError("empty word has no dimension");
  return letters_.front().dim();
}

void Word::push_back(Matrix g) {
  if (!letters_.empty()) require_same_shape(letters_.front(), g);
  letters_.push_back(std::move(g));
}

Word Word::concat(const Word& v) const {
  Word out = *this;
  for (const auto& g : v.letters_) out.push_back(g);
  return out;
}

Word Word::window(std::size_t m, std::size_t n) const {
  check_window(*this, m, n);
  return Word(std::vector<Matrix>(letters_.begin() + static_cast<std::ptrdiff_t>(m),
                                  letters_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Matrix product(const Word& w, std::size_t m, std::size_t n) {
  check_window(w, m, n);
  if (w.empty()) throw UsageError("product of an empty word");
  Matrix acc = Matrix::identity(w.field(), w.dim());
  for (std::size_t k = m; k < n; ++k) acc = acc * w[k];
  return acc;
}

double delta_kappa(const Word& w, std::size_t a, std::size_t b) {
  check_window(w, a, b);
  if (a == b) return 0.0;
  const Matrix prod = product(w, a, b);
  if (w.field().is_padic()) {
    long units = 0;
    for (std::size_t k = a; k < b; ++k) {
      const auto u = padic_kappa_units(w[k]);
      if (!u) return kNegInf;
      units -= *u;
    }
    const auto up = padic_kappa_units(prod);
    if (!up) return kNegInf;
    units += *up;
    return static_cast<double>(units) * w.field().log_prime();
  }
  double total = kappa(prod);
  for (std::size_t k = a; k < b; ++k) {
    const double kk = kappa(w[k]);
    if (kk == kNegInf) return kNegInf;
    total -= kk;
  }
  return total;
}

double delta_kappa(const Word& w) { return delta_kappa(w, 0, w.size()); }

double delta_kappa_pair(const Matrix& g, const Matrix& h) {
  require_same_shape(g, h);
  return delta_kappa(Word({g, h}));
}

std::vector<double> delta_cartan_pair(const Matrix& g, const Matrix& h) {
  require_same_shape(g, h);
  const auto cgh = cartan(g * h);
  const auto cg = cartan(g);
  const auto ch = cartan(h);
  std::vector<double> out(g.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cgh[i] - cg[i] - ch[i];
  return out;
}

Subordination subordinate_check(const Word& sub, const Word& sup) {
  Subordination out;
  if (!sub.empty() && !sup.empty()) require_same_shape(sub[0], sup[0]);
  const std::size_t len = sup.size();
  const std::size_t letters = sub.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  auto matches = [&](const Matrix& a, const Matrix& b) {
    return a.field().is_padic() ? a == b : approx_equal(a, b, 1e-9);
  };

  // parent[k][i]: previous end index for a partial witness covering k letters ending at i.
  std::vector<std::vector<std::size_t>> parent(letters + 1, std::vector<std::size_t>(len + 1, kNone));
  std::vector<std::vector<bool>> reached(letters + 1, std::vector<bool>(len + 1, false));
  std::fill(reached[0].begin(), reached[0].end(), true);
  for (std::size_t k = 0; k < letters; ++k) {
    for (std::size_t i = 0; i <= len; ++i) {
      if (!reached[k][i]) continue;
      Matrix acc = Matrix::identity(sub.field(), sub.dim());
      for (std::size_t j = i; j <= len; ++j) {
        if (j > i) acc = acc * sup[j - 1];
        if (!reached[k + 1][j] && matches(acc, sub[k])) {
          reached[k + 1][j] = true;
          parent[k + 1][j] = i;
        }
      }
    }
  }

  std::size_t end = kNone;
  for (std::size_t i = 0; i <= len; ++i) {
    if (reached[letters][i]) {
      end = i;
      break;
    }
  }
  if (end == kNone) return out;

  std::vector<std::size_t> witness(letters + 1);
  witness[letters] = end;
  for (std::size_t k = letters; k > 0; --k) witness[k - 1] = parent[k][witness[k]];

  out.delta_sub = sub.empty() ? 0.0 : delta_kappa(sub);
  out.delta_sup = sup.empty() ? 0.0 : delta_kappa(sup);
  out.monotone = out.delta_sup <= out.delta_sub + 1e-9;
  out.witness = std::move(witness);
  return out;
}

WindowCancellation window_cancellation(const Word& w, std::size_t a, std::size_t b) {
  check_window(w, a, b);
  WindowCancellation out;
  if (a == b) return out;
  std::vector<double> n(b - a);
  for (std::size_t k = a; k < b; ++k) n[k - a] = big_n(w[k]);

  double total = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    total += n[i];
    if (n[i] > n[arg]) arg = i;
  }
  out.argmax = a + arg;
  out.r = total - n[arg];

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      if (j != i) s += n[j];
    }
    best = std::min(best, s);
  }
  out.r_min_form = best;
  const double diff = std::fabs(out.r - out.r_min_form);
  if (diff > 1e-12 * (1.0 + total)) throw NumericError("the two forms of R disagree", diff);

  out.delta_kappa = delta_kappa(w, a, b);
  out.bound_ok = std::fabs(out.delta_kappa) <= out.r + 1e-9;
  return out;
}

GridGap grid_gap(std::span<const std::uint64_t> p, std::uint64_t n) {
  std::uint64_t prefix = 0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    if (p[l] == 0) throw UsageError("grid steps p_k must be >= 1");
    const std::uint64_t next = prefix + p[l];
    if (n < next) {
      GridGap g;
      g.floor = prefix;
      g.ceil = n == prefix ? prefix : next;
      g.gap = g.ceil - g.floor;
      g.index = l;
      return g;
    }
    prefix = next;
  }
  if (n == prefix) return GridGap{prefix, prefix, 0, p.size()};
  throw RangeError(fmt::format("prefix sums stop at {} < n = {}", prefix, n));
}

}  // namespace mwl
