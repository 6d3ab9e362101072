#pragma once

// Two-parameter processes S_{m,n} (0 <= m <= n <= n_max) with values in V^dim,
// their triangle defects ΔS(n_0, ..., n_j) and the dyadic dichotomy rewriting
// of S_{0,n}.

#include <bit>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "mwl/errors.hpp"

namespace mwl {

template <class P>
concept ProcessSource = requires(const P& p, std::size_t m, std::size_t n) {
  typename P::value_type;
  { p.n_max() } -> std::convertible_to<std::size_t>;
  { p.dim() } -> std::convertible_to<std::size_t>;
  { p.value(m, n) } -> std::convertible_to<std::vector<typename P::value_type>>;
};

/// Full triangle of values; S_{n,n} = 0 is stored and cannot be changed.
template <class T>
class ProcessTable {
 public:
  using value_type = T;

  ProcessTable(std::size_t n_max, std::size_t dim)
      : n_max_(n_max), dim_(dim), data_((n_max + 1) * (n_max + 2) / 2 * dim, T(0)) {
    if (dim == 0) throw UsageError("process dimension must be >= 1");
  }

  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const T> at(std::size_t m, std::size_t n) const { return {data_.data() + offset(m, n), dim_}; }
  std::vector<T> value(std::size_t m, std::size_t n) const {
    auto s = at(m, n);
    return {s.begin(), s.end()};
  }

  /// Throws UsageError when m == n (the diagonal is pinned to zero).
  void set(std::size_t m, std::size_t n, std::span<const T> v) {
    if (m == n) throw UsageError("S_{n,n} is fixed to 0");
    if (v.size() != dim_) throw UsageError("value dimension mismatch");
    std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(offset(m, n)));
  }
  void set(std::size_t m, std::size_t n, T v) { set(m, n, std::span<const T>(&v, 1)); }

  /// Builds the table of an arbitrary source.
  template <ProcessSource P>
  static ProcessTable from_source(const P& src) {
    ProcessTable t(src.n_max(), src.dim());
    for (std::size_t n = 1; n <= t.n_max_; ++n) {
      for (std::size_t m = 0; m < n; ++m) {
        const auto v = src.value(m, n);
        t.set(m, n, std::span<const T>(v));
      }
    }
    return t;
  }

 private:
  std::size_t offset(std::size_t m, std::size_t n) const {
    if (m > n || n > n_max_) throw RangeError(fmt::format("S_({},{}) outside 0 <= m <= n <= {}", m, n, n_max_));
    return (n * (n + 1) / 2 + m) * dim_;
  }

  std::size_t n_max_;
  std::size_t dim_;
  std::vector<T> data_;
};

/// Source computed on demand by a callback, e.g. S_{m,n} = Δκ(γ̃_{m,n}) from
/// cached prefix data of a walk.
template <class T>
class LazyProcess {
 public:
  using value_type = T;
  using Fn = std::function<std::vector<T>(std::size_t, std::size_t)>;

  LazyProcess(std::size_t n_max, std::size_t dim, Fn fn) : n_max_(n_max), dim_(dim), fn_(std::move(fn)) {}

  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t dim() const noexcept { return dim_; }
  std::vector<T> value(std::size_t m, std::size_t n) const {
    if (m > n || n > n_max_) throw RangeError(fmt::format("S_({},{}) outside 0 <= m <= n <= {}", m, n, n_max_));
    if (m == n) return std::vector<T>(dim_, T(0));
    auto v = fn_(m, n);
    if (v.size() != dim_) throw UsageError("lazy process returned a value of the wrong dimension");
    return v;
  }

 private:
  std::size_t n_max_;
  std::size_t dim_;
  Fn fn_;
};

/// ΔS(n_0, ..., n_j) = S_{n_0,n_j} − Σ S_{n_i,n_{i+1}} for weakly increasing indices, j >= 1.
template <ProcessSource P>
std::vector<typename P::value_type> delta_process(const P& s, std::span<const std::size_t> idx) {
  if (idx.size() < 2) throw UsageError("delta_process needs at least two indices");
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    if (idx[i] > idx[i + 1]) throw RangeError("delta_process indices must be weakly increasing");
  }
  auto out = s.value(idx.front(), idx.back());
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    const auto v = s.value(idx[i], idx[i + 1]);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] -= v[c];
  }
  return out;
}

template <ProcessSource P>
std::vector<typename P::value_type> delta_process(const P& s, std::initializer_list<std::size_t> idx) {
  return delta_process(s, std::span<const std::size_t>(idx.begin(), idx.size()));
}

enum class TermKind { Additive, Boundary, Dyadic };

/// Provenance of a dichotomy term.
///   Additive: S_k = S_{k,k+1}               (j = 0, k)
///   Boundary: ΔS(0, ⌊n⌋_{2^j}, ⌊n⌋_{2^{j-1}}) (j, k = 0)
///   Dyadic:   ΔS(2^j k, 2^j k + 2^{j-1}, 2^j (k+1))
struct TermLabel {
  TermKind kind;
  unsigned j;
  std::size_t k;
  std::size_t i0, i1, i2;  // indices; i2 unused (== i1) for additive terms
};

/// Labels of the dichotomy rewriting of S_{0,n}: n additive increments,
/// ⌊log2 n⌋ boundary defects and n − popcount(n) dyadic defects.
inline std::vector<TermLabel> dichotomy_labels(std::size_t n) {
  if (n == 0) throw RangeError("dichotomy needs n >= 1");
  const unsigned levels = static_cast<unsigned>(std::bit_width(n)) - 1;
  std::vector<TermLabel> out;
  out.reserve(2 * n + levels);
  for (std::size_t k = 0; k < n; ++k) out.push_back({TermKind::Additive, 0, k, k, k + 1, k + 1});
  for (unsigned j = 1; j <= levels; ++j) {
    const std::size_t step = std::size_t{1} << j;
    const std::size_t half = step >> 1;
    out.push_back({TermKind::Boundary, j, 0, 0, n / step * step, n / half * half});
    for (std::size_t k = 0; k < n / step; ++k) {
      out.push_back({TermKind::Dyadic, j, k, step * k, step * k + half, step * (k + 1)});
    }
  }
  return out;
}

template <class T>
struct Decomposition {
  std::size_t dim = 0;
  std::vector<TermLabel> labels;
  std::vector<T> values;  // dim entries per label

  std::span<const T> term(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::vector<T> total() const {
    std::vector<T> s(dim, T(0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t c = 0; c < dim; ++c) s[c] += values[i * dim + c];
    }
    return s;
  }
};

/// Exact rewriting S_{0,n} = Σ S_k + Σ_j [boundary_j + Σ_k dyadic_{j,k}].
template <ProcessSource P>
Decomposition<typename P::value_type> dichotomy_decompose(const P& s, std::size_t n) {
  using T = typename P::value_type;
  if (n == 0 || n > s.n_max()) throw RangeError(fmt::format("dichotomy needs 1 <= n <= {}, got {}", s.n_max(), n));
  Decomposition<T> out;
  out.dim = s.dim();
  out.labels = dichotomy_labels(n);
  out.values.resize(out.labels.size() * out.dim);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const auto& l = out.labels[i];
    T* dst = out.values.data() + i * out.dim;
    // Tables expose spans; other sources return fresh vectors.
    auto get = [&s](std::size_t m, std::size_t k) {
      if constexpr (requires { s.at(m, k); }) {
        return s.at(m, k);
      } else {
        return s.value(m, k);
      }
    };
    if (l.kind == TermKind::Additive) {
      const auto v = get(l.i0, l.i1);
      std::copy(v.begin(), v.end(), dst);
    } else {
      const auto a = get(l.i0, l.i2);
      const auto b = get(l.i0, l.i1);
      const auto c = get(l.i1, l.i2);
      for (std::size_t d = 0; d < out.dim; ++d) dst[d] = a[d] - b[d] - c[d];
    }
  }
  return out;
}

/// CSV dump: header "m,n,value" (or value_0..value_{d-1}), one row per m < n.
template <class T>
void write_csv(std::ostream& os, const ProcessTable<T>& t) {
  os << "m,n";
  if (t.dim() == 1) {
    os << ",value";
  } else {
    for (std::size_t c = 0; c < t.dim(); ++c) os << ",value_" << c;
  }
  os << '\n';
  for (std::size_t n = 1; n <= t.n_max(); ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      os << m << ',' << n;
      for (const auto& v : t.at(m, n)) {
        if constexpr (std::is_floating_point_v<T>) {
          os << ',' << fmt::format("{:.17g}", v);
        } else {
          os << ',' << v;
        }
      }
      os << '\n';
    }
  }
}

}  // namespace mwl
