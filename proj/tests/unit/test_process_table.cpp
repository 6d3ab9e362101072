#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "mwl/errors.hpp"
#include "mwl/process_table.hpp"
#include "mwl/random.hpp"

using namespace mwl;

namespace {

using Triple = std::tuple<int, std::size_t, std::size_t, std::size_t>;  // kind, i0, i1, i2

/// Literal evaluation of the dyadic rewriting, written without the library's
/// label generator: increments, then for each level j the boundary defect and
/// every dyadic interval [a, a + 2^j) fitting inside [0, n].
std::vector<Triple> oracle_terms(std::size_t n) {
  std::vector<Triple> t;
  for (std::size_t k = 0; k < n; ++k) t.emplace_back(0, k, k + 1, k + 1);
  std::size_t levels = 0;
  while ((std::size_t{2} << levels) <= n) ++levels;
  for (std::size_t j = 1; j <= levels; ++j) {
    std::size_t p = 1;
    for (std::size_t i = 0; i < j; ++i) p *= 2;
    const std::size_t fl = n - n % p, fh = n - n % (p / 2);
    t.emplace_back(1, 0, fl, fh);
    for (std::size_t a = 0; a + p <= n; a += p) t.emplace_back(2, a, a + p / 2, a + p);
  }
  return t;
}

/// Symbolic sum of the oracle terms as a linear combination of S_{m,n} symbols.
std::map<std::pair<std::size_t, std::size_t>, long> symbolic(const std::vector<Triple>& terms) {
  std::map<std::pair<std::size_t, std::size_t>, long> c;
  auto add = [&](std::size_t m, std::size_t n, long s) {
    if (m != n) c[{m, n}] += s;
  };
  for (const auto& [kind, a, b, e] : terms) {
    if (kind == 0) {
      add(a, b, 1);
    } else {
      add(a, e, 1);
      add(a, b, -1);
      add(b, e, -1);
    }
  }
  std::erase_if(c, [](const auto& kv) { return kv.second == 0; });
  return c;
}

ProcessTable<long long> random_int_table(Rng& rng, std::size_t n_max, std::size_t dim = 1) {
  ProcessTable<long long> t(n_max, dim);
  std::vector<long long> v(dim);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      for (auto& x : v) x = static_cast<long long>(rng.index(2001)) - 1000;
      t.set(m, n, std::span<const long long>(v));
    }
  }
  return t;
}

}  // namespace

TEST(ProcessTable, DiagonalIsPinnedAndRangeChecked) {
  ProcessTable<double> t(4, 1);
  EXPECT_EQ(t.at(2, 2)[0], 0.0);
  EXPECT_THROW(t.set(2, 2, 1.0), UsageError);
  EXPECT_THROW(t.at(3, 2), RangeError);
  EXPECT_THROW(t.at(0, 5), RangeError);
  EXPECT_THROW(ProcessTable<double>(3, 0), UsageError);
}

TEST(DeltaProcess, AdditiveTableVanishes) {
  Rng rng(1);
  std::vector<long long> inc(21);
  for (auto& x : inc) x = static_cast<long long>(rng.index(100));
  ProcessTable<long long> t(20, 1);
  for (std::size_t n = 1; n <= 20; ++n) {
    long long s = 0;
    for (std::size_t m = n; m-- > 0;) {
      s += inc[m];
      t.set(m, n, s);
    }
  }
  for (int r = 0; r < 200; ++r) {
    std::vector<std::size_t> idx(2 + rng.index(5));
    for (auto& i : idx) i = rng.index(21);
    std::sort(idx.begin(), idx.end());
    EXPECT_EQ(delta_process(t, idx)[0], 0);
  }
}

TEST(DeltaProcess, DegenerateFamilyIsZeroAndBadIndicesThrow) {
  Rng rng(2);
  const auto t = random_int_table(rng, 10);
  EXPECT_EQ(delta_process(t, {4, 4, 4})[0], 0);
  EXPECT_THROW(delta_process(t, {5, 3}), RangeError);
  EXPECT_THROW(delta_process(t, {3}), UsageError);
  EXPECT_THROW(delta_process(t, {3, 11}), RangeError);
}

TEST(DeltaProcess, TriangulationRecursion) {
  // ΔS(n_0..n_j) = ΔS(n_0, n_{j-1}, n_j) + ΔS(n_0..n_{j-1})
  Rng rng(3);
  const auto t = random_int_table(rng, 30, 2);
  for (int r = 0; r < 500; ++r) {
    std::vector<std::size_t> idx(3 + rng.index(6));
    for (auto& i : idx) i = rng.index(31);
    std::sort(idx.begin(), idx.end());
    const auto full = delta_process(t, idx);
    const std::size_t j = idx.size() - 1;
    const auto head = delta_process(t, std::span<const std::size_t>(idx.data(), j));
    const auto tri = delta_process(t, {idx[0], idx[j - 1], idx[j]});
    for (std::size_t c = 0; c < 2; ++c) ASSERT_EQ(full[c], head[c] + tri[c]);
  }
}

TEST(Dichotomy, SmallCases) {
  Rng rng(4);
  const auto t = random_int_table(rng, 4);
  const auto d1 = dichotomy_decompose(t, 1);
  ASSERT_EQ(d1.labels.size(), 1u);
  EXPECT_EQ(d1.labels[0].kind, TermKind::Additive);
  EXPECT_EQ(d1.total()[0], t.at(0, 1)[0]);

  const auto d2 = dichotomy_decompose(t, 2);
  std::size_t dy = 0, bd = 0;
  for (const auto& l : d2.labels) {
    dy += l.kind == TermKind::Dyadic;
    bd += l.kind == TermKind::Boundary;
  }
  EXPECT_EQ(dy, 1u);
  EXPECT_EQ(bd, 1u);  // ΔS(0, 2, 2) = 0
  EXPECT_EQ(d2.total()[0], t.at(0, 2)[0]);
  EXPECT_THROW(dichotomy_decompose(t, 0), RangeError);
  EXPECT_THROW(dichotomy_decompose(t, 5), RangeError);
}

TEST(Dichotomy, N17MatchesBruteForceOracle) {
  Rng rng(5);
  const auto t = random_int_table(rng, 17);
  const auto d = dichotomy_decompose(t, 17);
  std::vector<Triple> got;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    const auto& l = d.labels[i];
    got.emplace_back(static_cast<int>(l.kind), l.i0, l.i1, l.i2);
    if (l.kind != TermKind::Additive) {
      ASSERT_EQ(d.term(i)[0], delta_process(t, {l.i0, l.i1, l.i2})[0]);
    }
  }
  auto want = oracle_terms(17);
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
  EXPECT_EQ(d.total()[0], t.at(0, 17)[0]);
}

TEST(Dichotomy, OracleTelescopesSymbolically) {
  for (std::size_t n = 1; n <= 1024; ++n) {
    const auto c = symbolic(oracle_terms(n));
    ASSERT_EQ(c.size(), 1u) << n;
    ASSERT_EQ(c.begin()->first, std::make_pair(std::size_t{0}, n));
    ASSERT_EQ(c.begin()->second, 1);
  }
}

TEST(Dichotomy, TermCountsAndExactReconstruction) {
  Rng rng(6);
  const auto t = random_int_table(rng, 1024);
  for (std::size_t n = 1; n <= 1024; ++n) {
    const auto d = dichotomy_decompose(t, n);
    std::size_t add = 0, bd = 0, dy = 0;
    for (const auto& l : d.labels) {
      add += l.kind == TermKind::Additive;
      bd += l.kind == TermKind::Boundary;
      dy += l.kind == TermKind::Dyadic;
    }
    ASSERT_EQ(add, n);
    ASSERT_EQ(bd, static_cast<std::size_t>(std::bit_width(n)) - 1);
    ASSERT_EQ(dy, n - static_cast<std::size_t>(std::popcount(n)));
    ASSERT_EQ(d.total()[0], t.at(0, n)[0]) << n;
  }
}

TEST(Dichotomy, RealTableWithinTolerance) {
  Rng rng(7);
  ProcessTable<double> t(300, 3);
  for (std::size_t n = 1; n <= 300; ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      const double v[3] = {rng.normal() * 1e3, rng.normal(), rng.pareto(1.5)};
      t.set(m, n, std::span<const double>(v, 3));
    }
  }
  for (std::size_t n : {1u, 7u, 64u, 255u, 300u}) {
    const auto tot = dichotomy_decompose(t, n).total();
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(tot[c], t.at(0, n)[c], 1e-9 * (1 + std::fabs(t.at(0, n)[c])));
    }
  }
}

TEST(LazyProcess, AgreesWithMaterializedTable) {
  Rng rng(8);
  const auto t = random_int_table(rng, 40);
  LazyProcess<long long> lazy(40, 1, [&](std::size_t m, std::size_t n) { return t.value(m, n); });
  const auto a = dichotomy_decompose(lazy, 37), b = dichotomy_decompose(t, 37);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(ProcessTable<long long>::from_source(lazy).value(3, 9), t.value(3, 9));
}

TEST(ProcessTable, CsvDump) {
  ProcessTable<double> t(2, 1);
  t.set(0, 1, 0.5);
  t.set(0, 2, 0.1);
  t.set(1, 2, -2.0);
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "m,n,value\n0,1,0.5\n0,2,0.10000000000000001\n1,2,-2\n");
}
