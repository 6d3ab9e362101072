#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "generators.hpp"
#include "mwl/errors.hpp"
#include "mwl/word.hpp"

using namespace mwl;

namespace {

Matrix rdiag(double a, double b) { return Matrix::real(2, {a, 0, 0, b}); }

Word random_sl_word(Rng& rng, std::size_t len, std::size_t d = 2) {
  Word w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(gen::random_sl_matrix(rng, d));
  return w;
}

Word random_padic_word(Rng& rng, std::uint64_t p, std::size_t len) {
  Word w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(gen::random_padic_matrix(rng, p, 2));
  return w;
}

}  // namespace

TEST(Word, RejectsMixedLetters) {
  Word w;
  w.push_back(Matrix::identity(FieldSpec::real(), 2));
  EXPECT_THROW(w.push_back(Matrix::identity(FieldSpec::real(), 3)), UsageError);
  EXPECT_THROW(w.push_back(Matrix::identity(FieldSpec::padic(3), 2)), UsageError);
}

TEST(Product, SpecExamples) {
  Word w({rdiag(2, 3), rdiag(5, 7)});
  EXPECT_EQ(product(w, 1, 1), Matrix::identity(FieldSpec::real(), 2));
  EXPECT_EQ(product(w, 0, 2), rdiag(10, 21));
  EXPECT_THROW(product(w, 1, 3), RangeError);
  EXPECT_THROW(product(w, 2, 1), RangeError);
}

TEST(Product, AssociativityExactOverQp) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto w = random_padic_word(rng, 3, 5);
    EXPECT_EQ(product(w, 0, 5), product(w, 0, 2) * product(w, 2, 5));
    Matrix lit = w[0];
    for (std::size_t k = 1; k < 5; ++k) lit = lit * w[k];
    EXPECT_EQ(product(w, 0, 5), lit);
  }
}

TEST(DeltaKappa, SpecExamples) {
  EXPECT_DOUBLE_EQ(delta_kappa(Word({rdiag(2, 1)})), 0.0);
  EXPECT_NEAR(delta_kappa(Word({rdiag(2, 1), rdiag(3, 1)})), 0.0, 1e-15);
  const Matrix r = Matrix::rotation(2, 0, 1, std::numbers::pi / 2) * rdiag(2, 1);
  EXPECT_NEAR(delta_kappa(Word({rdiag(2, 1), r})), -std::numbers::ln2, 1e-12);
  EXPECT_NEAR(delta_kappa_pair(rdiag(2, 1), r), -std::numbers::ln2, 1e-12);
  const auto id = Matrix::identity(FieldSpec::real(), 3);
  EXPECT_EQ(delta_kappa_pair(id, id), 0.0);
  for (double c : delta_cartan_pair(id, id)) EXPECT_EQ(c, 0.0);
}

TEST(DeltaKappa, SingularLetterPropagatesMinusInfinity) {
  const Word w({rdiag(1, 1), Matrix(FieldSpec::real(), 2)});
  EXPECT_EQ(delta_kappa(w), -std::numeric_limits<double>::infinity());
}

TEST(DeltaKappa, NonPositiveAndBoundedPair) {
  Rng rng(2);
  for (int t = 0; t < 2000; ++t) {
    const auto w = random_sl_word(rng, 1 + rng.index(8));
    ASSERT_LE(delta_kappa(w), 1e-9);
    const auto g = gen::random_sl_matrix(rng, 2), h = gen::random_sl_matrix(rng, 2);
    ASSERT_LE(std::fabs(delta_kappa_pair(g, h)), std::min(big_n(g), big_n(h)) + 1e-9);
  }
}

TEST(DeltaKappa, HaarBallPairsVanishExactly) {
  // Integer matrices with unit determinant are in GL2(Z_p): κ = 0 for each and for the product.
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const long a = static_cast<long>(rng.index(81)), b = static_cast<long>(rng.index(81));
    const auto g = Matrix::padic(3, 2, {Rational(3 * a + 1), Rational(b), Rational(3 * b), Rational(1)});
    const auto h = Matrix::padic(3, 2, {Rational(1), Rational(a), Rational(0), Rational(3 * b + 2)});
    ASSERT_EQ(delta_kappa_pair(g, h), 0.0);
  }
}

TEST(DeltaKappa, ConcatenationIdentity) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng.index(8), m = 1 + rng.index(n - 1);
    const auto w = random_sl_word(rng, n, 3);
    const double lhs = delta_kappa(w, 0, m) + delta_kappa(w, m, n) +
                       delta_kappa_pair(product(w, 0, m), product(w, m, n));
    ASSERT_NEAR(lhs, delta_kappa(w), 1e-9);
  }
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(5), m = 1 + rng.index(n - 1);
    const auto w = random_padic_word(rng, 2, n);
    const double lhs = delta_kappa(w, 0, m) + delta_kappa(w, m, n) +
                       delta_kappa_pair(product(w, 0, m), product(w, m, n));
    // integer valuation units scaled by log p: equal up to the final rounding
    ASSERT_NEAR(lhs, delta_kappa(w), 1e-12);
  }
}

TEST(Subordination, SpecExamples) {
  Rng rng(5);
  const auto sup = random_sl_word(rng, 5);
  const auto one = subordinate_check(Word({product(sup, 0, 5)}), sup);
  ASSERT_TRUE(one.witness.has_value());
  EXPECT_EQ(*one.witness, (std::vector<std::size_t>{0, 5}));
  EXPECT_TRUE(one.monotone);
  EXPECT_EQ(one.delta_sub, 0.0);

  const auto same = subordinate_check(sup, sup);
  ASSERT_TRUE(same.witness.has_value());
  EXPECT_EQ(*same.witness, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Subordination, InteriorWindowAndRefusal) {
  Rng rng(6);
  const auto sup = random_padic_word(rng, 5, 6);
  const auto sub = Word({product(sup, 1, 3), product(sup, 3, 4)});
  const auto r = subordinate_check(sub, sup);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_TRUE(r.monotone);

  const auto bad = subordinate_check(Word({gen::random_padic_matrix(rng, 5, 2)}), sup);
  EXPECT_FALSE(bad.witness.has_value());
}

TEST(Subordination, PairwiseGroupingIsMonotone) {
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t blocks = 1 + rng.index(5);
    const auto sup = random_sl_word(rng, 2 * blocks);
    Word sub;
    for (std::size_t b = 0; b < blocks; ++b) sub.push_back(product(sup, 2 * b, 2 * b + 2));
    const auto r = subordinate_check(sub, sup);
    ASSERT_TRUE(r.witness.has_value());
    for (std::size_t b = 0; b <= blocks; ++b) ASSERT_EQ((*r.witness)[b], 2 * b);
    ASSERT_TRUE(r.monotone) << r.delta_sup << " > " << r.delta_sub;
  }
}

TEST(WindowCancellation, SpecExamples) {
  Rng rng(8);
  const auto w = random_sl_word(rng, 4);
  const auto one = window_cancellation(w, 2, 3);
  EXPECT_EQ(one.r, 0.0);
  EXPECT_EQ(one.delta_kappa, 0.0);
  EXPECT_TRUE(one.bound_ok);

  Word rot;
  for (double a : {0.1, 0.7, 2.0}) rot.push_back(Matrix::rotation(2, 0, 1, a));
  const auto o = window_cancellation(rot, 0, 3);
  EXPECT_NEAR(o.r, 0.0, 1e-12);
  EXPECT_NEAR(o.delta_kappa, 0.0, 1e-12);
  EXPECT_THROW(window_cancellation(rot, 1, 4), RangeError);
}

TEST(WindowCancellation, BoundHoldsOnRandomWindows) {
  Rng rng(9);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t len = 2 + rng.index(11);
    const auto w = random_sl_word(rng, len);
    const auto r = window_cancellation(w, 0, len);
    ASSERT_TRUE(r.bound_ok);
    ASSERT_NEAR(r.r, r.r_min_form, 1e-12 * (1 + r.r));
    double mx = 0.0;
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, big_n(w[k]));
    ASSERT_EQ(big_n(w[r.argmax]), mx);
  }
}

TEST(GridGap, SpecExamples) {
  const std::vector<std::uint64_t> ones(10, 1);
  for (std::uint64_t n = 0; n <= 10; ++n) EXPECT_EQ(grid_gap(ones, n).gap, 0u);
  const std::vector<std::uint64_t> threes(5, 3);
  const auto g = grid_gap(threes, 4);
  EXPECT_EQ(g.floor, 3u);
  EXPECT_EQ(g.ceil, 6u);
  EXPECT_EQ(g.gap, 3u);
  EXPECT_EQ(g.index, 1u);
  EXPECT_THROW(grid_gap(threes, 16), RangeError);
  EXPECT_THROW(grid_gap(std::vector<std::uint64_t>{1, 0, 2}, 2), UsageError);
}

TEST(GridGap, GapIsZeroOrCurrentBlockAndBounded) {
  Rng rng(10);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::uint64_t> p(40);
    std::uint64_t mx = 0;
    for (auto& x : p) mx = std::max(mx, x = 1 + rng.index(7));
    const std::uint64_t n = rng.index(41);
    const auto g = grid_gap(p, n);
    ASSERT_TRUE(g.gap == 0 || g.gap == p[g.index]);
    ASSERT_LE(g.gap, mx);
    ASSERT_LE(g.floor, n);
    ASSERT_GE(g.ceil, n);
  }
}

TEST(GridGap, GeometricBlocksObeyStepBound) {
  Rng rng(11);
  const double q = 0.3;
  const std::uint64_t n = 30;
  const int trials = 40000;
  std::map<std::uint64_t, int> hits;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint64_t> p;
    std::uint64_t total = 0;
    while (total < n + 1) {
      std::uint64_t k = 1;
      while (rng.uniform() >= q) ++k;
      p.push_back(k);
      total += k;
    }
    ++hits[grid_gap(p, n).gap];
  }
  for (std::uint64_t t = 1; t <= 20; ++t) {
    const double ph = static_cast<double>(hits[t]) / trials;
    const double se = std::sqrt(std::max(ph * (1 - ph), 1.0 / trials) / trials);
    const double pmax = std::pow(1 - q, static_cast<double>(t) - 1) * q;
    EXPECT_LE(ph, static_cast<double>(t) * pmax + 3 * se) << "t = " << t;
  }
}
