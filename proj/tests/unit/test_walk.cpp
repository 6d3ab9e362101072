#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "mwl/errors.hpp"
#include "mwl/walk.hpp"
#include "mwl/word.hpp"

using namespace mwl;

namespace {

std::vector<Step> real_steps(const Word& w) {
  std::vector<Step> s;
  for (const auto& g : w.letters()) s.push_back(Step::from_real(g));
  return s;
}

std::vector<Step> padic_steps(const Word& w) {
  std::vector<Step> s;
  for (const auto& g : w.letters()) s.push_back(Step::from_padic(g));
  return s;
}

}  // namespace

TEST(ScaledMatrix, ProductMatchesPlainProduct) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto g = gen::random_real_matrix(rng, 3), h = gen::random_real_matrix(rng, 3);
    const auto p = (ScaledMatrix::from(g) * ScaledMatrix::from(h)).to_matrix();
    ASSERT_TRUE(approx_equal(p, g * h, 1e-12));
  }
  EXPECT_THROW(ScaledMatrix::from(Matrix::identity(FieldSpec::padic(3), 2)), UsageError);
  EXPECT_EQ(ScaledMatrix::from(Matrix(FieldSpec::real(), 2)).log_norm(), -std::numeric_limits<double>::infinity());
}

TEST(ScaledMatrix, LongProductsStayFinite) {
  const auto big = ScaledMatrix::from(Matrix::real(2, {1e200, 0, 0, 1e-200}));
  ScaledMatrix acc = ScaledMatrix::identity(2);
  for (int k = 0; k < 50; ++k) acc = acc * big;
  EXPECT_NEAR(acc.log_norm(), 50 * 200 * std::log(10.0), 1e-6);
  EXPECT_THROW(acc.to_matrix(), RangeError);
}

TEST(ScaledMatrix, CommutingDiagonalProductsAreExact) {
  // products of exact powers of two never round
  const auto g = ScaledMatrix::from(Matrix::real(2, {8, 0, 0, 0.125}));
  ScaledMatrix acc = ScaledMatrix::identity(2);
  for (int k = 0; k < 40; ++k) acc = acc * g;
  EXPECT_EQ(acc.log_norm(), 120 * std::numbers::ln2);
}

TEST(WalkBuffer, RealWindowsMatchLiteralProducts) {
  Rng rng(2);
  Word w;
  for (int k = 0; k < 24; ++k) w.push_back(gen::random_sl_matrix(rng, 3));
  const WalkBuffer b(real_steps(w));
  for (int t = 0; t < 200; ++t) {
    std::size_t m = rng.index(25), n = rng.index(25);
    if (m > n) std::swap(m, n);
    const auto lit = product(w, m, n);
    ASSERT_TRUE(approx_equal(b.product(m, n), lit, 1e-9));
    ASSERT_NEAR(b.kappa_window(m, n), kappa(lit), 1e-9 * (1 + kappa(lit)));
    ASSERT_NEAR(b.delta_kappa(m, n), delta_kappa(w, m, n), 1e-9 * (1 + b.kappa_sum(m, n)));
    // well-conditioned oracle: κ̄_k from the top singular value of ∧^k, κ̄_d from Σ log|det|
    const auto bc = b.cartan_window(m, n);
    const auto dc = b.delta_cartan(m, n);
    double logdet = 0.0;
    for (std::size_t k = m; k < n; ++k) logdet += std::log(std::fabs(determinant(w[k]).real()));
    std::vector<double> kbar(4, 0.0);
    for (std::size_t k = 1; k <= 3; ++k) {
      kbar[k] = k < 3 ? std::log(singular_values(exterior_power(lit, k)).front()) : logdet;
      ASSERT_NEAR(bc.kbar(k), kbar[k], 1e-9 * (1 + std::fabs(kbar[k]) + b.kappa_sum(m, n)));
    }
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t k = m; k < n; ++k) s += b.step(k).cartan[i];
      ASSERT_NEAR(dc[i], kbar[i + 1] - kbar[i] - s, 1e-8 * (1 + b.kappa_sum(m, n)));
    }
  }
}

TEST(WalkBuffer, PadicWindowsAreExact) {
  Rng rng(3);
  Word w;
  for (int k = 0; k < 12; ++k) w.push_back(gen::random_padic_matrix(rng, 3, 2));
  const WalkBuffer b(padic_steps(w));
  for (std::size_t m = 0; m <= 12; ++m) {
    for (std::size_t n = m; n <= 12; ++n) {
      const auto lit = product(w, m, n);
      ASSERT_EQ(b.product(m, n), lit);
      ASSERT_EQ(b.kappa_window(m, n), kappa(lit));
      ASSERT_EQ(b.delta_kappa(m, n), delta_kappa(w, m, n));
    }
  }
}

TEST(WalkBuffer, PairDefectIdentity) {
  Rng rng(4);
  Word w;
  for (int k = 0; k < 30; ++k) w.push_back(gen::random_sl_matrix(rng, 2));
  const WalkBuffer b(real_steps(w));
  for (int t = 0; t < 300; ++t) {
    std::size_t idx[3] = {rng.index(31), rng.index(31), rng.index(31)};
    std::sort(idx, idx + 3);
    const auto [l, m, n] = idx;
    const double lhs = b.delta_kappa(l, m) + b.delta_kappa(m, n) + b.delta_kappa_pair(l, m, n);
    ASSERT_NEAR(lhs, b.delta_kappa(l, n), 1e-9 * (1 + b.kappa_sum(l, n)));
    ASSERT_LE(b.delta_kappa_pair(l, m, n), 1e-9);
  }
}

TEST(WalkBuffer, HeavyRealWalkDoesNotOverflow) {
  Rng rng(5);
  std::vector<Step> s;
  for (int k = 0; k < 4000; ++k) {
    const double x = std::log(rng.pareto(1.1)) * 5.0;
    s.push_back(Step::from_real(Matrix::rotation(2, 0, 1, 0.3) * Matrix::real(2, {std::exp(x), 0, 0, std::exp(-x)})));
  }
  const WalkBuffer b(std::move(s));
  const double k = b.kappa_window(0, 4000);
  EXPECT_TRUE(std::isfinite(k));
  EXPECT_LE(b.delta_kappa(0, 4000), 1e-6);
  EXPECT_THROW(b.kappa_window(3, 4001), RangeError);
}

TEST(WalkBuffer, RejectsMixedOrTinySteps) {
  EXPECT_THROW(WalkBuffer({Step::from_real(Matrix::real(1, {2.0}))}), UsageError);
  EXPECT_THROW(Step::from_real(Matrix::real(2, {1, 0, 0, 0})), DomainError);
}
