#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "generators.hpp"
#include "mwl/errors.hpp"
#include "mwl/linalg.hpp"
#include "mwl/matrix.hpp"

using namespace mwl;
using gen::random_padic_matrix;
using gen::random_real_matrix;
using gen::random_sl_matrix;

namespace {

const double kLog2 = std::numbers::ln2;
const double kLog3 = std::log(3.0);

Matrix real_diag(std::vector<double> d) {
  std::vector<Scalar> s(d.begin(), d.end());
  return Matrix::diagonal(FieldSpec::real(), s);
}

Matrix padic_diag(std::uint64_t p, std::vector<long> d) {
  std::vector<Scalar> s;
  for (long x : d) s.push_back(Scalar::rational(x));
  return Matrix::diagonal(FieldSpec::padic(p), s);
}

double kbar_via_wedge(const Matrix& g, std::size_t k) {
  const auto w = exterior_power(g, k);
  return std::log(singular_values(w).front());
}

}  // namespace

TEST(Kappa, SpecExamples) {
  EXPECT_DOUBLE_EQ(kappa(Matrix::identity(FieldSpec::real(), 3)), 0.0);
  EXPECT_DOUBLE_EQ(kappa(Matrix::identity(FieldSpec::padic(5), 3)), 0.0);
  EXPECT_NEAR(kappa(real_diag({2, 1})), kLog2, 1e-15);
  EXPECT_DOUBLE_EQ(kappa(padic_diag(2, {2, 1})), 0.0);
  EXPECT_EQ(kappa(Matrix(FieldSpec::real(), 2)), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(kappa(Matrix(FieldSpec::padic(3), 2)), -std::numeric_limits<double>::infinity());
}

TEST(BigN, SpecExamples) {
  EXPECT_DOUBLE_EQ(big_n(Matrix::identity(FieldSpec::real(), 2)), 0.0);
  EXPECT_NEAR(big_n(real_diag({2, 0.5})), 2 * kLog2, 1e-15);
  EXPECT_NEAR(big_n(Matrix::rotation(2, 0, 1, 0.7)), 0.0, 1e-15);
  EXPECT_THROW(big_n(real_diag({1, 0})), DomainError);
  EXPECT_THROW(big_n(padic_diag(3, {1, 0})), DomainError);
  EXPECT_NEAR(big_n(padic_diag(3, {9, 1})), 2 * kLog3, 1e-15);
}

TEST(SingularValues, SpecExamples) {
  const auto s = singular_values(real_diag({4, 2, 1}));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0], 4.0);
  EXPECT_DOUBLE_EQ(s[1], 2.0);
  EXPECT_DOUBLE_EQ(s[2], 1.0);

  const Matrix r = Matrix::rotation(2, 0, 1, 0.3);
  const auto s2 = singular_values(r * real_diag({3, 1}) * Matrix::rotation(2, 0, 1, -1.1));
  EXPECT_NEAR(s2[0], 3.0, 1e-10);
  EXPECT_NEAR(s2[1], 1.0, 1e-10);
  EXPECT_THROW(singular_values(padic_diag(3, {1, 1})), UsageError);
}

TEST(SingularValues, NonConvergenceCarriesResidual) {
  Rng rng(5);
  const auto g = random_real_matrix(rng, 5);
  try {
    linalg::singular_values(g.real_data(), 5, 5, {1e-12, 1});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.residual(), 1e-12);
  }
}

TEST(SingularValues, ProductsMatchExteriorNorms) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_real_matrix(rng, 5);
    const auto s = singular_values(g);
    double logprod = 0.0;
    for (std::size_t k = 1; k <= 5; ++k) {
      logprod += std::log(s[k - 1]);
      ASSERT_NEAR(logprod, kbar_via_wedge(g, k), 1e-9 * (1.0 + std::fabs(logprod)));
    }
  }
}

TEST(ExteriorPower, SpecExamples) {
  Rng rng(3);
  const auto g = random_real_matrix(rng, 3);
  EXPECT_EQ(exterior_power(g, 1), g);
  const auto w = exterior_power(real_diag({5, 7}), 2);
  ASSERT_EQ(w.dim(), 1u);
  EXPECT_DOUBLE_EQ(w.real_at(0, 0), 35.0);
  const auto top = exterior_power(g, 3);
  EXPECT_NEAR(top.real_at(0, 0), determinant(g).real(), 1e-12);
  EXPECT_THROW(exterior_power(g, 0), UsageError);
  EXPECT_THROW(exterior_power(g, 4), UsageError);
}

TEST(ExteriorPower, ColexOrder) {
  const auto s = k_subsets_colex(4, 2);
  const std::vector<std::vector<std::size_t>> expected = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};
  EXPECT_EQ(s, expected);
  EXPECT_EQ(k_subsets_colex(5, 3).size(), 10u);
}

TEST(ExteriorPower, IsHomomorphismReal) {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + rng.index(3);
    const auto g = random_real_matrix(rng, d), h = random_real_matrix(rng, d);
    for (std::size_t k = 1; k <= d; ++k) {
      ASSERT_TRUE(approx_equal(exterior_power(g * h, k), exterior_power(g, k) * exterior_power(h, k), 1e-9));
    }
  }
}

TEST(ExteriorPower, IsHomomorphismPadicExactly) {
  Rng rng(32);
  for (int t = 0; t < 60; ++t) {
    const std::size_t d = 2 + rng.index(2);
    const auto g = random_padic_matrix(rng, 3, d), h = random_padic_matrix(rng, 3, d);
    for (std::size_t k = 1; k <= d; ++k) {
      ASSERT_EQ(exterior_power(g * h, k), exterior_power(g, k) * exterior_power(h, k));
    }
  }
}

TEST(Cartan, SpecExamples) {
  const auto c = cartan(padic_diag(3, {9, 3, 1}));
  ASSERT_EQ(c.dim(), 3u);
  EXPECT_DOUBLE_EQ(c[0], 0.0);
  EXPECT_DOUBLE_EQ(c[1], -kLog3);
  EXPECT_DOUBLE_EQ(c[2], -2 * kLog3);
  EXPECT_EQ(padic_elementary_valuations(padic_diag(3, {9, 3, 1})), (std::vector<long>{0, 1, 2}));

  const auto r = cartan(real_diag({4, 2, 1}));
  EXPECT_NEAR(r[0], std::log(4.0), 1e-15);
  EXPECT_NEAR(r[1], kLog2, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);
}

TEST(Cartan, DualPathAgreementReal) {
  Rng rng(41);
  for (int t = 0; t < 500; ++t) {
    const auto g = random_real_matrix(rng, 3);
    const auto a = cartan(g), b = cartan_via_exterior(g);
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(a[i], b[i], 1e-8);
    ASSERT_TRUE(a.is_non_increasing(1e-9));
  }
}

TEST(Cartan, PadicSumIsLogAbsDetExactly) {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t p = t % 2 == 0 ? 2 : 5;
    const auto g = random_padic_matrix(rng, p, 3);
    const auto e = padic_elementary_valuations(g);
    long sum = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      sum += e[i];
      if (i > 0) ASSERT_LE(e[i - 1], e[i]);
    }
    ASSERT_EQ(Valuation(sum), valuation(determinant(g).rational(), p));
  }
}

TEST(Cartan, PadicTopEqualsKappa) {
  Rng rng(43);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_padic_matrix(rng, 3, 3);
    ASSERT_DOUBLE_EQ(cartan(g).top(), kappa(g));
  }
}

TEST(Cartan, InverseReversesAndNegates) {
  Rng rng(44);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_real_matrix(rng, 3);
    const auto a = cartan(g), b = cartan(inverse(g));
    for (std::size_t i = 0; i < 3; ++i) ASSERT_NEAR(b[i], -a[2 - i], 1e-9 * (1 + std::fabs(a[2 - i])));
  }
  for (int t = 0; t < 50; ++t) {
    const auto g = random_padic_matrix(rng, 2, 3);
    const auto a = padic_elementary_valuations(g), b = padic_elementary_valuations(inverse(g));
    for (std::size_t i = 0; i < 3; ++i) ASSERT_EQ(b[i], -a[2 - i]);
  }
}

TEST(MatrixProperty, SubadditivityOfKbar) {
  Rng rng(51);
  for (int t = 0; t < 500; ++t) {
    const auto g = random_real_matrix(rng, 3), h = random_real_matrix(rng, 3);
    const auto cg = cartan(g), ch = cartan(h), cgh = cartan(g * h);
    for (std::size_t k = 1; k <= 3; ++k) ASSERT_LE(cgh.kbar(k), cg.kbar(k) + ch.kbar(k) + 1e-9);
  }
  for (int t = 0; t < 100; ++t) {
    const auto g = random_padic_matrix(rng, 3, 3), h = random_padic_matrix(rng, 3, 3);
    const auto eg = padic_elementary_valuations(g), eh = padic_elementary_valuations(h);
    const auto egh = padic_elementary_valuations(g * h);
    long sg = 0, sh = 0, sgh = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      sg += eg[k];
      sh += eh[k];
      sgh += egh[k];
      ASSERT_GE(sgh, sg + sh);  // valuations: -κ̄ is superadditive
    }
  }
}

TEST(MatrixProperty, BoundedCancellation) {
  Rng rng(52);
  for (int t = 0; t < 2000; ++t) {
    const auto g = random_sl_matrix(rng, 2), h = random_sl_matrix(rng, 2);
    const double dk = kappa(g * h) - kappa(g) - kappa(h);
    ASSERT_LE(dk, 1e-9);
    ASSERT_LE(std::fabs(dk), std::min(big_n(g), big_n(h)) + 1e-9);
  }
}

TEST(MatrixProperty, SlChain) {
  Rng rng(53);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t d = 2 + rng.index(2);
    const auto g = random_sl_matrix(rng, d);
    const double k = kappa(g), n = big_n(g);
    ASSERT_GE(k, -1e-12);
    ASSERT_LE(k, n + 1e-9);
    ASSERT_LE(n, static_cast<double>(d) * k + 1e-9);
  }
}

TEST(MatrixProperty, PadicOperatorNormIsMaxEntry) {
  // max over lattice vectors of |gx| / |x| in the max norm
  Rng rng(54);
  const std::uint64_t p = 3;
  for (int t = 0; t < 30; ++t) {
    const auto g = random_padic_matrix(rng, p, 3);
    const double bound = kappa(g);
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 200; ++s) {
      std::vector<Scalar> x(3);
      for (auto& v : x) v = Scalar(Rational(static_cast<long>(rng.index(27)) - 13));
      double xn = -std::numeric_limits<double>::infinity();
      for (const auto& v : x) {
        if (!v.is_zero()) xn = std::max(xn, std::log(abs_value(v, g.field())));
      }
      if (std::isinf(xn)) continue;
      double gx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < 3; ++i) {
        Scalar row = Scalar::rational(0);
        for (std::size_t j = 0; j < 3; ++j) row = row + g.at(i, j) * x[j];
        if (!row.is_zero()) gx = std::max(gx, std::log(abs_value(row, g.field())));
      }
      ASSERT_LE(gx - xn, bound + 1e-12);
      best = std::max(best, gx - xn);
    }
    // standard basis vectors attain the bound
    for (std::size_t j = 0; j < 3; ++j) {
      double col = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < 3; ++i) {
        if (!g.at(i, j).is_zero()) col = std::max(col, std::log(abs_value(g.at(i, j), g.field())));
      }
      best = std::max(best, col);
    }
    ASSERT_NEAR(best, bound, 1e-12);
  }
}

TEST(LogCoefficient, SpecExamples) {
  const std::vector<Scalar> e1 = {Scalar(1.0), Scalar(0.0)}, e2 = {Scalar(0.0), Scalar(1.0)};
  EXPECT_DOUBLE_EQ(log_coefficient(e1, Matrix::identity(FieldSpec::real(), 2), e1), 0.0);
  EXPECT_EQ(log_coefficient(e1, real_diag({2, 1}), e2), -std::numeric_limits<double>::infinity());
  const auto g = Matrix::real(2, {0, -1, 2, 0});
  EXPECT_NEAR(log_coefficient(e2, g, e1), kLog2, 1e-15);
  EXPECT_THROW(log_coefficient(std::vector<Scalar>{Scalar(1.0)}, g, e1), UsageError);
}

TEST(Inverse, ExactOverQp) {
  Rng rng(61);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_padic_matrix(rng, 5, 3);
    EXPECT_EQ(g * inverse(g), Matrix::identity(g.field(), 3));
  }
  EXPECT_THROW(inverse(padic_diag(5, {1, 0})), DomainError);
}

TEST(TextFormat, PadicRoundTripIsExact) {
  Rng rng(71);
  for (int t = 0; t < 30; ++t) {
    const auto g = random_padic_matrix(rng, 7, 3);
    EXPECT_EQ(matrix_from_text(to_text(g)), g);
  }
}

TEST(TextFormat, RealRoundTripIsBitExact) {
  Rng rng(72);
  for (int t = 0; t < 30; ++t) {
    const auto g = random_real_matrix(rng, 4);
    EXPECT_EQ(matrix_from_text(to_text(g)), g);
  }
}

TEST(TextFormat, ReadsSeveralBlocksAndRejectsGarbage) {
  std::istringstream is("real 2\n1 0\n0 1\n\n# comment\npadic:3 1\n9/2\n");
  const auto ms = read_matrices(is);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[1].exact_at(0, 0), Rational(9, 2));
  EXPECT_THROW(matrix_from_text("real 2\n1 0\n"), UsageError);
  EXPECT_THROW(matrix_from_text("real 2\n1 0 3\n0 1\n"), UsageError);
  EXPECT_THROW(matrix_from_text("padic:4 1\n1\n"), UsageError);
  EXPECT_THROW(matrix_from_text("real 1\nabc\n"), std::exception);
}
