#include "mwl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwl/errors.hpp"

namespace mwl::linalg {

std::vector<double> singular_values(std::span<const double> a, std::size_t rows, std::size_t cols,
                                    const JacobiOptions& opts) {
  // Work on columns stored contiguously.
  std::vector<double> u(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) u[j * rows + i] = a[i * cols + j];
  }
  auto col = [&](std::size_t j) { return u.data() + j * rows; };

  // Columns below 1e-140 of the Frobenius norm cannot move the singular
  // values at double precision; rotating them only stirs subnormals.
  double fro2 = 0.0;
  for (double x : u) fro2 += x * x;
  const double negligible = fro2 * 1e-280;

  double residual = 0.0;
  bool converged = cols < 2;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    residual = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        const double* cp = col(p);
        const double* cq = col(q);
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        const double off = std::fabs(gamma) / (std::sqrt(alpha) * std::sqrt(beta));
        residual = std::max(residual, off);
        if (off <= opts.tolerance) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double* wp = col(p);
        double* wq = col(q);
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = wp[i];
          const double y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
      }
    }
    converged = residual <= opts.tolerance;
  }
  if (!converged) throw NumericError("one-sided Jacobi SVD did not converge", residual);

  std::vector<double> sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    const double* c = col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += c[i] * c[i];
    sigma[j] = std::sqrt(s);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  if (rows < cols) sigma.resize(rows);
  return sigma;
}

SymmetricEigen symmetric_eigen(std::span<const double> a_in, std::size_t n, const JacobiOptions& opts) {
  std::vector<double> a(a_in.begin(), a_in.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  auto off_ratio = [&] {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        (i == j ? diag : off) += at(i, j) * at(i, j);
      }
    }
    const double total = off + diag;
    return total == 0.0 ? 0.0 : std::sqrt(off / total);
  };

  double residual = off_ratio();
  for (int sweep = 0; sweep < opts.max_sweeps && residual > opts.tolerance; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
    residual = off_ratio();
  }
  if (residual > opts.tolerance) throw NumericError("symmetric Jacobi did not converge", residual);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return at(i, i) > at(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = at(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors[r * n + c] = v[r * n + order[c]];
  }
  return out;
}

double squared_operator_norm(std::span<const double> a, std::size_t rows, std::size_t cols) {
  std::vector<double> gram(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = i; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) s += a[r * cols + i] * a[r * cols + j];
      gram[i * cols + j] = s;
      gram[j * cols + i] = s;
    }
  }
  // Tighter than the default so the largest eigenvalue is accurate to rounding.
  return symmetric_eigen(gram, cols, {.tolerance = 1e-15, .max_sweeps = 60}).values.front();
}

double determinant(std::vector<double> a, std::size_t n) {
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r * n + c]) > std::fabs(a[pivot * n + c])) pivot = r;
    }
    if (a[pivot * n + c] == 0.0) return 0.0;
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[pivot * n + k]);
      det = -det;
    }
    const double d = a[c * n + c];
    det *= d;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / d;
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

std::vector<double> inverse(std::vector<double> a, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r * n + c]) > std::fabs(a[pivot * n + c])) pivot = r;
    }
    if (a[pivot * n + c] == 0.0) return {};
    if (pivot != c) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a[c * n + k], a[pivot * n + k]);
        std::swap(inv[c * n + k], inv[pivot * n + k]);
      }
    }
    const double d = a[c * n + c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c * n + k] /= d;
      inv[c * n + k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[c * n + k];
        inv[r * n + k] -= f * inv[c * n + k];
      }
    }
  }
  return inv;
}

std::vector<double> multiply(std::span<const double> a, std::span<const double> b, std::size_t n) {
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
  return c;
}

double frobenius_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

}  // namespace mwl::linalg
