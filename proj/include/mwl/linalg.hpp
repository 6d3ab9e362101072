#pragma once

// Small dense real kernels shared by matrix-core and stat-lab. Matrices are
// row-major std::vector<double>.

#include <cstddef>
#include <span>
#include <vector>

namespace mwl::linalg {

struct JacobiOptions {
  double tolerance = 1e-12;
  int max_sweeps = 30;
};

/// Singular values (descending) by one-sided cyclic Jacobi: column rotations
/// that diagonalize a^T a implicitly. Throws NumericError after max_sweeps.
std::vector<double> singular_values(std::span<const double> a, std::size_t rows, std::size_t cols,
                                    const JacobiOptions& opts = {});

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // column i is the eigenvector of values[i]
};

/// Two-sided cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(std::span<const double> a, std::size_t n, const JacobiOptions& opts = {});

/// Largest eigenvalue of a^T a, i.e. the squared operator norm of a.
double squared_operator_norm(std::span<const double> a, std::size_t rows, std::size_t cols);

double determinant(std::vector<double> a, std::size_t n);

/// Gauss-Jordan with partial pivoting; empty result when a is singular.
std::vector<double> inverse(std::vector<double> a, std::size_t n);

std::vector<double> multiply(std::span<const double> a, std::span<const double> b, std::size_t n);

double frobenius_norm(std::span<const double> a);

}  // namespace mwl::linalg
