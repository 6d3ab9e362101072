#include <cmath>

#include "kernels_impl.hpp"

namespace mwl::simd::scalar {

double pow_abs(double d, double q) {
  d = std::fabs(d);
  if (d == 0.0) return 0.0;
  if (q == 1.0) return d;
  if (q == 2.0) return d * d;
  return std::pow(d, q);
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double pow_abs_dev_sum(const double* x, std::size_t n, double c, double q) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += pow_abs(x[i] - c, q);
  return s;
}

double pow_abs_diff_sum(const double* a, const double* b, std::size_t n, double q) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += pow_abs(a[i] - b[i], q);
  return s;
}

CfSum cf_sum(const double* x, std::size_t n, double theta) {
  CfSum out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = theta * x[i];
    out.cos_sum += std::cos(t);
    out.sin_sum += std::sin(t);
  }
  return out;
}

std::size_t count_greater(const double* x, std::size_t n, double t) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

void neg_log(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -std::log(u[i]);
}

void advance_arrivals(double* gamma, const double* incr, double inv_alpha, double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    gamma[i] += incr[i];
    w[i] = std::exp(-inv_alpha * std::log(gamma[i]));
  }
}

void fma_accumulate(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = std::fma(a[i], b[i], acc[i]);
}

}  // namespace mwl::simd::scalar
