#pragma once

#include <cstddef>

#include "mwl/simd/kernels.hpp"

namespace mwl::simd {

#define MWL_SIMD_KERNEL_DECLS                                                                     \
  double sum(const double* x, std::size_t n);                                                     \
  double pow_abs_dev_sum(const double* x, std::size_t n, double c, double q);                     \
  double pow_abs_diff_sum(const double* a, const double* b, std::size_t n, double q);             \
  CfSum cf_sum(const double* x, std::size_t n, double theta);                                     \
  std::size_t count_greater(const double* x, std::size_t n, double t);                            \
  void neg_log(const double* u, double* out, std::size_t n);                                      \
  void advance_arrivals(double* gamma, const double* incr, double inv_alpha, double* w,           \
                        std::size_t n);                                                           \
  void fma_accumulate(double* acc, const double* a, const double* b, std::size_t n);

namespace scalar {
MWL_SIMD_KERNEL_DECLS
/// |d|^q with the exact shortcuts shared by both backends.
double pow_abs(double d, double q);
}  // namespace scalar

namespace avx2 {
MWL_SIMD_KERNEL_DECLS
}  // namespace avx2

#undef MWL_SIMD_KERNEL_DECLS

}  // namespace mwl::simd
