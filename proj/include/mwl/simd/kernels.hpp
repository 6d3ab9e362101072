#pragma once

// Data-parallel kernels behind the statistics and series code. Each kernel has
// a scalar reference and an AVX2+FMA variant; the variant is picked once at
// runtime from CPU support and the MWL_SIMD environment variable
// (MWL_SIMD=scalar forces the reference path).
//
// Results are deterministic for a fixed backend. Across backends, reductions
// may differ in the last bits because of summation order.

#include <cstddef>
#include <span>

namespace mwl::simd {

enum class Backend { Scalar, Avx2 };

bool avx2_available();
Backend active_backend();
const char* backend_name(Backend b);
/// Overrides the runtime choice (tests). Selecting Avx2 on a machine without it
/// throws UsageError.
void force_backend(Backend b);

struct CfSum {
  double cos_sum = 0.0;
  double sin_sum = 0.0;
};

double sum(std::span<const double> x);
/// sum_i |x_i - c|^q, q > 0
double pow_abs_dev_sum(std::span<const double> x, double c, double q);
/// sum_i |a_i - b_i|^q, q > 0; a and b have equal length
double pow_abs_diff_sum(std::span<const double> a, std::span<const double> b, double q);
/// sum_i (cos(theta x_i), sin(theta x_i))
CfSum cf_sum(std::span<const double> x, double theta);
std::size_t count_greater(std::span<const double> x, double t);
/// out_i = -log(u_i), u_i in (0, 1]
void neg_log(std::span<const double> u, std::span<double> out);
/// gamma_i += incr_i; w_i = gamma_i^(-inv_alpha)
void advance_arrivals(std::span<double> gamma, std::span<const double> incr, double inv_alpha,
                      std::span<double> w);
/// acc_i = fma(a_i, b_i, acc_i)
void fma_accumulate(std::span<double> acc, std::span<const double> a, std::span<const double> b);

}  // namespace mwl::simd
