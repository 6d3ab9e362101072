// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cfloat>
#include <cmath>

#include "kernels_impl.hpp"

namespace mwl::simd::avx2 {

namespace {

// fdlibm log
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLg1 = 6.666666666666735130e-01;
constexpr double kLg2 = 3.999999999940941908e-01;
constexpr double kLg3 = 2.857142874366239149e-01;
constexpr double kLg4 = 2.222219843214978396e-01;
constexpr double kLg5 = 1.818357216161805012e-01;
constexpr double kLg6 = 1.531383769920937332e-01;
constexpr double kLg7 = 1.479819860511658591e-01;

// fdlibm exp
constexpr double kInvLn2 = 1.44269504088896338700e+00;
constexpr double kP1 = 1.66666666666666019037e-01;
constexpr double kP2 = -2.77777777770155933842e-03;
constexpr double kP3 = 6.61375632143793436117e-05;
constexpr double kP4 = -1.65339022054652515390e-06;
constexpr double kP5 = 4.13813679705723846039e-08;
constexpr double kExpLimit = 708.0;

// fdlibm sin/cos kernels and the three-part pi/2
constexpr double kS1 = -1.66666666666666324348e-01;
constexpr double kS2 = 8.33333333332248946124e-03;
constexpr double kS3 = -1.98412698298579493134e-04;
constexpr double kS4 = 2.75573137070700676789e-06;
constexpr double kS5 = -2.50507602534068634195e-08;
constexpr double kS6 = 1.58969099521155010221e-10;
constexpr double kC1 = 4.16666666666666019037e-02;
constexpr double kC2 = -1.38888888888741095749e-03;
constexpr double kC3 = 2.48015872894767294178e-05;
constexpr double kC4 = -2.75573143513906633035e-07;
constexpr double kC5 = 2.08757232129817482790e-09;
constexpr double kC6 = -1.13596475577881948265e-11;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_2 = 6.07710050630396597660e-11;
constexpr double kPio2_3 = 2.02226624871116645580e-21;
constexpr double kTrigLimit = 1e6;

inline __m256d set1(double x) { return _mm256_set1_pd(x); }

inline double hsum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] + t[1]) + (t[2] + t[3]);
}

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(set1(-0.0), x); }

// True when every lane is a positive normal finite double.
inline bool log_domain(__m256d x) {
  const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(x, set1(DBL_MIN), _CMP_GE_OQ),
                                   _mm256_cmp_pd(x, set1(DBL_MAX), _CMP_LE_OQ));
  return _mm256_movemask_pd(ok) == 0xF;
}

inline bool exp_domain(__m256d y) {
  return _mm256_movemask_pd(_mm256_cmp_pd(vabs(y), set1(kExpLimit), _CMP_LE_OQ)) == 0xF;
}

inline __m256d vlog(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(mant, _mm256_set1_epi64x(0x3FF0000000000000LL)));
  // 2^52 + e as a double, then subtract 2^52 + 1023.
  const __m256i ebits = _mm256_or_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x4330000000000000LL));
  __m256d k = _mm256_sub_pd(_mm256_castsi256_pd(ebits), set1(4503599627370496.0 + 1023.0));
  const __m256d big = _mm256_cmp_pd(m, set1(1.41421356237309504880), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), big);
  k = _mm256_add_pd(k, _mm256_and_pd(big, set1(1.0)));

  const __m256d f = _mm256_sub_pd(m, set1(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(set1(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);
  const __m256d t1 =
      _mm256_mul_pd(w, _mm256_fmadd_pd(w, _mm256_fmadd_pd(w, set1(kLg6), set1(kLg4)), set1(kLg2)));
  const __m256d t2 = _mm256_mul_pd(
      z, _mm256_fmadd_pd(w, _mm256_fmadd_pd(w, _mm256_fmadd_pd(w, set1(kLg7), set1(kLg5)), set1(kLg3)),
                         set1(kLg1)));
  const __m256d r = _mm256_add_pd(t2, t1);
  const __m256d hfsq = _mm256_mul_pd(set1(0.5), _mm256_mul_pd(f, f));
  // k*ln2_hi - ((hfsq - (s*(hfsq+R) + k*ln2_lo)) - f)
  const __m256d inner = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, r), _mm256_mul_pd(k, set1(kLn2Lo)));
  return _mm256_sub_pd(_mm256_mul_pd(k, set1(kLn2Hi)), _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f));
}

inline __m256d vexp(__m256d x) {
  const __m256d kd = _mm256_round_pd(_mm256_mul_pd(x, set1(kInvLn2)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d hi = _mm256_fnmadd_pd(kd, set1(kLn2Hi), x);
  const __m256d lo = _mm256_mul_pd(kd, set1(kLn2Lo));
  const __m256d r = _mm256_sub_pd(hi, lo);
  const __m256d t = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(t, set1(kP5), set1(kP4));
  p = _mm256_fmadd_pd(t, p, set1(kP3));
  p = _mm256_fmadd_pd(t, p, set1(kP2));
  p = _mm256_fmadd_pd(t, p, set1(kP1));
  const __m256d c = _mm256_fnmadd_pd(t, p, r);
  const __m256d rc = _mm256_div_pd(_mm256_mul_pd(r, c), _mm256_sub_pd(set1(2.0), c));
  const __m256d y = _mm256_sub_pd(set1(1.0), _mm256_sub_pd(_mm256_sub_pd(lo, rc), hi));
  const __m256i k64 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(kd));
  const __m256i scale = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(y, _mm256_castsi256_pd(scale));
}

// sin and cos of x for |x| <= kTrigLimit.
inline void vsincos(__m256d x, __m256d& sin_out, __m256d& cos_out) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set1(kTwoOverPi)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(kPio2_1), x);
  r = _mm256_fnmadd_pd(n, set1(kPio2_2), r);
  r = _mm256_fnmadd_pd(n, set1(kPio2_3), r);
  const __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_fmadd_pd(z, set1(kS6), set1(kS5));
  ps = _mm256_fmadd_pd(z, ps, set1(kS4));
  ps = _mm256_fmadd_pd(z, ps, set1(kS3));
  ps = _mm256_fmadd_pd(z, ps, set1(kS2));
  ps = _mm256_fmadd_pd(z, ps, set1(kS1));
  const __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(r, z), ps, r);

  __m256d pc = _mm256_fmadd_pd(z, set1(kC6), set1(kC5));
  pc = _mm256_fmadd_pd(z, pc, set1(kC4));
  pc = _mm256_fmadd_pd(z, pc, set1(kC3));
  pc = _mm256_fmadd_pd(z, pc, set1(kC2));
  pc = _mm256_fmadd_pd(z, pc, set1(kC1));
  const __m256d cr = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc, _mm256_fnmadd_pd(set1(0.5), z, set1(1.0)));

  const __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d sin_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
  const __m256d cos_neg =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), two));
  const __m256d sign = set1(-0.0);
  sin_out = _mm256_xor_pd(_mm256_blendv_pd(sr, cr, swap), _mm256_and_pd(sin_neg, sign));
  cos_out = _mm256_xor_pd(_mm256_blendv_pd(cr, sr, swap), _mm256_and_pd(cos_neg, sign));
}

// |d|^q over four lanes; false when a lane needs the scalar path.
inline bool vpow_abs(__m256d d, double q, __m256d& out) {
  d = vabs(d);
  if (q == 1.0) {
    out = d;
    return true;
  }
  if (q == 2.0) {
    out = _mm256_mul_pd(d, d);
    return true;
  }
  const __m256d zero = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d safe = _mm256_blendv_pd(d, set1(1.0), zero);
  if (!log_domain(safe)) return false;
  const __m256d y = _mm256_mul_pd(set1(q), vlog(safe));
  if (!exp_domain(y)) return false;
  out = _mm256_andnot_pd(zero, vexp(y));
  return true;
}

}  // namespace

double sum(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double pow_abs_dev_sum(const double* x, std::size_t n, double c, double q) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  const __m256d vc = set1(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p;
    if (vpow_abs(_mm256_sub_pd(_mm256_loadu_pd(x + i), vc), q, p)) {
      acc = _mm256_add_pd(acc, p);
    } else {
      for (std::size_t j = i; j < i + 4; ++j) tail += scalar::pow_abs(x[j] - c, q);
    }
  }
  for (; i < n; ++i) tail += scalar::pow_abs(x[i] - c, q);
  return hsum(acc) + tail;
}

double pow_abs_diff_sum(const double* a, const double* b, std::size_t n, double q) {
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p;
    if (vpow_abs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)), q, p)) {
      acc = _mm256_add_pd(acc, p);
    } else {
      for (std::size_t j = i; j < i + 4; ++j) tail += scalar::pow_abs(a[j] - b[j], q);
    }
  }
  for (; i < n; ++i) tail += scalar::pow_abs(a[i] - b[i], q);
  return hsum(acc) + tail;
}

CfSum cf_sum(const double* x, std::size_t n, double theta) {
  __m256d cs = _mm256_setzero_pd(), sn = _mm256_setzero_pd();
  CfSum tail;
  const __m256d vt = set1(theta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d arg = _mm256_mul_pd(vt, _mm256_loadu_pd(x + i));
    if (_mm256_movemask_pd(_mm256_cmp_pd(vabs(arg), set1(kTrigLimit), _CMP_LE_OQ)) == 0xF) {
      __m256d s, c;
      vsincos(arg, s, c);
      cs = _mm256_add_pd(cs, c);
      sn = _mm256_add_pd(sn, s);
    } else {
      for (std::size_t j = i; j < i + 4; ++j) {
        tail.cos_sum += std::cos(theta * x[j]);
        tail.sin_sum += std::sin(theta * x[j]);
      }
    }
  }
  for (; i < n; ++i) {
    tail.cos_sum += std::cos(theta * x[i]);
    tail.sin_sum += std::sin(theta * x[i]);
  }
  return {hsum(cs) + tail.cos_sum, hsum(sn) + tail.sin_sum};
}

std::size_t count_greater(const double* x, std::size_t n, double t) {
  std::size_t c = 0;
  const __m256d vt = set1(t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    c += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), vt, _CMP_GT_OQ)))));
  }
  for (; i < n; ++i) c += x[i] > t ? 1 : 0;
  return c;
}

void neg_log(const double* u, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(u + i);
    if (log_domain(v)) {
      _mm256_storeu_pd(out + i, _mm256_xor_pd(vlog(v), set1(-0.0)));
    } else {
      for (std::size_t j = i; j < i + 4; ++j) out[j] = -std::log(u[j]);
    }
  }
  for (; i < n; ++i) out[i] = -std::log(u[i]);
}

void advance_arrivals(double* gamma, const double* incr, double inv_alpha, double* w, std::size_t n) {
  const __m256d ninv = set1(-inv_alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_add_pd(_mm256_loadu_pd(gamma + i), _mm256_loadu_pd(incr + i));
    _mm256_storeu_pd(gamma + i, g);
    bool done = false;
    if (log_domain(g)) {
      const __m256d y = _mm256_mul_pd(ninv, vlog(g));
      if (exp_domain(y)) {
        _mm256_storeu_pd(w + i, vexp(y));
        done = true;
      }
    }
    if (!done) {
      for (std::size_t j = i; j < i + 4; ++j) w[j] = std::exp(-inv_alpha * std::log(gamma[j]));
    }
  }
  for (; i < n; ++i) {
    gamma[i] += incr[i];
    w[i] = std::exp(-inv_alpha * std::log(gamma[i]));
  }
}

void fma_accumulate(double* acc, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) acc[i] = std::fma(a[i], b[i], acc[i]);
}

}  // namespace mwl::simd::avx2
