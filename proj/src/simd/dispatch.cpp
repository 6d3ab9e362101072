#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "mwl/errors.hpp"

namespace mwl::simd {

namespace {

Backend detect() {
  const char* env = std::getenv("MWL_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::Scalar;
  return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<int>& override_slot() {
  static std::atomic<int> slot{-1};
  return slot;
}

bool use_avx2() { return active_backend() == Backend::Avx2; }

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw UsageError("kernel operands have different lengths");
}

}  // namespace

bool avx2_available() {
#if defined(MWL_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Backend active_backend() {
  const int forced = override_slot().load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Backend>(forced);
  static const Backend chosen = detect();
  return chosen;
}

const char* backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_available()) throw UsageError("AVX2 backend not available on this CPU");
  override_slot().store(static_cast<int>(b), std::memory_order_relaxed);
}

#if defined(MWL_HAVE_AVX2)
#define MWL_DISPATCH(call) (use_avx2() ? avx2::call : scalar::call)
#else
#define MWL_DISPATCH(call) (scalar::call)
#endif

double sum(std::span<const double> x) { return MWL_DISPATCH(sum(x.data(), x.size())); }

double pow_abs_dev_sum(std::span<const double> x, double c, double q) {
  if (!(q > 0.0)) throw UsageError("exponent q must be positive");
  return MWL_DISPATCH(pow_abs_dev_sum(x.data(), x.size(), c, q));
}

double pow_abs_diff_sum(std::span<const double> a, std::span<const double> b, double q) {
  if (!(q > 0.0)) throw UsageError("exponent q must be positive");
  require_same_length(a.size(), b.size());
  return MWL_DISPATCH(pow_abs_diff_sum(a.data(), b.data(), a.size(), q));
}

CfSum cf_sum(std::span<const double> x, double theta) { return MWL_DISPATCH(cf_sum(x.data(), x.size(), theta)); }

std::size_t count_greater(std::span<const double> x, double t) {
  return MWL_DISPATCH(count_greater(x.data(), x.size(), t));
}

void neg_log(std::span<const double> u, std::span<double> out) {
  require_same_length(u.size(), out.size());
  MWL_DISPATCH(neg_log(u.data(), out.data(), u.size()));
}

void advance_arrivals(std::span<double> gamma, std::span<const double> incr, double inv_alpha, std::span<double> w) {
  require_same_length(gamma.size(), incr.size());
  require_same_length(gamma.size(), w.size());
  MWL_DISPATCH(advance_arrivals(gamma.data(), incr.data(), inv_alpha, w.data(), gamma.size()));
}

void fma_accumulate(std::span<double> acc, std::span<const double> a, std::span<const double> b) {
  require_same_length(acc.size(), a.size());
  require_same_length(acc.size(), b.size());
  MWL_DISPATCH(fma_accumulate(acc.data(), a.data(), b.data(), acc.size()));
}

#undef MWL_DISPATCH

}  // namespace mwl::simd
