#pragma once

// Triangle defects ΔS(l, m, n) of S_{m,n} = Δκ(γ̃_{m,n}) on a fixed set of
// index triples, and the constants C_q = max E|ΔS|^q, V_q = max Var_q(ΔS).

#include <cstddef>
#include <vector>

#include "common.hpp"

namespace mwl::experiments::detail {

struct Triple {
  std::size_t l, m, n;
};

/// Dyadic triples (0, 2^{j−1}, 2^j) up to n_max plus cfg.stats.triples random
/// triples (0, a, a + b) with b <= max_gap. By stationarity l = 0 loses nothing.
std::vector<Triple> defect_triples(const ExperimentConfig& cfg);

/// ΔS(l, m, n) = κ(γ_{l,n}) − κ(γ_{l,m}) − κ(γ_{m,n}) for each triple.
std::vector<double> triple_defects(const WalkBuffer& b, const std::vector<Triple>& t);

struct DefectConstants {
  Estimate c_q;  // max over triples of E|ΔS|^q
  Estimate v_q;  // max over triples of Var_q(ΔS)
  Estimate c_q_mean;  // mean over triples, for reference
};

template <class Rec, class Get>
DefectConstants defect_constants(const std::vector<Rec>& recs, Get&& get, double q) {
  DefectConstants out;
  const std::size_t count = get(recs.front()).size();
  double total = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const auto x = column(recs, [&](const Rec& r) { return get(r)[t]; });
    const auto c = mean_abs_pow(x, q);
    const auto v = var_q_se(x, q);
    if (t == 0 || c.mean > out.c_q.value) out.c_q = {c.mean, c.se};
    if (t == 0 || v.value > out.v_q.value) out.v_q = v;
    total += c.mean;
  }
  out.c_q_mean = {total / static_cast<double>(count), 0.0};
  return out;
}

}  // namespace mwl::experiments::detail
