#include "triples.hpp"

#include <algorithm>

namespace mwl::experiments::detail {

std::vector<Triple> defect_triples(const ExperimentConfig& cfg) {
  std::vector<Triple> t;
  for (std::size_t n = 2; n <= cfg.n_max; n *= 2) t.push_back({0, n / 2, n});
  Rng rng = aux_stream(cfg.seed, 1);
  const std::size_t gap = std::min(cfg.stats.max_gap, cfg.n_max - 1);
  for (std::size_t i = 0; gap > 0 && i < cfg.stats.triples; ++i) {
    const std::size_t b = 1 + rng.index(gap);
    const std::size_t a = 1 + rng.index(cfg.n_max - b);
    t.push_back({0, a, a + b});
  }
  return t;
}

std::vector<double> triple_defects(const WalkBuffer& b, const std::vector<Triple>& t) {
  std::vector<double> out;
  out.reserve(t.size());
  for (const auto& x : t) out.push_back(checked(b.delta_kappa_pair(x.l, x.m, x.n), "a triangle defect"));
  return out;
}

}  // namespace mwl::experiments::detail
