#include "mwl/random.hpp"

#include <cmath>

#include "mwl/errors.hpp"

namespace mwl {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::for_replica(std::uint64_t seed, std::uint64_t replica) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
  Rng r(0);
  r.engine_.seed(seq);
  return r;
}

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::normal() { return normal_(engine_); }

double Rng::pareto(double alpha) { return std::pow(uniform_open(), -1.0 / alpha); }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw UsageError("index() needs n >= 1");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::size_t Rng::discrete(std::span<const double> weights) {
  if (weights.empty()) throw UsageError("discrete() needs at least one weight");
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace mwl
