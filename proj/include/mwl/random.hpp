#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mwl {

/// Seeded generator used by every sampler. One instance per worker; never shared.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for replica r of a run seeded with seed.
  static Rng for_replica(std::uint64_t seed, std::uint64_t replica);

  std::uint64_t next() { return engine_(); }
  /// [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// (0, 1]
  double uniform_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }
  double exponential();
  double normal();
  /// Survival t^-alpha on [1, inf).
  double pareto(double alpha);
  /// Uniform on {0, ..., n-1}.
  std::size_t index(std::size_t n);
  /// Index drawn from normalized weights.
  std::size_t discrete(std::span<const double> weights);
  bool coin() { return (engine_() >> 63) != 0; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mwl
