#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace groundplan {

// Every stochastic routine draws from Rng so that results depend only on the
// seed, never on evaluation order or the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Order-sensitive combination used to derive child seeds.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace groundplan
