#include "groundplan/random.hpp"

#include <cmath>
#include <limits>

namespace groundplan {

double Rng::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the tail that would bias the modulo.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Knuth's product method, split into chunks so exp(-chunk) never underflows.
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double chunk = remaining > 30.0 ? 30.0 : remaining;
    remaining -= chunk;
    const double limit = std::exp(-chunk);
    double product = uniform();
    while (product > limit) {
      ++total;
      product *= uniform();
    }
  }
  return total;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) {
  return splitmix64(splitmix64(parent) ^ (salt * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace groundplan
