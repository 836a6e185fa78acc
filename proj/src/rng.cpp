#include "edgepower/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace edgepower {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ stream;
  return splitmix64(state);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the low tail so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

std::uint64_t Rng::poisson(double lambda) {
  if (!(lambda > 0.0)) return 0;
  constexpr double kChunk = 30.0;
  std::uint64_t total = 0;
  double remaining = lambda;
  while (remaining > 0.0) {
    const double part = std::min(remaining, kChunk);
    remaining -= part;
    const double limit = std::exp(-part);
    double product = uniform();
    std::uint64_t k = 0;
    while (product > limit) {
      ++k;
      product *= uniform();
    }
    total += k;
  }
  return total;
}

double Rng::normal(double mean, double sd) {
  // 1 - uniform() lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sd * z;
}

}  // namespace edgepower
