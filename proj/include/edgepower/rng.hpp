#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace edgepower {

/// Advances a splitmix64 state and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes a base seed with a stream id into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Well-known stream ids. Node m of a fleet uses stream m.
namespace streams {
inline constexpr std::uint64_t kScheduler = 0x5C4EDULL;
inline constexpr std::uint64_t kForecast = 0xF0CA57ULL;
inline constexpr std::uint64_t kTraining = 0x7EA1ULL;
inline constexpr std::uint64_t kWorkload = 0x3041ULL;
inline constexpr std::uint64_t kReplica = 0x4E9100ULL;
}  // namespace streams

/// Reproducible random source.
///
/// The engine is std::mt19937_64 seeded with `derive_seed(seed, stream)`.
/// All derived variates are computed here rather than through the standard
/// distributions, whose algorithms differ between library vendors:
///   uniform()        top 53 bits of one draw, scaled to [0, 1)
///   uniform_index(n) rejection sampling on one or more raw draws;
///                    n == 1 consumes nothing
///   poisson(l)       Knuth's product method, l split into chunks <= 30
///   normal(m, s)     Box-Muller using two uniform() draws (cosine branch)
///   categorical(p)   inverse CDF with one uniform() draw
class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64 (splitmix64-derived seed); 53-bit uniforms; inverse-CDF categorical";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::size_t uniform_index(std::size_t n);
  std::uint64_t poisson(double lambda);
  double normal(double mean, double sd);

  /// Samples an index from a probability row. The row is assumed to sum to 1;
  /// rounding slack falls on the last index with positive mass.
  template <typename Derived>
  Eigen::Index categorical(const Eigen::DenseBase<Derived>& probs) {
    const double u = uniform();
    double cumulative = 0.0;
    Eigen::Index last_positive = 0;
    for (Eigen::Index j = 0; j < probs.size(); ++j) {
      const double p = static_cast<double>(probs(j));
      if (p <= 0.0) continue;
      last_positive = j;
      cumulative += p;
      if (u < cumulative) return j;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgepower
