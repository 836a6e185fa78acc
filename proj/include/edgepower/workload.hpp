#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgepower/rng.hpp"

namespace edgepower {

/// Tasks arriving per tick.
struct WorkloadTrace {
  std::vector<std::uint64_t> demands;
  std::string source;

  std::size_t size() const noexcept { return demands.size(); }
  /// Demand at `tick`, or 0 past the end of the trace.
  std::uint64_t at(std::uint64_t tick) const noexcept {
    return tick < demands.size() ? demands[tick] : 0;
  }
};

/// Independent Poisson(lambda) arrivals per tick.
WorkloadTrace generate_poisson(double lambda, std::uint64_t ticks, std::uint64_t seed);

/// Reads one nonnegative integer per line. Throws ParseError / NegativeDemand
/// carrying the 1-based line number.
WorkloadTrace load_trace(std::istream& in, std::string source = "stream");
WorkloadTrace load_trace_file(const std::string& path);
void write_trace(std::ostream& out, const WorkloadTrace& trace);

enum class ForecasterKind { ExponentialSmoothing, OracleWithNoise };

struct ForecasterSpec {
  ForecasterKind kind = ForecasterKind::OracleWithNoise;
  double alpha = 0.5;
  double noise_sd = 0.0;
};

/// Next-tick demand estimator.
class Forecaster {
 public:
  static Forecaster exponential_smoothing(double alpha, double initial_estimate = 0.0);
  static Forecaster oracle(double noise_sd, std::uint64_t seed);
  static Forecaster from_spec(const ForecasterSpec& spec, std::uint64_t seed);

  ForecasterKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double noise_sd() const noexcept { return noise_sd_; }
  double estimate() const noexcept { return estimate_; }

  /// Advances one tick and returns the prediction for the next one.
  /// The oracle requires `true_next` and throws std::invalid_argument without it.
  double observe(std::uint64_t observed, std::optional<std::uint64_t> true_next = std::nullopt);

 private:
  Forecaster(ForecasterKind kind, double alpha, double noise_sd, double estimate, Rng rng)
      : kind_(kind), alpha_(alpha), noise_sd_(noise_sd), estimate_(estimate), rng_(std::move(rng)) {}

  ForecasterKind kind_;
  double alpha_;
  double noise_sd_;
  double estimate_;
  Rng rng_;
};

/// Value-style wrapper around Forecaster::observe.
std::pair<Forecaster, double> forecast_step(Forecaster f, std::uint64_t observed,
                                            std::optional<std::uint64_t> true_next = std::nullopt);

}  // namespace edgepower
