#include "edgepower/workload.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "edgepower/error.hpp"

namespace edgepower {

WorkloadTrace generate_poisson(double lambda, std::uint64_t ticks, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("poisson rate must be > 0");
  Rng rng(seed, streams::kWorkload);
  WorkloadTrace trace;
  trace.demands.reserve(ticks);
  for (std::uint64_t t = 0; t < ticks; ++t) trace.demands.push_back(rng.poisson(lambda));
  trace.source = "poisson(lambda=" + std::to_string(lambda) + ", seed=" + std::to_string(seed) + ")";
  return trace;
}

WorkloadTrace load_trace(std::istream& in, std::string source) {
  WorkloadTrace trace;
  trace.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
      // Only trailing blank lines are tolerated.
      std::string rest;
      while (std::getline(in, rest)) {
        ++line_no;
        if (rest.find_first_not_of(" \t\r") != std::string::npos)
          throw ParseError(line_no - 1, "blank record");
      }
      break;
    }
    text.remove_prefix(first);
    text = text.substr(0, text.find_last_not_of(" \t\r") + 1);
    if (!text.empty() && text.front() == '-') {
      long long probe = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), probe);
      if (ec == std::errc() && ptr == text.data() + text.size()) throw NegativeDemand(line_no);
      throw ParseError(line_no, "not an integer: '" + std::string(text) + "'");
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ParseError(line_no, "not an integer: '" + std::string(text) + "'");
    trace.demands.push_back(value);
  }
  return trace;
}

WorkloadTrace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file '" + path + "'");
  return load_trace(in, path);
}

void write_trace(std::ostream& out, const WorkloadTrace& trace) {
  for (auto d : trace.demands) out << d << '\n';
}

Forecaster Forecaster::exponential_smoothing(double alpha, double initial_estimate) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("smoothing alpha must lie in (0, 1]");
  if (!(initial_estimate >= 0.0)) throw std::invalid_argument("initial estimate must be >= 0");
  return Forecaster(ForecasterKind::ExponentialSmoothing, alpha, 0.0, initial_estimate, Rng(0));
}

Forecaster Forecaster::oracle(double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("oracle noise_sd must be >= 0");
  return Forecaster(ForecasterKind::OracleWithNoise, 1.0, noise_sd, 0.0, Rng(seed, streams::kForecast));
}

Forecaster Forecaster::from_spec(const ForecasterSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ForecasterKind::ExponentialSmoothing:
      return exponential_smoothing(spec.alpha);
    case ForecasterKind::OracleWithNoise:
      return oracle(spec.noise_sd, seed);
  }
  throw std::logic_error("unhandled forecaster kind");
}

double Forecaster::observe(std::uint64_t observed, std::optional<std::uint64_t> true_next) {
  switch (kind_) {
    case ForecasterKind::ExponentialSmoothing:
      estimate_ = alpha_ * static_cast<double>(observed) + (1.0 - alpha_) * estimate_;
      return estimate_;
    case ForecasterKind::OracleWithNoise: {
      if (!true_next) throw std::invalid_argument("oracle forecaster needs the true next demand");
      double value = static_cast<double>(*true_next);
      if (noise_sd_ > 0.0) value += rng_.normal(0.0, noise_sd_);
      estimate_ = std::max(0.0, value);
      return estimate_;
    }
  }
  throw std::logic_error("unhandled forecaster kind");
}

std::pair<Forecaster, double> forecast_step(Forecaster f, std::uint64_t observed,
                                            std::optional<std::uint64_t> true_next) {
  const double predicted = f.observe(observed, true_next);
  return {std::move(f), predicted};
}

}  // namespace edgepower
