#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "edgepower/error.hpp"
#include "edgepower/workload.hpp"

using namespace edgepower;

namespace {

struct Moments {
  double mean;
  double variance;
  double zero_fraction;
};

Moments moments(const WorkloadTrace& t) {
  double sum = 0.0;
  double sq = 0.0;
  double zeros = 0.0;
  for (auto d : t.demands) {
    sum += static_cast<double>(d);
    sq += static_cast<double>(d * d);
    zeros += d == 0 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(t.size());
  const double mean = sum / n;
  return {mean, sq / n - mean * mean, zeros / n};
}

}  // namespace

TEST(GeneratePoisson, ZeroFractionMatchesPmf) {
  const auto m = moments(generate_poisson(0.3, 100000, 1));
  EXPECT_NEAR(m.zero_fraction, std::exp(-0.3), 0.01);
}

TEST(GeneratePoisson, MeanMatchesLambda) {
  const auto m = moments(generate_poisson(2.0, 100000, 2));
  EXPECT_NEAR(m.mean, 2.0, 0.05);
}

TEST(GeneratePoisson, MeanAndVarianceWithinThreePercent) {
  for (double lambda : {0.3, 1.0, 2.0}) {
    const auto m = moments(generate_poisson(lambda, 100000, 42));
    EXPECT_NEAR(m.mean, lambda, 0.03 * lambda) << "lambda " << lambda;
    EXPECT_NEAR(m.variance, lambda, 0.03 * lambda) << "lambda " << lambda;
  }
}

TEST(GeneratePoisson, EmptyAndReproducible) {
  EXPECT_EQ(generate_poisson(1.0, 0, 1).size(), 0u);
  EXPECT_EQ(generate_poisson(1.0, 1000, 5).demands, generate_poisson(1.0, 1000, 5).demands);
  EXPECT_NE(generate_poisson(1.0, 1000, 5).demands, generate_poisson(1.0, 1000, 6).demands);
  EXPECT_THROW(generate_poisson(0.0, 10, 1), std::invalid_argument);
}

TEST(LoadTrace, ReadsValuesInOrder) {
  std::istringstream in("0\n3\n1\n");
  EXPECT_EQ(load_trace(in).demands, (std::vector<std::uint64_t>{0, 3, 1}));
}

TEST(LoadTrace, EmptyFile) {
  std::istringstream in("");
  EXPECT_EQ(load_trace(in).size(), 0u);
}

TEST(LoadTrace, NegativeDemandNamesLine) {
  std::istringstream in("-1\n");
  try {
    load_trace(in);
    FAIL() << "expected NegativeDemand";
  } catch (const NegativeDemand& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  std::istringstream later("4\n2\n-7\n");
  try {
    load_trace(later);
    FAIL() << "expected NegativeDemand";
  } catch (const NegativeDemand& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadTrace, GarbageIsParseError) {
  std::istringstream in("1\nabc\n");
  try {
    load_trace(in);
    FAIL() << "expected ParseError";
  } catch (const NegativeDemand&) {
    FAIL() << "wrong error kind";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream blank("1\n\n2\n");
  EXPECT_THROW(load_trace(blank), ParseError);
}

TEST(LoadTrace, RoundTripsWrittenTrace) {
  const auto trace = generate_poisson(1.5, 500, 3);
  std::ostringstream out;
  write_trace(out, trace);
  std::istringstream in(out.str());
  EXPECT_EQ(load_trace(in).demands, trace.demands);
}

TEST(LoadTrace, MissingFile) { EXPECT_THROW(load_trace_file("/nonexistent/trace.txt"), Error); }

TEST(Forecaster, SmoothingAlphaOneIsLastObservation) {
  auto [f, prediction] = forecast_step(Forecaster::exponential_smoothing(1.0, 11.0), 7);
  EXPECT_DOUBLE_EQ(prediction, 7.0);
  EXPECT_DOUBLE_EQ(f.estimate(), 7.0);
}

TEST(Forecaster, SmoothingHalf) {
  auto [f, prediction] = forecast_step(Forecaster::exponential_smoothing(0.5, 4.0), 8);
  EXPECT_DOUBLE_EQ(prediction, 6.0);
}

TEST(Forecaster, SmoothingStaysBetweenEstimateAndObservation) {
  auto f = Forecaster::exponential_smoothing(0.3, 2.0);
  for (std::uint64_t observed : {0u, 9u, 4u, 4u, 1u}) {
    const double before = f.estimate();
    const double after = f.observe(observed);
    EXPECT_GE(after, std::min(before, static_cast<double>(observed)));
    EXPECT_LE(after, std::max(before, static_cast<double>(observed)));
  }
  EXPECT_THROW(Forecaster::exponential_smoothing(0.0), std::invalid_argument);
  EXPECT_THROW(Forecaster::exponential_smoothing(1.5), std::invalid_argument);
}

TEST(Forecaster, NoiselessOracle) {
  auto [f, prediction] = forecast_step(Forecaster::oracle(0.0, 1), 0, 3);
  EXPECT_DOUBLE_EQ(prediction, 3.0);
}

TEST(Forecaster, NoiselessOracleReproducesShiftedTrace) {
  const auto trace = generate_poisson(1.0, 1000, 9);
  auto f = Forecaster::oracle(0.0, 1);
  for (std::uint64_t t = 0; t + 1 < trace.size(); ++t)
    ASSERT_DOUBLE_EQ(f.observe(trace.at(t), trace.at(t + 1)), static_cast<double>(trace.at(t + 1)));
}

TEST(Forecaster, NoisyOracleIsClampedAndSeeded) {
  auto a = Forecaster::oracle(5.0, 17);
  auto b = Forecaster::oracle(5.0, 17);
  for (int i = 0; i < 200; ++i) {
    const double x = a.observe(0, 0);
    EXPECT_GE(x, 0.0);
    EXPECT_EQ(x, b.observe(0, 0));
  }
}

TEST(Forecaster, OracleNeedsTruth) {
  auto f = Forecaster::oracle(0.0, 1);
  EXPECT_THROW(f.observe(1), std::invalid_argument);
}
