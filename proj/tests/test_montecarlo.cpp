#include <cmath>

#include <gtest/gtest.h>

#include "edgepower/montecarlo.hpp"
#include "edgepower/rng.hpp"

using namespace edgepower;

namespace {

TransitionMatrix two_state(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return TransitionMatrix(m);
}

DeviceProfile two_state_profile(double p0 = 0.0, double p1 = 1.0) {
  Eigen::VectorXd power(2);
  power << p0, p1;
  return DeviceProfile("two", {"S0", "S1"}, power, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2));
}

SimulationConfig config(std::uint64_t steps, std::uint64_t seed, std::optional<Index> start = std::nullopt,
                        std::uint64_t burn_in = 0) {
  SimulationConfig cfg;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.initial_state = start;
  cfg.burn_in = burn_in;
  return cfg;
}

Eigen::VectorXd reference_pi() {
  Eigen::VectorXd pi(5);
  pi << 5.0, 10.0, 20.0, 28.0, 26.0;
  return pi / 89.0;
}

}  // namespace

TEST(SimulationConfig, Validation) {
  EXPECT_THROW(config(0, 1).validate(), std::invalid_argument);
  EXPECT_THROW(config(10, 1, std::nullopt, 10).validate(), std::invalid_argument);
  EXPECT_NO_THROW(config(10, 1, std::nullopt, 9).validate());
}

TEST(Simulate, DeterministicCycleAlternates) {
  const auto run = simulate(two_state(0, 1, 1, 0), two_state_profile(), config(1000, 3, 0));
  ASSERT_EQ(run.states.size(), 1000u);
  for (std::size_t t = 0; t < run.states.size(); ++t) EXPECT_EQ(run.states[t], static_cast<Index>(t % 2));
  EXPECT_DOUBLE_EQ(run.occupancy(0), 0.5);
  EXPECT_DOUBLE_EQ(run.occupancy(1), 0.5);
  EXPECT_DOUBLE_EQ(run.energy_joules, 500.0);
}

TEST(Simulate, AbsorbingStateDominates) {
  const auto run = simulate(two_state(1, 0, 0.5, 0.5), two_state_profile(), config(100000, 9, 1));
  EXPECT_EQ(run.states[0], 1);
  EXPECT_GT(run.occupancy(0), 0.999);
}

TEST(Simulate, ReferenceMatrixConverges) {
  const auto run = simulate(reference_matrix(), default_profile(), config(100000, 42));
  EXPECT_LT(tvd(run.occupancy, reference_pi()), 0.02);
}

TEST(Simulate, BitIdenticalForSameSeed) {
  const auto cfg = config(20000, 1234);
  const auto a = simulate(reference_matrix(), default_profile(), cfg);
  const auto b = simulate(reference_matrix(), default_profile(), cfg);
  EXPECT_TRUE(a == b);
  const auto c = simulate(reference_matrix(), default_profile(), config(20000, 1235));
  EXPECT_NE(a.states, c.states);
}

TEST(Simulate, OccupancyCountsAreIntegersOverWindow) {
  const auto cfg = config(5000, 77, std::nullopt, 1234);
  const auto run = simulate(reference_matrix(), default_profile(), cfg);
  const double window = 5000.0 - 1234.0;
  EXPECT_EQ(run.window_ticks, 5000u - 1234u);
  double total = 0.0;
  for (Index i = 0; i < run.occupancy.size(); ++i) {
    const double count = run.occupancy(i) * window;
    EXPECT_NEAR(count, std::round(count), 1e-9);
    EXPECT_EQ(static_cast<std::uint64_t>(std::llround(count)), run.counts[static_cast<std::size_t>(i)]);
    total += count;
  }
  EXPECT_NEAR(total, window, 1e-9);
  EXPECT_NEAR(run.occupancy.sum(), 1.0, 1e-12);
}

TEST(Simulate, EnergyCountsStateAndEdgeEnergy) {
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(2, 2);
  edges(0, 1) = 0.75;
  edges(1, 0) = 0.25;
  Eigen::VectorXd power(2);
  power << 1.0, 3.0;
  const DeviceProfile profile("edges", {"S0", "S1"}, power, Eigen::MatrixXd::Zero(2, 2), edges);
  const auto run = simulate(two_state(0, 1, 1, 0), profile, config(10, 1, 0));
  // Five ticks in each state, nine transitions (five 0->1, four 1->0).
  EXPECT_DOUBLE_EQ(run.energy_joules, 5 * 1.0 + 5 * 3.0 + 5 * 0.75 + 4 * 0.25);
  EXPECT_GE(run.energy_joules, 0.0);
}

TEST(Simulate, GeneratorIdentityRecorded) {
  const auto run = simulate(reference_matrix(), default_profile(), config(10, 1));
  EXPECT_EQ(run.generator, std::string(Rng::kAlgorithm));
}

TEST(Simulate, DimensionMismatch) {
  EXPECT_THROW(simulate(reference_matrix(), two_state_profile(), config(10, 1)), DimensionMismatch);
}

TEST(Tvd, FrozenValues) {
  Eigen::VectorXd a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_DOUBLE_EQ(tvd(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tvd(a, b), 2.0);
  Eigen::VectorXd emp(5);
  emp << 0.06, 0.11, 0.22, 0.31, 0.30;
  // |0.06-5/89| + |0.11-10/89| + |0.22-20/89| + |0.31-28/89| + |0.30-26/89|
  const double by_hand = (0.06 - 5.0 / 89) + (10.0 / 89 - 0.11) + (20.0 / 89 - 0.22) + (28.0 / 89 - 0.31) +
                         (0.30 - 26.0 / 89);
  EXPECT_NEAR(tvd(emp, reference_pi()), by_hand, 1e-15);
  EXPECT_NEAR(tvd(emp, reference_pi()), 0.02337, 1e-5);
}

TEST(Tvd, SymmetricAndNonNegative) {
  Eigen::VectorXd a(3), b(3);
  a << 0.2, 0.3, 0.5;
  b << 0.1, 0.6, 0.3;
  EXPECT_DOUBLE_EQ(tvd(a, b), tvd(b, a));
  EXPECT_GT(tvd(a, b), 0.0);
  EXPECT_THROW(tvd(a, Eigen::VectorXd::Zero(2)), DimensionMismatch);
}

TEST(ConfidenceInterval, SqrtSigma) {
  const auto ci = confidence_interval(0.5, 0.04, 10000, CiMethod::SqrtSigma);
  EXPECT_NEAR(ci.lower, 0.49608, 1e-12);
  EXPECT_NEAR(ci.upper, 0.50392, 1e-12);
}

TEST(ConfidenceInterval, Wald) {
  const auto ci = confidence_interval(0.5, 123.0, 10000, CiMethod::Wald);
  EXPECT_NEAR(ci.lower, 0.4902, 1e-12);
  EXPECT_NEAR(ci.upper, 0.5098, 1e-12);
}

TEST(ConfidenceInterval, DegenerateAndClamped) {
  auto ci = confidence_interval(0.3, 0.0, 100, CiMethod::SqrtSigma);
  EXPECT_DOUBLE_EQ(ci.lower, 0.3);
  EXPECT_DOUBLE_EQ(ci.upper, 0.3);
  ci = confidence_interval(1.0, 0.5, 100, CiMethod::Wald);
  EXPECT_DOUBLE_EQ(ci.lower, 1.0);
  EXPECT_DOUBLE_EQ(ci.upper, 1.0);
  ci = confidence_interval(0.01, 0.5, 10, CiMethod::SqrtSigma);
  EXPECT_DOUBLE_EQ(ci.lower, 0.0);
  EXPECT_THROW(confidence_interval(1.5, 0.1, 10, CiMethod::Wald), std::invalid_argument);
  EXPECT_THROW(confidence_interval(0.5, 0.1, 0, CiMethod::Wald), std::invalid_argument);
}

TEST(ConvergenceStudy, CycleHasZeroTvdAtEvenCheckpoints) {
  const auto report = convergence_study(two_state(0, 1, 1, 0), two_state_profile(), 5, {10, 100, 1000}, 4);
  for (const auto& c : report.checkpoints) {
    EXPECT_DOUBLE_EQ(c.tvd, 0.0);
    EXPECT_DOUBLE_EQ(c.mean_tvd, 0.0);
  }
}

TEST(ConvergenceStudy, SingleStateIsExact) {
  const TransitionMatrix one(Eigen::MatrixXd::Ones(1, 1));
  const DeviceProfile profile("one", {"On"}, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1),
                              Eigen::MatrixXd::Zero(1, 1));
  const auto report = convergence_study(one, profile, 5, {1, 10, 100}, 3);
  for (const auto& c : report.checkpoints) EXPECT_DOUBLE_EQ(c.tvd, 0.0);
}

TEST(ConvergenceStudy, ReplicaZeroIsThePrimaryTrajectory) {
  const auto report = convergence_study(reference_matrix(), default_profile(), 42, {100, 1000}, 3);
  const auto run = simulate(reference_matrix(), default_profile(), config(1000, 42));
  EXPECT_DOUBLE_EQ(report.checkpoints.back().tvd, tvd(run.occupancy, reference_pi()));
  EXPECT_DOUBLE_EQ(report.final_tvd, report.checkpoints.back().tvd);
}

TEST(ConvergenceStudy, IntervalsContainEstimatesAndTvdInRange) {
  const auto report = convergence_study(reference_matrix(), default_profile(), 8, {1000, 10000}, 10);
  ASSERT_EQ(report.intervals.size(), 5u);
  for (const auto& si : report.intervals) {
    EXPECT_TRUE(si.sqrt_sigma.contains(si.estimate));
    EXPECT_TRUE(si.wald.contains(si.estimate));
    EXPECT_GE(si.sigma, 0.0);
  }
  for (const auto& c : report.checkpoints) {
    EXPECT_GE(c.tvd, 0.0);
    EXPECT_LE(c.tvd, 2.0);
  }
}

TEST(ConvergenceStudy, ReproducibleAndValidatesCheckpoints) {
  const auto a = convergence_study(reference_matrix(), default_profile(), 3, {100, 1000}, 6);
  const auto b = convergence_study(reference_matrix(), default_profile(), 3, {100, 1000}, 6);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) EXPECT_EQ(a.checkpoints[i].mean_tvd, b.checkpoints[i].mean_tvd);
  EXPECT_THROW(convergence_study(reference_matrix(), default_profile(), 3, {100, 100}), std::invalid_argument);
  EXPECT_THROW(convergence_study(reference_matrix(), default_profile(), 3, {}), std::invalid_argument);
}

TEST(ConvergenceStudy, MeanTvdShrinksWithLength) {
  const auto report = convergence_study(reference_matrix(), default_profile(), 42, {1000, 100000}, 10);
  EXPECT_LT(report.checkpoints[1].mean_tvd, report.checkpoints[0].mean_tvd);
}
