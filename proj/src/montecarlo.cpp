#include "edgepower/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "edgepower/policy.hpp"
#include "edgepower/rng.hpp"

namespace edgepower {

namespace {

constexpr double kZ95 = 1.96;

/// Runs fn(i) for i in [0, count) on up to hardware_concurrency threads.
/// Each index writes only its own output slot.
template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : threads) t.join();
}

}  // namespace

void SimulationConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("simulation needs at least one step");
  if (burn_in >= steps) throw std::invalid_argument("burn_in must be smaller than steps");
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::WakeUpDelay: return "wake_up_delay";
    case EventKind::OverloadEntry: return "overload_entry";
  }
  return "?";
}

std::string_view to_string(CiMethod method) noexcept {
  return method == CiMethod::SqrtSigma ? "sqrt-sigma" : "wald";
}

double SimulationRun::mean_power() const {
  return window_ticks == 0 ? 0.0 : energy_joules / (static_cast<double>(window_ticks) * kTickSeconds);
}

std::uint64_t SimulationRun::count_events(EventKind kind) const {
  return static_cast<std::uint64_t>(
      std::count_if(events.begin(), events.end(), [kind](const Event& e) { return e.kind == kind; }));
}

double SimulationRun::late_service_fraction() const {
  if (demand_ticks == 0) return 0.0;
  return static_cast<double>(count_events(EventKind::WakeUpDelay)) / static_cast<double>(demand_ticks);
}

double SimulationRun::time_share(Index state) const {
  if (state < 0 || state >= occupancy.size()) return 0.0;
  return occupancy(state);
}

SimulationRun simulate(const TransitionMatrix& m, const DeviceProfile& profile,
                       const SimulationConfig& cfg) {
  const PolicySpec fixed{"fixed_matrix", FixedMatrixPolicy{}, kDefaultCapacity};
  return run_policy(fixed, m, profile, WorkloadTrace{}, cfg);
}

double tvd(const Eigen::VectorXd& empirical, const Eigen::VectorXd& analytical) {
  if (empirical.size() != analytical.size())
    throw DimensionMismatch("tvd: distributions have different lengths");
  return (empirical - analytical).cwiseAbs().sum();
}

double tvd(const StationaryDistribution& empirical, const StationaryDistribution& analytical) {
  return tvd(empirical.probs(), analytical.probs());
}

Interval confidence_interval(double pi_hat, double sigma, std::uint64_t n, CiMethod method) {
  if (!(pi_hat >= 0.0 && pi_hat <= 1.0)) throw std::invalid_argument("pi_hat must lie in [0, 1]");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double spread = method == CiMethod::SqrtSigma ? sigma : pi_hat * (1.0 - pi_hat);
  const double half = kZ95 * std::sqrt(spread / static_cast<double>(n));
  return {std::clamp(pi_hat - half, 0.0, 1.0), std::clamp(pi_hat + half, 0.0, 1.0)};
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) {
  return replica == 0 ? seed : derive_seed(seed, streams::kReplica + replica);
}

Eigen::VectorXd prefix_occupancy(const std::vector<Index>& states, Index n, std::uint64_t prefix) {
  if (prefix == 0 || prefix > states.size()) throw std::invalid_argument("prefix out of range");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  for (std::uint64_t t = 0; t < prefix; ++t) counts(states[t]) += 1.0;
  return counts / static_cast<double>(prefix);
}

ConvergenceReport convergence_study(const TransitionMatrix& m, const DeviceProfile& profile,
                                    std::uint64_t seed, std::vector<std::uint64_t> checkpoints,
                                    std::size_t replicas, std::optional<Index> initial_state) {
  if (checkpoints.empty()) throw std::invalid_argument("at least one checkpoint is required");
  if (checkpoints.front() == 0) throw std::invalid_argument("checkpoints must be positive");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  if (replicas == 0) throw std::invalid_argument("at least one replica is required");

  const StationaryDistribution analytical = steady_state(m);
  const Index n = m.size();
  const std::uint64_t horizon = checkpoints.back();

  // tvds[r][c] and final occupancy per replica.
  std::vector<std::vector<double>> tvds(replicas, std::vector<double>(checkpoints.size()));
  std::vector<Eigen::VectorXd> finals(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    SimulationConfig cfg;
    cfg.steps = horizon;
    cfg.seed = replica_seed(seed, r);
    cfg.initial_state = initial_state;
    const SimulationRun run = simulate(m, profile, cfg);
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
      tvds[r][c] = tvd(prefix_occupancy(run.states, n, checkpoints[c]), analytical.probs());
    finals[r] = run.occupancy;
  });

  ConvergenceReport report;
  report.replicas = replicas;
  report.seed = seed;
  report.generator = std::string(Rng::kAlgorithm);
  report.analytical = analytical.probs();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) sum += tvds[r][c];
    report.checkpoints.push_back({checkpoints[c], tvds[0][c], sum / static_cast<double>(replicas)});
  }
  report.final_tvd = report.checkpoints.back().tvd;

  for (Index i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& f : finals) mean += f(i);
    mean /= static_cast<double>(replicas);
    double ss = 0.0;
    for (const auto& f : finals) ss += (f(i) - mean) * (f(i) - mean);
    const double sigma = replicas > 1 ? std::sqrt(ss / static_cast<double>(replicas - 1)) : 0.0;
    const double estimate = finals[0](i);
    report.intervals.push_back({i, analytical(i), estimate, sigma,
                                confidence_interval(estimate, sigma, horizon, CiMethod::SqrtSigma),
                                confidence_interval(estimate, sigma, horizon, CiMethod::Wald)});
  }
  return report;
}

}  // namespace edgepower
