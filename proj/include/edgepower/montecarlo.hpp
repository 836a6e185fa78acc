#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "edgepower/markov.hpp"

namespace edgepower {

/// Seconds per simulation tick. One second makes watts and joules-per-tick equal.
inline constexpr double kTickSeconds = 1.0;

struct SimulationConfig {
  std::uint64_t steps = 100000;
  std::uint64_t seed = 0;
  /// nullopt draws the start state uniformly from the node's stream.
  std::optional<Index> initial_state;
  /// Leading ticks excluded from occupancy, energy and events.
  std::uint64_t burn_in = 0;

  /// Throws std::invalid_argument unless steps >= 1 and burn_in < steps.
  void validate() const;
};

enum class EventKind { WakeUpDelay, OverloadEntry };

struct Event {
  std::uint64_t tick;
  EventKind kind;

  friend bool operator==(const Event&, const Event&) = default;
};

std::string_view to_string(EventKind kind) noexcept;

/// One seeded trajectory and its ledgers. Statistics cover ticks >= burn_in.
struct SimulationRun {
  std::vector<Index> states;           ///< length = steps
  std::vector<std::uint64_t> counts;   ///< ticks per state in the window
  Eigen::VectorXd occupancy;           ///< counts / window length
  double energy_joules = 0.0;          ///< state power x tick + edge energy
  std::vector<Event> events;
  std::uint64_t window_ticks = 0;
  std::uint64_t demand_ticks = 0;         ///< ticks with at least one arrival
  std::uint64_t arrivals = 0;
  std::uint64_t served = 0;
  std::uint64_t unserved_task_ticks = 0;  ///< sum over ticks of tasks still queued
  std::string generator;

  double mean_power() const;
  std::uint64_t count_events(EventKind kind) const;
  /// Wake-up-delay events per tick with arrivals; 0 when nothing arrived.
  double late_service_fraction() const;
  /// Share of window ticks spent in `state`.
  double time_share(Index state) const;

  friend bool operator==(const SimulationRun&, const SimulationRun&) = default;
};

/// Samples a trajectory of `cfg.steps` states from `m` and keeps the ledgers.
SimulationRun simulate(const TransitionMatrix& m, const DeviceProfile& profile,
                       const SimulationConfig& cfg);

/// Unhalved L1 distance sum_i |a_i - b_i|; lies in [0, 2].
double tvd(const Eigen::VectorXd& empirical, const Eigen::VectorXd& analytical);
double tvd(const StationaryDistribution& empirical, const StationaryDistribution& analytical);

enum class CiMethod { SqrtSigma, Wald };
std::string_view to_string(CiMethod method) noexcept;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// 95% interval for a state probability, clamped to [0, 1].
///   SqrtSigma: pi_hat +/- 1.96 sqrt(sigma / n)
///   Wald:         pi_hat +/- 1.96 sqrt(pi_hat (1 - pi_hat) / n); sigma unused
Interval confidence_interval(double pi_hat, double sigma, std::uint64_t n, CiMethod method);

struct Checkpoint {
  std::uint64_t steps;
  double tvd;        ///< primary trajectory
  double mean_tvd;   ///< across all replicas, primary included
};

struct StateInterval {
  Index state;
  double analytical;
  double estimate;   ///< primary trajectory occupancy at the last checkpoint
  double sigma;      ///< sample sd of occupancy across replicas
  Interval sqrt_sigma;
  Interval wald;
};

struct ConvergenceReport {
  std::vector<Checkpoint> checkpoints;
  double final_tvd = 0.0;
  Eigen::VectorXd analytical;
  std::vector<StateInterval> intervals;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  std::string generator;
};

inline constexpr std::size_t kDefaultReplicas = 30;

/// Seed of replica r: r == 0 reuses `seed`, others derive independent streams.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica);

/// Runs `replicas` trajectories up to the largest checkpoint and measures TVD
/// against the analytical steady state at every checkpoint. Replica 0 is the
/// trajectory `simulate` produces for `seed`. Replicas run concurrently.
ConvergenceReport convergence_study(const TransitionMatrix& m, const DeviceProfile& profile,
                                    std::uint64_t seed, std::vector<std::uint64_t> checkpoints,
                                    std::size_t replicas = kDefaultReplicas,
                                    std::optional<Index> initial_state = std::nullopt);

/// Empirical occupancy of the first `prefix` states of a trajectory.
Eigen::VectorXd prefix_occupancy(const std::vector<Index>& states, Index n, std::uint64_t prefix);

}  // namespace edgepower
