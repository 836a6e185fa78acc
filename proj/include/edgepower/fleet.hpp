#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "edgepower/markov.hpp"
#include "edgepower/montecarlo.hpp"
#include "edgepower/policy.hpp"
#include "edgepower/rng.hpp"
#include "edgepower/workload.hpp"

namespace edgepower {

enum class CouplingKind { None, LoadShare };

/// How a node's share of fleet demand bends its transition row.
struct CouplingRule {
  CouplingKind kind = CouplingKind::None;
  double sensitivity = 0.0;
};

/// Load-share coupling multiplies entries above `from` by (1 + s * share),
/// entries below it by 1 / (1 + s * share), and renormalizes the row.
Eigen::RowVectorXd apply_coupling(const Eigen::RowVectorXd& base_row, Index from, double node_share,
                                  const CouplingRule& rule);

struct NodeSpec {
  std::string name;
  DeviceProfile profile;
  TransitionMatrix matrix;
  std::uint64_t capacity = kDefaultCapacity;
  PolicySpec policy;

  void validate() const;
};

/// state_power[Active] / capacity for the node's profile.
double joules_per_task(const NodeSpec& node);

struct FleetState {
  std::vector<Index> node_states;
  std::uint64_t tick = 0;
};

enum class ScheduleStrategy { Random, GreedyEfficiency };
std::string_view to_string(ScheduleStrategy s) noexcept;

struct Assignment {
  std::vector<std::uint64_t> tasks;  ///< per node, each <= that node's capacity
  std::uint64_t unserved = 0;        ///< demand beyond the fleet's free capacity
};

/// Places one tick of demand on the fleet. Greedy fills awake nodes before
/// sleeping ones, each group in ascending joules-per-task then node index.
/// Random sends each task to a uniformly chosen node with spare capacity.
Assignment schedule(std::uint64_t demand, const FleetState& fleet, std::span<const NodeSpec> specs,
                    ScheduleStrategy strategy, Rng& rng);

struct FleetReport {
  ScheduleStrategy strategy = ScheduleStrategy::GreedyEfficiency;
  std::vector<std::string> node_names;
  Eigen::VectorXd per_node_energy;        ///< joules
  Eigen::VectorXd per_node_mean_power;    ///< watts
  std::vector<Eigen::VectorXd> per_node_occupancy;
  double disparity_cv = 0.0;
  std::uint64_t unserved_total = 0;       ///< tasks the scheduler could not place
  std::uint64_t unserved_task_ticks = 0;  ///< queued task-ticks across nodes
  std::uint64_t ticks = 0;
  std::vector<SimulationRun> node_runs;

  double total_energy() const { return per_node_energy.sum(); }
};

/// Population standard deviation over mean; 0 for a zero-mean vector.
double coefficient_of_variation(const Eigen::VectorXd& values);

/// Multi-node run. Per tick the scheduler places demand; overflow it cannot
/// place is queued on the first node in greedy order (a uniform node under
/// random). Node m draws from stream m of the seed, the scheduler from its
/// own stream, so a one-node fleet replays run_policy exactly.
FleetReport simulate_fleet(std::span<const NodeSpec> specs, const WorkloadTrace& trace,
                           const CouplingRule& coupling, ScheduleStrategy strategy,
                           const SimulationConfig& cfg);

/// Analytical mean power of each node from its own steady state.
std::vector<double> fleet_expected_energy(std::span<const NodeSpec> specs);

/// Three reference-matrix nodes with power ladders x1, x1.5, x2 and
/// capacities 1, 2, 3, all running `policy`.
std::vector<NodeSpec> demo_fleet(const PolicySpec& policy);

}  // namespace edgepower
