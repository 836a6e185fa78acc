#include "edgepower/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "node_engine.hpp"

namespace edgepower {

Eigen::RowVectorXd apply_coupling(const Eigen::RowVectorXd& base_row, Index from, double node_share,
                                  const CouplingRule& rule) {
  if (!(node_share >= 0.0 && node_share <= 1.0)) throw std::invalid_argument("node_share must lie in [0, 1]");
  if (!(rule.sensitivity >= 0.0)) throw std::invalid_argument("coupling sensitivity must be >= 0");
  if (from < 0 || from >= base_row.size()) throw UnknownState("coupling: state out of range");
  if (rule.kind == CouplingKind::None) return base_row;

  const double boost = 1.0 + rule.sensitivity * node_share;
  Eigen::RowVectorXd row = base_row;
  row.tail(row.size() - from - 1) *= boost;
  row.head(from) /= boost;
  return row / row.sum();
}

void NodeSpec::validate() const {
  if (matrix.size() != profile.size())
    throw DimensionMismatch("node '" + name + "': matrix and profile sizes differ");
  if (capacity < 1) throw std::invalid_argument("node '" + name + "': capacity must be >= 1");
}

double joules_per_task(const NodeSpec& node) {
  const auto active = node.profile.find_state(label(PowerState::Active));
  const double watts = active ? node.profile.state_power()(*active) : node.profile.state_power().maxCoeff();
  return watts * kTickSeconds / static_cast<double>(node.capacity);
}

std::string_view to_string(ScheduleStrategy s) noexcept {
  return s == ScheduleStrategy::Random ? "random" : "greedy";
}

namespace {

std::vector<std::size_t> greedy_order(const FleetState& fleet, std::span<const NodeSpec> specs) {
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> awake(specs.size());
  std::vector<double> cost(specs.size());
  for (std::size_t m = 0; m < specs.size(); ++m) {
    awake[m] = detail::Roles(specs[m].profile).awake(fleet.node_states[m]);
    cost[m] = joules_per_task(specs[m]);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (awake[a] != awake[b]) return static_cast<bool>(awake[a]);
    if (cost[a] != cost[b]) return cost[a] < cost[b];
    return a < b;
  });
  return order;
}

/// Scheduler assignment plus overflow queued onto nodes: what each node receives.
std::vector<std::uint64_t> plan_arrivals(std::uint64_t demand, const FleetState& fleet,
                                         std::span<const NodeSpec> specs, ScheduleStrategy strategy,
                                         Rng& rng, Assignment* out = nullptr) {
  Assignment assignment = schedule(demand, fleet, specs, strategy, rng);
  std::vector<std::uint64_t> arrivals = assignment.tasks;
  if (assignment.unserved > 0) {
    if (strategy == ScheduleStrategy::GreedyEfficiency) {
      arrivals[greedy_order(fleet, specs).front()] += assignment.unserved;
    } else {
      for (std::uint64_t k = 0; k < assignment.unserved; ++k) ++arrivals[rng.uniform_index(specs.size())];
    }
  }
  if (out) *out = std::move(assignment);
  return arrivals;
}

}  // namespace

Assignment schedule(std::uint64_t demand, const FleetState& fleet, std::span<const NodeSpec> specs,
                    ScheduleStrategy strategy, Rng& rng) {
  if (specs.empty()) throw std::invalid_argument("fleet needs at least one node");
  if (fleet.node_states.size() != specs.size())
    throw DimensionMismatch("fleet state and node specs differ in length");

  Assignment out;
  out.tasks.assign(specs.size(), 0);
  if (strategy == ScheduleStrategy::GreedyEfficiency) {
    std::uint64_t remaining = demand;
    for (auto m : greedy_order(fleet, specs)) {
      const std::uint64_t take = std::min(remaining, specs[m].capacity);
      out.tasks[m] = take;
      remaining -= take;
    }
    out.unserved = remaining;
    return out;
  }

  std::vector<std::size_t> open;
  for (std::size_t m = 0; m < specs.size(); ++m)
    if (specs[m].capacity > 0) open.push_back(m);
  for (std::uint64_t k = 0; k < demand; ++k) {
    if (open.empty()) {
      out.unserved = demand - k;
      break;
    }
    const std::size_t pick = rng.uniform_index(open.size());
    const std::size_t m = open[pick];
    if (++out.tasks[m] == specs[m].capacity) open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

double coefficient_of_variation(const Eigen::VectorXd& values) {
  if (values.size() == 0) return 0.0;
  const double mean = values.mean();
  if (mean == 0.0) return 0.0;
  const double variance = (values.array() - mean).square().mean();
  return std::sqrt(variance) / std::abs(mean);
}

FleetReport simulate_fleet(std::span<const NodeSpec> specs, const WorkloadTrace& trace,
                           const CouplingRule& coupling, ScheduleStrategy strategy,
                           const SimulationConfig& cfg) {
  cfg.validate();
  if (specs.empty()) throw std::invalid_argument("fleet needs at least one node");
  for (const auto& node : specs) node.validate();
  if (!(coupling.sensitivity >= 0.0)) throw std::invalid_argument("coupling sensitivity must be >= 0");

  const std::size_t count = specs.size();
  std::vector<PolicySpec> policies;
  std::vector<std::unique_ptr<Rng>> rngs;
  std::vector<std::unique_ptr<detail::Controller>> controllers;
  std::vector<detail::NodeLedger> ledgers;
  FleetState fleet;
  ledgers.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    policies.push_back(specs[m].policy);
    policies.back().capacity = specs[m].capacity;
    rngs.push_back(std::make_unique<Rng>(cfg.seed, m));
    const Index start = detail::initial_state(cfg, specs[m].profile.size(), *rngs[m]);
    controllers.push_back(detail::make_controller(policies[m], specs[m].matrix, specs[m].profile,
                                                  *rngs[m], derive_seed(cfg.seed, m), coupling));
    ledgers.emplace_back(specs[m].profile, specs[m].capacity, cfg, start);
    fleet.node_states.push_back(start);
  }
  const bool any_oracle = std::any_of(controllers.begin(), controllers.end(),
                                      [](const auto& c) { return c->needs_oracle(); });

  Rng scheduler_rng(cfg.seed, streams::kScheduler);
  FleetReport report;
  report.strategy = strategy;
  std::vector<detail::Observation> obs(count);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    fleet.tick = t;
    const std::uint64_t demand = trace.at(t);
    Assignment assignment;
    const auto arrivals = plan_arrivals(demand, fleet, specs, strategy, scheduler_rng, &assignment);
    if (t >= cfg.burn_in) report.unserved_total += assignment.unserved;

    for (std::size_t m = 0; m < count; ++m) {
      const auto service = ledgers[m].arrive(arrivals[m]);
      obs[m] = {t, ledgers[m].state(), arrivals[m], service.pending, service.backlog,
                demand > 0 ? static_cast<double>(arrivals[m]) / static_cast<double>(demand) : 0.0,
                std::nullopt};
    }
    if (t + 1 == cfg.steps) break;

    if (any_oracle) {
      Rng preview = scheduler_rng;
      const auto next = plan_arrivals(trace.at(t + 1), fleet, specs, strategy, preview);
      for (std::size_t m = 0; m < count; ++m) obs[m].true_next = next[m];
    }
    for (std::size_t m = 0; m < count; ++m) {
      const Index next = controllers[m]->decide(obs[m]);
      ledgers[m].advance(next);
      fleet.node_states[m] = next;
    }
  }

  report.ticks = cfg.steps - cfg.burn_in;
  report.per_node_energy.resize(static_cast<Index>(count));
  report.per_node_mean_power.resize(static_cast<Index>(count));
  for (std::size_t m = 0; m < count; ++m) {
    SimulationRun run = std::move(ledgers[m]).finish();
    report.node_names.push_back(specs[m].name);
    report.per_node_energy(static_cast<Index>(m)) = run.energy_joules;
    report.per_node_mean_power(static_cast<Index>(m)) = run.mean_power();
    report.per_node_occupancy.push_back(run.occupancy);
    report.unserved_task_ticks += run.unserved_task_ticks;
    report.node_runs.push_back(std::move(run));
  }
  report.disparity_cv = coefficient_of_variation(report.per_node_energy);
  return report;
}

std::vector<double> fleet_expected_energy(std::span<const NodeSpec> specs) {
  std::vector<double> out;
  out.reserve(specs.size());
  for (const auto& node : specs) out.push_back(expected_power(steady_state(node.matrix), node.profile));
  return out;
}

std::vector<NodeSpec> demo_fleet(const PolicySpec& policy) {
  const DeviceProfile base = default_profile();
  const std::array<double, 3> scales = {1.0, 1.5, 2.0};
  const std::array<std::uint64_t, 3> capacities = {1, 2, 3};
  std::vector<NodeSpec> nodes;
  for (std::size_t m = 0; m < scales.size(); ++m) {
    const std::string name = "node" + std::to_string(m);
    PolicySpec node_policy = policy;
    node_policy.capacity = capacities[m];
    nodes.push_back({name, base.scaled(scales[m], name), reference_matrix(), capacities[m], node_policy});
  }
  return nodes;
}

}  // namespace edgepower
