#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgepower/fleet.hpp"
#include "edgepower/markov.hpp"
#include "edgepower/montecarlo.hpp"
#include "edgepower/policy.hpp"
#include "edgepower/workload.hpp"

namespace edgepower {

struct WorkloadSource {
  enum class Kind { Poisson, File, Zero };
  Kind kind = Kind::Poisson;
  double lambda = 0.5;
  std::uint64_t ticks = 0;            ///< 0 means simulation.steps
  std::optional<std::uint64_t> seed;  ///< defaults to the experiment seed
  std::filesystem::path path;
};

struct SweepSpec {
  Index row = 0;
  Index column = 0;
  std::vector<double> values;
};

struct ConvergenceSettings {
  std::vector<std::uint64_t> checkpoints{1000, 10000, 100000};
  std::size_t replicas = kDefaultReplicas;
};

struct FleetConfig {
  std::vector<NodeSpec> nodes;
  CouplingRule coupling;
  std::vector<ScheduleStrategy> strategies{ScheduleStrategy::GreedyEfficiency, ScheduleStrategy::Random};
};

/// Everything one CLI invocation needs. Defaults reproduce the reference
/// five-state model with the default profile.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  TransitionMatrix matrix = reference_matrix();
  DeviceProfile profile = default_profile();
  WorkloadSource workload;
  std::vector<PolicySpec> policies;
  SimulationConfig simulation;
  ConvergenceSettings convergence;
  std::optional<SweepSpec> sweep;
  std::optional<FleetConfig> fleet;

  /// Sets both the experiment seed and the simulation seed.
  void override_seed(std::uint64_t s);
};

/// Relative file paths inside the document resolve against `base_dir`.
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json policy_to_json(const PolicySpec& policy);
PolicySpec policy_from_json(const nlohmann::json& doc);

}  // namespace edgepower
