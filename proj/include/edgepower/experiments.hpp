#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgepower/config.hpp"
#include "edgepower/fleet.hpp"
#include "edgepower/montecarlo.hpp"

namespace edgepower {

/// Files a command produces, keyed by file name, plus a plain-text summary.
struct CommandOutput {
  struct File {
    std::string name;
    std::string content;
  };
  std::vector<File> files;

  const std::string* find(std::string_view name) const;
  /// Writes every file into `dir`, creating it if needed.
  void write_to(const std::filesystem::path& dir) const;
};

/// The workload the config describes: Poisson, file, or all-zero.
WorkloadTrace make_trace(const ExperimentConfig& cfg);

// -----------------------------------------------------------------------------
// steady
// -----------------------------------------------------------------------------

struct SteadyReport {
  Eigen::VectorXd pi;
  double watts = 0.0;
  double residual = 0.0;
};

SteadyReport steady_report(const ExperimentConfig& cfg);
CommandOutput cmd_steady(const ExperimentConfig& cfg);

// -----------------------------------------------------------------------------
// converge
// -----------------------------------------------------------------------------

ConvergenceReport convergence_report(const ExperimentConfig& cfg);
CommandOutput cmd_converge(const ExperimentConfig& cfg);

// -----------------------------------------------------------------------------
// compare
// -----------------------------------------------------------------------------

/// Percent change relative to the reactive baseline: (reactive - candidate) / reactive.
/// Both zero gives 0.
double relative_delta_pct(double reactive, double candidate);

inline constexpr double kTargetEnergyDeltaPct = 20.0;
inline constexpr double kTargetOverloadDeltaPct = 27.0;

struct PolicyResult {
  PolicySpec policy;
  double energy_total = 0.0;
  double mean_power = 0.0;
  double overload_fraction = 0.0;
  double late_service_fraction = 0.0;
  std::uint64_t wake_up_delays = 0;
  std::uint64_t overload_entries = 0;
  std::uint64_t unserved_task_ticks = 0;
  std::uint64_t served = 0;
  double energy_delta_pct = 0.0;
  double overload_delta_pct = 0.0;
  double late_service_delta_pct = 0.0;
  std::optional<QTable> trained_table;
};

struct ComparisonReport {
  std::size_t baseline = 0;  ///< index of the reactive policy
  std::uint64_t trace_ticks = 0;
  std::uint64_t trace_arrivals = 0;
  std::vector<PolicyResult> results;
};

/// Runs every policy on the same trace and seed. Needs at least two policies
/// (ConfigError) and one reactive baseline (MissingBaseline).
ComparisonReport compare_policies(const ExperimentConfig& cfg);
CommandOutput cmd_compare(const ExperimentConfig& cfg);

// -----------------------------------------------------------------------------
// sweep
// -----------------------------------------------------------------------------

struct SweepPoint {
  double value = 0.0;
  std::optional<Eigen::VectorXd> pi;  ///< empty when the point is infeasible
  double watts = 0.0;
  double residual = 0.0;
  std::string error;
};

/// Needs `cfg.sweep` (ConfigError otherwise).
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg);
CommandOutput cmd_sweep(const ExperimentConfig& cfg);

// -----------------------------------------------------------------------------
// fleet
// -----------------------------------------------------------------------------

/// One report per configured strategy. Needs `cfg.fleet` (ConfigError otherwise).
std::vector<FleetReport> run_fleet(const ExperimentConfig& cfg);
CommandOutput cmd_fleet(const ExperimentConfig& cfg);

}  // namespace edgepower
