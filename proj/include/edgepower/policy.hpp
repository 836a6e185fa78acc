#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgepower/markov.hpp"
#include "edgepower/montecarlo.hpp"
#include "edgepower/rng.hpp"
#include "edgepower/workload.hpp"

namespace edgepower {

// -----------------------------------------------------------------------------
// Decisions and the action graph
// -----------------------------------------------------------------------------

enum class DecisionReason { Sampled, StepUp, StepDown, Hold, Prewake, Learned };
std::string_view to_string(DecisionReason reason) noexcept;

struct PolicyDecision {
  PowerState next_state;
  DecisionReason reason;
  bool wake_up_delay = false;         ///< demand met the node in Off or Sleep
  bool anticipated_overload = false;  ///< forecast exceeds capacity

  friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

/// Next states reachable from `s` in one tick, ascending: hold, one rung up or
/// down, plus the Idle -> Overloaded jump that the reference matrix allows.
std::span<const PowerState> legal_actions(PowerState s) noexcept;
bool is_legal(PowerState from, PowerState to) noexcept;

inline constexpr std::uint64_t kDefaultCapacity = 2;

// -----------------------------------------------------------------------------
// Rule-based policies
// -----------------------------------------------------------------------------

struct ReactiveParams {
  std::uint64_t capacity = kDefaultCapacity;
  std::uint64_t step_down_patience = 3;
};

/// Climbs one rung per tick while work is present, jumps Active -> Overloaded
/// when demand exceeds capacity, and descends one rung once `idle_ticks`
/// consecutive empty ticks reach the patience.
PolicyDecision reactive_decide(PowerState current, std::uint64_t observed_demand,
                               std::uint64_t idle_ticks, const ReactiveParams& params);

struct PredictiveParams {
  std::uint64_t capacity = kDefaultCapacity;
};

/// Same ladder as the reactive rule, driven by the next-tick forecast. Never
/// descends below Sleep and never elects Overloaded.
PolicyDecision predictive_decide(PowerState current, std::uint64_t predicted_demand,
                                 const PredictiveParams& params);

// -----------------------------------------------------------------------------
// Cost model and tabular Q-learning
// -----------------------------------------------------------------------------

struct CostParams {
  double energy_weight = 1.0;   ///< per joule of state energy
  double switch_weight = 1.0;   ///< per joule of transition energy
  double delay_penalty = 10.0;  ///< per queued task per tick

  void validate() const;
};

/// energy_weight * P[state] * tick + switch_weight * E[state][action] + delay_penalty * unserved.
/// Throws IllegalAction when `action` is not reachable from `state`.
double step_cost(PowerState state, PowerState action, std::uint64_t unserved,
                 const DeviceProfile& profile, const CostParams& params);

enum class DemandLevel : std::uint8_t { None = 0, Serviceable = 1, Excess = 2 };
inline constexpr std::size_t kDemandLevelCount = 3;
std::string_view to_string(DemandLevel level) noexcept;

/// {0}, {1..capacity}, {> capacity}.
DemandLevel discretize_demand(std::uint64_t demand, std::uint64_t capacity) noexcept;

struct QParams {
  double learning_rate = 0.1;
  double discount = 0.95;
  double exploration = 0.1;
  /// Exploration decays linearly to this over the first half of training.
  double exploration_floor = 0.01;

  void validate() const;
};

/// Dense action-value table over integer keys and actions; entries start at 0.
class QTable {
 public:
  QTable(std::size_t keys, std::size_t actions, QParams params);

  std::size_t key_count() const noexcept { return keys_; }
  std::size_t action_count() const noexcept { return actions_; }
  const QParams& params() const noexcept { return params_; }
  void set_exploration(double epsilon);

  double value(std::size_t key, std::size_t action) const;
  void set_value(std::size_t key, std::size_t action, double v);

  double min_value(std::size_t key, std::span<const std::size_t> legal) const;
  /// Lowest-valued legal action; ties go to the lowest action index.
  std::size_t argmin(std::size_t key, std::span<const std::size_t> legal) const;

 private:
  std::size_t keys_;
  std::size_t actions_;
  QParams params_;
  std::vector<double> values_;
};

/// Q(s,a) <- (1 - a_q) Q(s,a) + a_q (cost + gamma min_a' Q(s',a')).
void q_update(QTable& table, std::size_t key, std::size_t action, double cost,
              std::size_t next_key, std::span<const std::size_t> next_legal);

/// Epsilon-greedy choice: with probability epsilon a uniform legal action,
/// otherwise the table argmin.
std::size_t q_decide(const QTable& table, std::size_t key, std::span<const std::size_t> legal,
                     Rng& rng);

/// Table keyed by (power state, demand level) with one column per power state.
QTable make_power_qtable(const QParams& params);
std::size_t q_key(PowerState state, DemandLevel level) noexcept;
std::vector<std::size_t> legal_action_indices(PowerState state);
PolicyDecision q_decide(const QTable& table, PowerState state, DemandLevel level, Rng& rng);

/// CSV rows (state, demand_level, action, value) for every legal pair.
void write_qtable_csv(std::ostream& out, const QTable& table);

// -----------------------------------------------------------------------------
// Policy descriptions and single-node runs
// -----------------------------------------------------------------------------

/// Samples each next state from the governing matrix row.
struct FixedMatrixPolicy {};

struct ReactivePolicy {
  std::uint64_t step_down_patience = 3;
};

struct PredictivePolicy {
  ForecasterSpec forecaster;
};

struct QLearningPolicy {
  QParams q;
  CostParams cost;
  ForecasterSpec forecaster;
  std::uint64_t training_ticks = 500000;
  double training_lambda = 0.5;
  /// Pre-trained table; when empty, run_policy trains one first on a
  /// Poisson(training_lambda) trace drawn from a held-out seed stream.
  std::shared_ptr<const QTable> table;
};

using PolicyKind = std::variant<FixedMatrixPolicy, ReactivePolicy, PredictivePolicy, QLearningPolicy>;

struct PolicySpec {
  std::string name;
  PolicyKind kind;
  std::uint64_t capacity = kDefaultCapacity;  ///< tasks served per tick in Active/Overloaded
};

std::string_view kind_name(const PolicyKind& kind) noexcept;

/// Drives one node through `cfg.steps` ticks of `trace` under `policy`.
///
/// Each tick: arrivals join the node's queue, Active and Overloaded serve up
/// to capacity, the tick's energy is booked, then the policy picks the next
/// state. The fixed-matrix policy reproduces `simulate` for the same seed.
SimulationRun run_policy(const PolicySpec& policy, const TransitionMatrix& m,
                         const DeviceProfile& profile, const WorkloadTrace& trace,
                         const SimulationConfig& cfg);

/// Trains a Q table on `training` with epsilon decaying linearly over the
/// first half of the trace.
QTable train_q_table(const QLearningPolicy& policy, std::uint64_t capacity,
                     const DeviceProfile& profile, const WorkloadTrace& training,
                     std::uint64_t seed);

/// The table run_policy would train for a Q policy without one, given the
/// run's seed. Throws std::invalid_argument for other policy kinds.
QTable train_q_policy(const PolicySpec& policy, const DeviceProfile& profile, std::uint64_t run_seed);

}  // namespace edgepower
