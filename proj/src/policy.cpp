#include "edgepower/policy.hpp"

#include <algorithm>
#include <array>
#include <ostream>
#include <stdexcept>

#include "edgepower/fleet.hpp"
#include "node_engine.hpp"

namespace edgepower {

namespace {

using enum PowerState;

constexpr std::array<PowerState, 2> kFromOff = {Off, Sleep};
constexpr std::array<PowerState, 3> kFromSleep = {Off, Sleep, Idle};
constexpr std::array<PowerState, 4> kFromIdle = {Sleep, Idle, Active, Overloaded};
constexpr std::array<PowerState, 3> kFromActive = {Idle, Active, Overloaded};
constexpr std::array<PowerState, 2> kFromOverloaded = {Active, Overloaded};

PowerState up(PowerState s) { return static_cast<PowerState>(static_cast<int>(s) + 1); }
PowerState down(PowerState s) { return static_cast<PowerState>(static_cast<int>(s) - 1); }

}  // namespace

std::string_view to_string(DecisionReason reason) noexcept {
  switch (reason) {
    case DecisionReason::Sampled: return "sampled";
    case DecisionReason::StepUp: return "step-up";
    case DecisionReason::StepDown: return "step-down";
    case DecisionReason::Hold: return "hold";
    case DecisionReason::Prewake: return "prewake";
    case DecisionReason::Learned: return "learned";
  }
  return "?";
}

std::span<const PowerState> legal_actions(PowerState s) noexcept {
  switch (s) {
    case Off: return kFromOff;
    case Sleep: return kFromSleep;
    case Idle: return kFromIdle;
    case Active: return kFromActive;
    case Overloaded: return kFromOverloaded;
  }
  return {};
}

bool is_legal(PowerState from, PowerState to) noexcept {
  const auto actions = legal_actions(from);
  return std::find(actions.begin(), actions.end(), to) != actions.end();
}

PolicyDecision reactive_decide(PowerState current, std::uint64_t observed_demand,
                               std::uint64_t idle_ticks, const ReactiveParams& params) {
  const bool late = observed_demand > 0 && (current == Off || current == Sleep);
  if (current == Overloaded) {
    if (observed_demand > params.capacity) return {Overloaded, DecisionReason::Hold};
    return {Active, DecisionReason::StepDown};
  }
  if (current == Active && observed_demand > params.capacity)
    return {Overloaded, DecisionReason::StepUp};
  if (observed_demand > 0 && current < Active) return {up(current), DecisionReason::StepUp, late};
  if (observed_demand == 0 && idle_ticks >= params.step_down_patience && current > Off)
    return {down(current), DecisionReason::StepDown};
  return {current, DecisionReason::Hold};
}

PolicyDecision predictive_decide(PowerState current, std::uint64_t predicted_demand,
                                 const PredictiveParams& params) {
  const bool overload_ahead = predicted_demand > params.capacity;
  if (current == Overloaded) return {Active, DecisionReason::StepDown, false, overload_ahead};
  if (predicted_demand > 0 && current < Active)
    return {up(current), DecisionReason::Prewake, false, overload_ahead};
  if (predicted_demand == 0 && current > Sleep) return {down(current), DecisionReason::StepDown};
  return {current, DecisionReason::Hold, false, overload_ahead};
}

void CostParams::validate() const {
  if (!(energy_weight >= 0.0 && switch_weight >= 0.0 && delay_penalty >= 0.0))
    throw std::invalid_argument("cost weights must be >= 0");
}

double step_cost(PowerState state, PowerState action, std::uint64_t unserved,
                 const DeviceProfile& profile, const CostParams& params) {
  if (!is_legal(state, action))
    throw IllegalAction(std::string(label(state)) + " -> " + std::string(label(action)) +
                        " is not a legal transition");
  if (profile.size() != static_cast<Index>(kCanonicalStateCount))
    throw DimensionMismatch("step_cost needs a five-state profile");
  return params.energy_weight * profile.state_power()(index_of(state)) * kTickSeconds +
         params.switch_weight * transition_energy(profile, state, action) +
         params.delay_penalty * static_cast<double>(unserved);
}

std::string_view to_string(DemandLevel level) noexcept {
  switch (level) {
    case DemandLevel::None: return "none";
    case DemandLevel::Serviceable: return "serviceable";
    case DemandLevel::Excess: return "excess";
  }
  return "?";
}

DemandLevel discretize_demand(std::uint64_t demand, std::uint64_t capacity) noexcept {
  if (demand == 0) return DemandLevel::None;
  return demand <= capacity ? DemandLevel::Serviceable : DemandLevel::Excess;
}

void QParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw std::invalid_argument("learning_rate must lie in (0, 1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  if (!(exploration >= 0.0 && exploration <= 1.0))
    throw std::invalid_argument("exploration must lie in [0, 1]");
  if (!(exploration_floor >= 0.0 && exploration_floor <= 1.0))
    throw std::invalid_argument("exploration_floor must lie in [0, 1]");
}

QTable::QTable(std::size_t keys, std::size_t actions, QParams params)
    : keys_(keys), actions_(actions), params_(params), values_(keys * actions, 0.0) {
  params_.validate();
  if (keys == 0 || actions == 0) throw std::invalid_argument("Q table needs keys and actions");
}

void QTable::set_exploration(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("exploration must lie in [0, 1]");
  params_.exploration = epsilon;
}

double QTable::value(std::size_t key, std::size_t action) const {
  return values_.at(key * actions_ + action);
}

void QTable::set_value(std::size_t key, std::size_t action, double v) {
  values_.at(key * actions_ + action) = v;
}

double QTable::min_value(std::size_t key, std::span<const std::size_t> legal) const {
  return value(key, argmin(key, legal));
}

std::size_t QTable::argmin(std::size_t key, std::span<const std::size_t> legal) const {
  if (legal.empty()) throw std::invalid_argument("no legal actions");
  std::size_t best = legal.front();
  for (auto a : legal) {
    const double v = value(key, a);
    const double b = value(key, best);
    if (v < b || (v == b && a < best)) best = a;
  }
  return best;
}

void q_update(QTable& table, std::size_t key, std::size_t action, double cost,
              std::size_t next_key, std::span<const std::size_t> next_legal) {
  const auto& p = table.params();
  const double target = cost + p.discount * table.min_value(next_key, next_legal);
  table.set_value(key, action,
                  (1.0 - p.learning_rate) * table.value(key, action) + p.learning_rate * target);
}

std::size_t q_decide(const QTable& table, std::size_t key, std::span<const std::size_t> legal,
                     Rng& rng) {
  if (legal.empty()) throw std::invalid_argument("no legal actions");
  const double epsilon = table.params().exploration;
  if (epsilon > 0.0 && rng.uniform() < epsilon) return legal[rng.uniform_index(legal.size())];
  return table.argmin(key, legal);
}

QTable make_power_qtable(const QParams& params) {
  return QTable(kCanonicalStateCount * kDemandLevelCount, kCanonicalStateCount, params);
}

std::size_t q_key(PowerState state, DemandLevel level) noexcept {
  return static_cast<std::size_t>(state) * kDemandLevelCount + static_cast<std::size_t>(level);
}

std::vector<std::size_t> legal_action_indices(PowerState state) {
  std::vector<std::size_t> out;
  for (auto a : legal_actions(state)) out.push_back(static_cast<std::size_t>(a));
  return out;
}

PolicyDecision q_decide(const QTable& table, PowerState state, DemandLevel level, Rng& rng) {
  const auto legal = legal_action_indices(state);
  const auto action = q_decide(table, q_key(state, level), legal, rng);
  return {static_cast<PowerState>(action), DecisionReason::Learned};
}


std::string_view kind_name(const PolicyKind& kind) noexcept {
  struct Visitor {
    std::string_view operator()(const FixedMatrixPolicy&) const { return "fixed_matrix"; }
    std::string_view operator()(const ReactivePolicy&) const { return "reactive"; }
    std::string_view operator()(const PredictivePolicy&) const { return "predictive"; }
    std::string_view operator()(const QLearningPolicy&) const { return "q_learning"; }
  };
  return std::visit(Visitor{}, kind);
}

SimulationRun run_policy(const PolicySpec& policy, const TransitionMatrix& m,
                         const DeviceProfile& profile, const WorkloadTrace& trace,
                         const SimulationConfig& cfg) {
  cfg.validate();
  if (m.size() != profile.size())
    throw DimensionMismatch("matrix has " + std::to_string(m.size()) + " states, profile has " +
                            std::to_string(profile.size()));
  Rng node_rng(cfg.seed, 0);
  const Index start = detail::initial_state(cfg, m.size(), node_rng);
  auto controller = detail::make_controller(policy, m, profile, node_rng, derive_seed(cfg.seed, 0),
                                            CouplingRule{});
  detail::NodeLedger ledger(profile, policy.capacity, cfg, start);
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const auto arrivals = trace.at(t);
    const auto service = ledger.arrive(arrivals);
    if (t + 1 == cfg.steps) break;
    detail::Observation obs{t, ledger.state(), arrivals, service.pending, service.backlog,
                            arrivals > 0 ? 1.0 : 0.0, std::nullopt};
    if (controller->needs_oracle()) obs.true_next = trace.at(t + 1);
    ledger.advance(controller->decide(obs));
  }
  return std::move(ledger).finish();
}

}  // namespace edgepower
