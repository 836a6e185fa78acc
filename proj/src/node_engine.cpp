#include "node_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgepower::detail {

Roles::Roles(const DeviceProfile& profile) {
  auto find = [&](PowerState s) { return profile.find_state(label(s)).value_or(-1); };
  off = find(PowerState::Off);
  sleep = find(PowerState::Sleep);
  idle = find(PowerState::Idle);
  active = find(PowerState::Active);
  overloaded = find(PowerState::Overloaded);
  is_canonical = profile.size() == static_cast<Index>(kCanonicalStateCount);
  for (auto s : kAllPowerStates)
    if (find(s) != index_of(s)) is_canonical = false;
}

NodeLedger::NodeLedger(const DeviceProfile& profile, std::uint64_t capacity,
                       const SimulationConfig& cfg, Index initial)
    : profile_(profile),
      roles_(profile),
      capacity_(capacity),
      burn_in_(cfg.burn_in),
      state_(initial) {
  run_.states.reserve(cfg.steps);
  run_.counts.assign(static_cast<std::size_t>(profile.size()), 0);
  run_.generator = std::string(Rng::kAlgorithm);
}

NodeLedger::Service NodeLedger::arrive(std::uint64_t arrivals) {
  run_.states.push_back(state_);
  const std::uint64_t pending = backlog_ + arrivals;
  const std::uint64_t served = roles_.serves(state_) ? std::min(pending, capacity_) : 0;
  backlog_ = pending - served;

  if (in_window()) {
    ++run_.window_ticks;
    ++run_.counts[static_cast<std::size_t>(state_)];
    run_.energy_joules += profile_.state_power()(state_) * kTickSeconds;
    run_.arrivals += arrivals;
    run_.served += served;
    run_.unserved_task_ticks += backlog_;
    if (arrivals > 0) {
      ++run_.demand_ticks;
      if (roles_.asleep(state_)) run_.events.push_back({tick_, EventKind::WakeUpDelay});
    }
    if (state_ == roles_.overloaded && previous_ && *previous_ != roles_.overloaded)
      run_.events.push_back({tick_, EventKind::OverloadEntry});
  }
  return {pending, backlog_};
}

void NodeLedger::advance(Index next) {
  if (next < 0 || next >= profile_.size()) throw UnknownState("controller chose an unknown state");
  if (in_window()) run_.energy_joules += transition_energy(profile_, state_, next);
  previous_ = state_;
  state_ = next;
  ++tick_;
}

SimulationRun NodeLedger::finish() && {
  const auto window = static_cast<double>(run_.window_ticks);
  run_.occupancy = Eigen::VectorXd::Zero(static_cast<Index>(run_.counts.size()));
  for (std::size_t i = 0; i < run_.counts.size(); ++i)
    run_.occupancy(static_cast<Index>(i)) = static_cast<double>(run_.counts[i]) / window;
  return std::move(run_);
}

Index initial_state(const SimulationConfig& cfg, Index n, Rng& node_rng) {
  if (cfg.initial_state) {
    if (*cfg.initial_state < 0 || *cfg.initial_state >= n)
      throw UnknownState("initial state " + std::to_string(*cfg.initial_state) + " out of range");
    return *cfg.initial_state;
  }
  return static_cast<Index>(node_rng.uniform_index(static_cast<std::size_t>(n)));
}

namespace {

std::uint64_t predicted_pending(std::uint64_t backlog, double forecast) {
  return backlog + static_cast<std::uint64_t>(std::llround(std::max(0.0, forecast)));
}

class FixedMatrixController final : public Controller {
 public:
  FixedMatrixController(const TransitionMatrix& m, Rng& rng, CouplingRule coupling)
      : m_(m), rng_(rng), coupling_(coupling) {}

  Index decide(const Observation& obs) override {
    if (coupling_.kind == CouplingKind::None || obs.share <= 0.0 || coupling_.sensitivity == 0.0)
      return rng_.categorical(m_.row(obs.state));
    const Eigen::RowVectorXd row = apply_coupling(m_.row(obs.state), obs.state, obs.share, coupling_);
    return rng_.categorical(row);
  }

 private:
  const TransitionMatrix& m_;
  Rng& rng_;
  CouplingRule coupling_;
};

class ReactiveController final : public Controller {
 public:
  explicit ReactiveController(ReactiveParams params) : params_(params) {}

  Index decide(const Observation& obs) override {
    idle_ticks_ = obs.pending == 0 ? idle_ticks_ + 1 : 0;
    return index_of(
        reactive_decide(power_state_at(obs.state), obs.pending, idle_ticks_, params_).next_state);
  }

 private:
  ReactiveParams params_;
  std::uint64_t idle_ticks_ = 0;
};

class PredictiveController final : public Controller {
 public:
  PredictiveController(PredictiveParams params, Forecaster forecaster)
      : params_(params), forecaster_(std::move(forecaster)) {}

  bool needs_oracle() const override { return forecaster_.kind() == ForecasterKind::OracleWithNoise; }

  Index decide(const Observation& obs) override {
    const double forecast = forecaster_.observe(obs.arrivals, obs.true_next);
    const auto predicted = predicted_pending(obs.backlog, forecast);
    return index_of(predictive_decide(power_state_at(obs.state), predicted, params_).next_state);
  }

 private:
  PredictiveParams params_;
  Forecaster forecaster_;
};

/// Greedy when `learning` is false; otherwise epsilon-greedy with updates.
class QController final : public Controller {
 public:
  QController(QTable table, Forecaster forecaster, Rng& rng, std::uint64_t capacity,
              const DeviceProfile& profile, CostParams cost, bool learning,
              std::uint64_t training_ticks)
      : table_(std::move(table)),
        forecaster_(std::move(forecaster)),
        rng_(rng),
        capacity_(capacity),
        profile_(profile),
        cost_(cost),
        learning_(learning),
        training_ticks_(training_ticks),
        initial_exploration_(table_.params().exploration) {
    if (!learning_) table_.set_exploration(0.0);
  }

  bool needs_oracle() const override { return forecaster_.kind() == ForecasterKind::OracleWithNoise; }

  Index decide(const Observation& obs) override {
    const PowerState state = power_state_at(obs.state);
    const double forecast = forecaster_.observe(obs.arrivals, obs.true_next);
    const auto level = discretize_demand(predicted_pending(obs.backlog, forecast), capacity_);
    const std::size_t key = q_key(state, level);

    if (learning_) {
      const auto legal = legal_action_indices(state);
      if (previous_)
        q_update(table_, previous_->key, previous_->action, previous_->cost, key, legal);
      table_.set_exploration(exploration_at(obs.tick));
    }
    const PowerState action = q_decide(table_, state, level, rng_).next_state;
    if (learning_)
      previous_ = Step{key, static_cast<std::size_t>(action),
                       step_cost(state, action, obs.backlog, profile_, cost_)};
    return index_of(action);
  }

  QTable&& release() && { return std::move(table_); }

 private:
  struct Step {
    std::size_t key;
    std::size_t action;
    double cost;
  };

  double exploration_at(std::uint64_t tick) const {
    const double floor = std::min(table_.params().exploration_floor, initial_exploration_);
    const double half = std::max(1.0, static_cast<double>(training_ticks_) / 2.0);
    const double progress = std::min(1.0, static_cast<double>(tick) / half);
    return initial_exploration_ - (initial_exploration_ - floor) * progress;
  }

  QTable table_;
  Forecaster forecaster_;
  Rng& rng_;
  std::uint64_t capacity_;
  const DeviceProfile& profile_;
  CostParams cost_;
  bool learning_;
  std::uint64_t training_ticks_;
  double initial_exploration_;
  std::optional<Step> previous_;
};

void require_canonical(const DeviceProfile& profile, std::string_view policy) {
  if (!Roles(profile).canonical())
    throw DimensionMismatch(std::string(policy) +
                            " policy needs the five canonical states (Off..Overloaded) in order");
}

QTable train_for_node(const QLearningPolicy& policy, std::uint64_t capacity,
                      const DeviceProfile& profile, std::uint64_t node_seed) {
  const auto training = generate_poisson(policy.training_lambda, policy.training_ticks,
                                         derive_seed(node_seed, streams::kTraining));
  return train_q_table(policy, capacity, profile, training, node_seed);
}

}  // namespace

std::unique_ptr<Controller> make_controller(const PolicySpec& policy, const TransitionMatrix& m,
                                            const DeviceProfile& profile, Rng& node_rng,
                                            std::uint64_t node_seed, const CouplingRule& coupling) {
  if (policy.capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  return std::visit(
      [&](const auto& kind) -> std::unique_ptr<Controller> {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, FixedMatrixPolicy>) {
          return std::make_unique<FixedMatrixController>(m, node_rng, coupling);
        } else if constexpr (std::is_same_v<K, ReactivePolicy>) {
          require_canonical(profile, "reactive");
          return std::make_unique<ReactiveController>(
              ReactiveParams{policy.capacity, kind.step_down_patience});
        } else if constexpr (std::is_same_v<K, PredictivePolicy>) {
          require_canonical(profile, "predictive");
          return std::make_unique<PredictiveController>(
              PredictiveParams{policy.capacity}, Forecaster::from_spec(kind.forecaster, node_seed));
        } else {
          require_canonical(profile, "q-learning");
          QTable table = kind.table ? *kind.table : train_for_node(kind, policy.capacity, profile, node_seed);
          return std::make_unique<QController>(std::move(table),
                                               Forecaster::from_spec(kind.forecaster, node_seed),
                                               node_rng, policy.capacity, profile, kind.cost,
                                               false, 0);
        }
      },
      policy.kind);
}

}  // namespace edgepower::detail

namespace edgepower {

QTable train_q_table(const QLearningPolicy& policy, std::uint64_t capacity,
                     const DeviceProfile& profile, const WorkloadTrace& training,
                     std::uint64_t seed) {
  policy.q.validate();
  policy.cost.validate();
  if (capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  detail::require_canonical(profile, "q-learning");

  Rng rng(seed, streams::kTraining);
  SimulationConfig cfg;
  cfg.steps = std::max<std::uint64_t>(training.size(), 1);
  cfg.seed = seed;
  cfg.initial_state = index_of(PowerState::Active);

  detail::QController controller(make_power_qtable(policy.q),
                                 Forecaster::from_spec(policy.forecaster, derive_seed(seed, streams::kTraining)),
                                 rng, capacity, profile, policy.cost, true, training.size());
  detail::NodeLedger ledger(profile, capacity, cfg, *cfg.initial_state);
  for (std::uint64_t t = 0; t < training.size(); ++t) {
    const auto service = ledger.arrive(training.at(t));
    if (t + 1 == training.size()) break;
    detail::Observation obs{t, ledger.state(), training.at(t), service.pending, service.backlog, 1.0,
                            training.at(t + 1)};
    ledger.advance(controller.decide(obs));
  }
  QTable table = std::move(controller).release();
  table.set_exploration(policy.q.exploration);
  return table;
}

}  // namespace edgepower

namespace edgepower {

QTable train_q_policy(const PolicySpec& policy, const DeviceProfile& profile, std::uint64_t run_seed) {
  const auto* q = std::get_if<QLearningPolicy>(&policy.kind);
  if (!q) throw std::invalid_argument("policy '" + policy.name + "' is not a Q-learning policy");
  if (q->table) return *q->table;
  return detail::train_for_node(*q, policy.capacity, profile, derive_seed(run_seed, 0));
}

}  // namespace edgepower
