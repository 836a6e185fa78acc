#pragma once

// Tick mechanics shared by simulate, run_policy, Q training and the fleet.

#include <cstdint>
#include <memory>
#include <optional>

#include "edgepower/fleet.hpp"
#include "edgepower/markov.hpp"
#include "edgepower/montecarlo.hpp"
#include "edgepower/policy.hpp"
#include "edgepower/rng.hpp"

namespace edgepower::detail {

/// Which profile states play the canonical roles, matched by label.
struct Roles {
  explicit Roles(const DeviceProfile& profile);

  bool serves(Index s) const noexcept { return s == active || s == overloaded; }
  bool asleep(Index s) const noexcept { return s == off || s == sleep; }
  bool awake(Index s) const noexcept { return s == idle || s == active || s == overloaded; }
  bool canonical() const noexcept { return is_canonical; }

  Index off = -1, sleep = -1, idle = -1, active = -1, overloaded = -1;
  bool is_canonical = false;
};

/// Accumulates the ledgers of one node, one tick at a time.
class NodeLedger {
 public:
  NodeLedger(const DeviceProfile& profile, std::uint64_t capacity, const SimulationConfig& cfg,
             Index initial_state);

  struct Service {
    std::uint64_t pending;  ///< queue + arrivals before service
    std::uint64_t backlog;  ///< still queued after service
  };

  /// Lands `arrivals` on the current tick, serves, and books the tick.
  Service arrive(std::uint64_t arrivals);
  /// Moves to `next`, booking the edge energy, and starts the next tick.
  void advance(Index next);

  Index state() const noexcept { return state_; }
  std::uint64_t tick() const noexcept { return tick_; }
  std::uint64_t backlog() const noexcept { return backlog_; }
  const Roles& roles() const noexcept { return roles_; }

  SimulationRun finish() &&;

 private:
  bool in_window() const noexcept { return tick_ >= burn_in_; }

  const DeviceProfile& profile_;
  Roles roles_;
  std::uint64_t capacity_;
  std::uint64_t burn_in_;
  Index state_;
  std::optional<Index> previous_;
  std::uint64_t tick_ = 0;
  std::uint64_t backlog_ = 0;
  SimulationRun run_;
};

struct Observation {
  std::uint64_t tick = 0;
  Index state = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t pending = 0;
  std::uint64_t backlog = 0;
  double share = 0.0;  ///< node's fraction of this tick's fleet demand
  std::optional<std::uint64_t> true_next;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual bool needs_oracle() const { return false; }
  virtual Index decide(const Observation& obs) = 0;
};

/// Start state from the config, or uniform from the node stream.
Index initial_state(const SimulationConfig& cfg, Index n, Rng& node_rng);

/// `node_rng` must outlive the controller. `node_seed` seeds the forecaster
/// and, for an untrained Q policy, the training run.
std::unique_ptr<Controller> make_controller(const PolicySpec& policy, const TransitionMatrix& m,
                                            const DeviceProfile& profile, Rng& node_rng,
                                            std::uint64_t node_seed, const CouplingRule& coupling);

}  // namespace edgepower::detail
