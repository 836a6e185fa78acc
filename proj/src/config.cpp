#include "edgepower/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace edgepower {

namespace {

using nlohmann::json;

/// A JSON value together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const json& value() const noexcept { return value_; }
  const std::string& path() const noexcept { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
  }

  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  Node at(const std::string& key) const {
    if (!has(key)) fail("missing key '" + key + "'");
    return child(key);
  }

  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::optional<Node> find(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  void require_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail("unknown key '" + key + "'");
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0))
      fail("expected a nonnegative integer");
    return value_.get<std::uint64_t>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out(array_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  Eigen::VectorXd vector() const {
    const auto v = numbers();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }

  Eigen::MatrixXd matrix() const {
    const std::size_t rows = array_size();
    if (rows == 0) fail("matrix must have at least one row");
    Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(at(0).array_size()));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = at(r).numbers();
      if (static_cast<Index>(row.size()) != m.cols())
        at(r).fail("row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(m.cols()));
      for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
    }
    return m;
  }

 private:
  Node child(const std::string& key) const {
    return Node(value_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  const json& value_;
  std::string path_;
};

template <typename F>
auto guarded(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    node.fail(e.what());
  }
}

TransitionMatrix parse_matrix(const Node& node) {
  if (node.value().is_string()) {
    if (node.string() == "reference") return reference_matrix();
    node.fail("unknown matrix name '" + node.string() + "'");
  }
  return guarded(node, [&] { return TransitionMatrix(node.matrix()); });
}

DeviceProfile parse_profile(const Node& node) {
  if (node.value().is_string()) {
    const auto name = node.string();
    if (name == "default") return default_profile();
    if (name == "raspberry_pi4") return raspberry_pi4_profile();
    node.fail("unknown profile name '" + name + "'");
  }
  node.require_object({"name", "labels", "state_power", "edge_latency", "edge_energy", "transition_power"});
  const std::string name = node.find("name") ? node.at("name").string() : "custom";
  const Eigen::VectorXd power = node.at("state_power").vector();
  const Index n = power.size();
  std::vector<std::string> labels;
  if (auto l = node.find("labels")) {
    for (std::size_t i = 0; i < l->array_size(); ++i) labels.push_back(l->at(i).string());
  } else {
    if (n == static_cast<Index>(kCanonicalStateCount)) {
      for (auto s : kAllPowerStates) labels.emplace_back(label(s));
    } else {
      for (Index i = 0; i < n; ++i) labels.push_back("S" + std::to_string(i));
    }
  }
  const Eigen::MatrixXd latency = node.find("edge_latency") ? node.at("edge_latency").matrix()
                                                            : Eigen::MatrixXd::Zero(n, n);
  if (node.has("transition_power")) {
    if (node.has("edge_energy")) node.fail("give either edge_energy or transition_power, not both");
    const Eigen::MatrixXd tp = node.at("transition_power").matrix();
    return guarded(node, [&] { return DeviceProfile::from_power_latency(name, labels, power, tp, latency); });
  }
  const Eigen::MatrixXd energy = node.find("edge_energy") ? node.at("edge_energy").matrix()
                                                          : Eigen::MatrixXd::Zero(n, n);
  return guarded(node, [&] { return DeviceProfile(name, labels, power, latency, energy); });
}

ForecasterSpec parse_forecaster(const Node& node) {
  node.require_object({"kind", "alpha", "noise_sd"});
  ForecasterSpec spec;
  const auto kind = node.at("kind").string();
  if (kind == "oracle") {
    spec.kind = ForecasterKind::OracleWithNoise;
  } else if (kind == "smoothing") {
    spec.kind = ForecasterKind::ExponentialSmoothing;
  } else {
    node.at("kind").fail("unknown forecaster kind '" + kind + "' (oracle | smoothing)");
  }
  if (auto a = node.find("alpha")) spec.alpha = a->number();
  if (auto s = node.find("noise_sd")) spec.noise_sd = s->number();
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) node.fail("alpha must lie in (0, 1]");
  if (!(spec.noise_sd >= 0.0)) node.fail("noise_sd must be >= 0");
  return spec;
}

json forecaster_to_json(const ForecasterSpec& spec) {
  if (spec.kind == ForecasterKind::OracleWithNoise) return {{"kind", "oracle"}, {"noise_sd", spec.noise_sd}};
  return {{"kind", "smoothing"}, {"alpha", spec.alpha}};
}

PolicySpec parse_policy(const Node& node) {
  if (!node.value().is_object()) node.fail("expected an object");
  const auto kind = node.at("kind").string();
  PolicySpec spec;
  spec.name = node.find("name") ? node.at("name").string() : kind;
  if (auto c = node.find("capacity")) {
    spec.capacity = c->unsigned_integer();
    if (spec.capacity == 0) c->fail("capacity must be >= 1");
  }
  if (kind == "fixed_matrix") {
    node.require_object({"name", "kind", "capacity"});
    spec.kind = FixedMatrixPolicy{};
  } else if (kind == "reactive") {
    node.require_object({"name", "kind", "capacity", "step_down_patience"});
    ReactivePolicy p;
    if (auto k = node.find("step_down_patience")) p.step_down_patience = k->unsigned_integer();
    spec.kind = p;
  } else if (kind == "predictive") {
    node.require_object({"name", "kind", "capacity", "forecaster"});
    PredictivePolicy p;
    if (auto f = node.find("forecaster")) p.forecaster = parse_forecaster(*f);
    spec.kind = p;
  } else if (kind == "q_learning") {
    node.require_object({"name", "kind", "capacity", "forecaster", "q", "cost", "training_ticks",
                         "training_lambda"});
    QLearningPolicy p;
    if (auto f = node.find("forecaster")) p.forecaster = parse_forecaster(*f);
    if (auto q = node.find("q")) {
      q->require_object({"learning_rate", "discount", "exploration", "exploration_floor"});
      if (auto v = q->find("learning_rate")) p.q.learning_rate = v->number();
      if (auto v = q->find("discount")) p.q.discount = v->number();
      if (auto v = q->find("exploration")) p.q.exploration = v->number();
      if (auto v = q->find("exploration_floor")) p.q.exploration_floor = v->number();
      guarded(*q, [&] { p.q.validate(); });
    }
    if (auto c = node.find("cost")) {
      c->require_object({"energy_weight", "switch_weight", "delay_penalty"});
      if (auto v = c->find("energy_weight")) p.cost.energy_weight = v->number();
      if (auto v = c->find("switch_weight")) p.cost.switch_weight = v->number();
      if (auto v = c->find("delay_penalty")) p.cost.delay_penalty = v->number();
      guarded(*c, [&] { p.cost.validate(); });
    }
    if (auto t = node.find("training_ticks")) p.training_ticks = t->unsigned_integer();
    if (auto l = node.find("training_lambda")) {
      p.training_lambda = l->number();
      if (!(p.training_lambda > 0.0)) l->fail("training_lambda must be > 0");
    }
    spec.kind = p;
  } else {
    node.at("kind").fail("unknown policy kind '" + kind +
                         "' (fixed_matrix | reactive | predictive | q_learning)");
  }
  return spec;
}

std::optional<Index> parse_initial_state(const Node& node, const DeviceProfile& profile) {
  if (node.value().is_null()) return std::nullopt;
  if (node.value().is_string()) {
    const auto text = node.string();
    if (text == "random") return std::nullopt;
    if (auto i = profile.find_state(text)) return *i;
    node.fail("unknown state '" + text + "'");
  }
  const auto i = node.unsigned_integer();
  if (i >= static_cast<std::uint64_t>(profile.size())) node.fail("state index out of range");
  return static_cast<Index>(i);
}

ScheduleStrategy parse_strategy(const Node& node) {
  const auto text = node.string();
  if (text == "greedy") return ScheduleStrategy::GreedyEfficiency;
  if (text == "random") return ScheduleStrategy::Random;
  node.fail("unknown strategy '" + text + "' (greedy | random)");
}

FleetConfig parse_fleet(const Node& node, const TransitionMatrix& default_matrix,
                        const DeviceProfile& default_profile_) {
  node.require_object({"nodes", "demo_policy", "coupling", "strategies"});
  FleetConfig fleet;
  if (auto demo = node.find("demo_policy")) {
    if (node.has("nodes")) node.fail("give either nodes or demo_policy, not both");
    fleet.nodes = demo_fleet(parse_policy(*demo));
  } else {
    const Node nodes = node.at("nodes");
    const std::size_t count = nodes.array_size();
    if (count == 0) nodes.fail("fleet needs at least one node");
    for (std::size_t m = 0; m < count; ++m) {
      const Node n = nodes.at(m);
      n.require_object({"name", "profile", "power_scale", "matrix", "capacity", "policy"});
      NodeSpec spec{"node" + std::to_string(m), default_profile_, default_matrix, kDefaultCapacity,
                    PolicySpec{"fixed_matrix", FixedMatrixPolicy{}, kDefaultCapacity}};
      if (auto v = n.find("name")) spec.name = v->string();
      if (auto v = n.find("profile")) spec.profile = parse_profile(*v);
      if (auto v = n.find("power_scale")) {
        const double scale = v->number();
        if (!(scale >= 0.0)) v->fail("power_scale must be >= 0");
        spec.profile = spec.profile.scaled(scale, spec.name);
      }
      if (auto v = n.find("matrix")) spec.matrix = parse_matrix(*v);
      if (auto v = n.find("capacity")) spec.capacity = v->unsigned_integer();
      if (auto v = n.find("policy")) spec.policy = parse_policy(*v);
      spec.policy.capacity = spec.capacity;
      guarded(n, [&] { spec.validate(); });
      fleet.nodes.push_back(std::move(spec));
    }
  }
  if (auto c = node.find("coupling")) {
    c->require_object({"kind", "sensitivity"});
    const auto kind = c->at("kind").string();
    if (kind == "none") {
      fleet.coupling.kind = CouplingKind::None;
    } else if (kind == "load_share") {
      fleet.coupling.kind = CouplingKind::LoadShare;
    } else {
      c->at("kind").fail("unknown coupling kind '" + kind + "' (none | load_share)");
    }
    if (auto s = c->find("sensitivity")) fleet.coupling.sensitivity = s->number();
    if (!(fleet.coupling.sensitivity >= 0.0)) c->fail("sensitivity must be >= 0");
  }
  if (auto s = node.find("strategies")) {
    fleet.strategies.clear();
    for (std::size_t i = 0; i < s->array_size(); ++i) fleet.strategies.push_back(parse_strategy(s->at(i)));
    if (fleet.strategies.empty()) s->fail("list at least one strategy");
  }
  return fleet;
}

}  // namespace

void ExperimentConfig::override_seed(std::uint64_t s) {
  seed = s;
  simulation.seed = s;
}

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  const Node root(doc, "");
  root.require_object({"seed", "matrix", "profile", "workload", "policies", "simulation", "convergence",
                       "sweep", "fleet"});
  ExperimentConfig cfg;
  if (auto v = root.find("seed")) cfg.seed = v->unsigned_integer();
  if (auto v = root.find("matrix")) cfg.matrix = parse_matrix(*v);
  if (auto v = root.find("profile")) cfg.profile = parse_profile(*v);
  if (cfg.matrix.size() != cfg.profile.size())
    root.fail("matrix has " + std::to_string(cfg.matrix.size()) + " states but profile has " +
              std::to_string(cfg.profile.size()));

  cfg.simulation.seed = cfg.seed;
  if (auto s = root.find("simulation")) {
    s->require_object({"steps", "burn_in", "initial_state"});
    if (auto v = s->find("steps")) cfg.simulation.steps = v->unsigned_integer();
    if (auto v = s->find("burn_in")) cfg.simulation.burn_in = v->unsigned_integer();
    if (auto v = s->find("initial_state")) cfg.simulation.initial_state = parse_initial_state(*v, cfg.profile);
    guarded(*s, [&] { cfg.simulation.validate(); });
  }

  if (auto w = root.find("workload")) {
    w->require_object({"kind", "lambda", "ticks", "seed", "path"});
    const auto kind = w->at("kind").string();
    if (kind == "poisson") {
      cfg.workload.kind = WorkloadSource::Kind::Poisson;
      if (auto v = w->find("lambda")) cfg.workload.lambda = v->number();
      if (!(cfg.workload.lambda > 0.0)) w->fail("lambda must be > 0");
    } else if (kind == "file") {
      cfg.workload.kind = WorkloadSource::Kind::File;
      std::filesystem::path p = w->at("path").string();
      cfg.workload.path = p.is_absolute() ? p : base_dir / p;
    } else if (kind == "zero") {
      cfg.workload.kind = WorkloadSource::Kind::Zero;
    } else {
      w->at("kind").fail("unknown workload kind '" + kind + "' (poisson | file | zero)");
    }
    if (auto v = w->find("ticks")) cfg.workload.ticks = v->unsigned_integer();
    if (auto v = w->find("seed")) cfg.workload.seed = v->unsigned_integer();
  }

  if (auto p = root.find("policies")) {
    for (std::size_t i = 0; i < p->array_size(); ++i) cfg.policies.push_back(parse_policy(p->at(i)));
  }

  if (auto c = root.find("convergence")) {
    c->require_object({"checkpoints", "replicas"});
    if (auto v = c->find("checkpoints")) {
      cfg.convergence.checkpoints.clear();
      for (std::size_t i = 0; i < v->array_size(); ++i)
        cfg.convergence.checkpoints.push_back(v->at(i).unsigned_integer());
      if (cfg.convergence.checkpoints.empty()) v->fail("list at least one checkpoint");
      for (std::size_t i = 0; i < cfg.convergence.checkpoints.size(); ++i)
        if (cfg.convergence.checkpoints[i] == 0 ||
            (i > 0 && cfg.convergence.checkpoints[i] <= cfg.convergence.checkpoints[i - 1]))
          v->fail("checkpoints must be positive and strictly increasing");
    }
    if (auto v = c->find("replicas")) {
      cfg.convergence.replicas = v->unsigned_integer();
      if (cfg.convergence.replicas == 0) v->fail("replicas must be >= 1");
    }
  }

  if (auto s = root.find("sweep")) {
    s->require_object({"row", "column", "values"});
    SweepSpec sweep;
    const auto n = static_cast<std::uint64_t>(cfg.matrix.size());
    const auto row = s->at("row").unsigned_integer();
    const auto col = s->at("column").unsigned_integer();
    if (row >= n) s->at("row").fail("row out of range");
    if (col >= n) s->at("column").fail("column out of range");
    sweep.row = static_cast<Index>(row);
    sweep.column = static_cast<Index>(col);
    sweep.values = s->at("values").numbers();
    if (sweep.values.empty()) s->at("values").fail("list at least one value");
    for (std::size_t i = 0; i < sweep.values.size(); ++i)
      if (!(sweep.values[i] >= 0.0 && sweep.values[i] <= 1.0)) s->at("values").at(i).fail("must lie in [0, 1]");
    cfg.sweep = std::move(sweep);
  }

  if (auto f = root.find("fleet")) cfg.fleet = parse_fleet(*f, cfg.matrix, cfg.profile);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json policy_to_json(const PolicySpec& policy) {
  json out = {{"name", policy.name}, {"kind", std::string(kind_name(policy.kind))}, {"capacity", policy.capacity}};
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, ReactivePolicy>) {
          out["step_down_patience"] = kind.step_down_patience;
        } else if constexpr (std::is_same_v<K, PredictivePolicy>) {
          out["forecaster"] = forecaster_to_json(kind.forecaster);
        } else if constexpr (std::is_same_v<K, QLearningPolicy>) {
          out["forecaster"] = forecaster_to_json(kind.forecaster);
          out["q"] = {{"learning_rate", kind.q.learning_rate},
                      {"discount", kind.q.discount},
                      {"exploration", kind.q.exploration},
                      {"exploration_floor", kind.q.exploration_floor}};
          out["cost"] = {{"energy_weight", kind.cost.energy_weight},
                         {"switch_weight", kind.cost.switch_weight},
                         {"delay_penalty", kind.cost.delay_penalty}};
          out["training_ticks"] = kind.training_ticks;
          out["training_lambda"] = kind.training_lambda;
        }
      },
      policy.kind);
  return out;
}

PolicySpec policy_from_json(const nlohmann::json& doc) { return parse_policy(Node(doc, "policy")); }

}  // namespace edgepower
