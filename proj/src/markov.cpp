#include "edgepower/markov.hpp"

#include <sstream>

namespace edgepower {

namespace {

constexpr std::array<std::string_view, kCanonicalStateCount> kLabels = {"Off", "Sleep", "Idle",
                                                                        "Active", "Overloaded"};

void require_square(const Eigen::MatrixXd& m, Index n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(n) + "x" +
                            std::to_string(n));
}

void require_nonnegative(const Eigen::MatrixXd& m, const char* what) {
  if (!(m.array() >= 0.0).all()) throw std::invalid_argument(std::string(what) + " has a negative entry");
}

}  // namespace

std::string_view label(PowerState s) noexcept { return kLabels[static_cast<std::size_t>(s)]; }

std::optional<PowerState> power_state_from_label(std::string_view text) noexcept {
  for (std::size_t i = 0; i < kLabels.size(); ++i)
    if (kLabels[i] == text) return static_cast<PowerState>(i);
  return std::nullopt;
}

PowerState power_state_at(Index i) {
  if (i < 0 || i >= static_cast<Index>(kCanonicalStateCount))
    throw UnknownState("no canonical power state with index " + std::to_string(i));
  return static_cast<PowerState>(i);
}

std::string ValidationReport::describe() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& v : violations) {
    if (!first) out << "; ";
    first = false;
    switch (v.kind) {
      case MatrixViolation::Kind::Empty:
        out << "matrix is empty";
        break;
      case MatrixViolation::Kind::NotSquare:
        out << "matrix is " << v.row << "x" << v.col << ", not square";
        break;
      case MatrixViolation::Kind::EntryOutOfRange:
        out << "entry (" << v.row << ", " << v.col << ") = " << v.value << " outside [0, 1]";
        break;
      case MatrixViolation::Kind::RowSum:
        out << "row " << v.row << " sums to " << v.value;
        break;
    }
  }
  return out.str();
}

MatrixX<double> reference_matrix_entries() {
  MatrixX<double> p(5, 5);
  p << 0.80, 0.20, 0.00, 0.00, 0.00,
       0.10, 0.60, 0.30, 0.00, 0.00,
       0.00, 0.15, 0.50, 0.30, 0.05,
       0.00, 0.00, 0.25, 0.60, 0.15,
       0.00, 0.00, 0.00, 0.20, 0.80;
  return p;
}

TransitionMatrix reference_matrix() { return TransitionMatrix(reference_matrix_entries()); }

DeviceProfile::DeviceProfile(std::string name, std::vector<std::string> labels,
                             Eigen::VectorXd state_power, Eigen::MatrixXd edge_latency,
                             Eigen::MatrixXd edge_energy)
    : name_(std::move(name)),
      labels_(std::move(labels)),
      state_power_(std::move(state_power)),
      edge_latency_(std::move(edge_latency)),
      edge_energy_(std::move(edge_energy)) {
  const Index n = state_power_.size();
  if (n == 0) throw std::invalid_argument("profile needs at least one state");
  if (static_cast<Index>(labels_.size()) != n)
    throw DimensionMismatch("profile has " + std::to_string(labels_.size()) + " labels for " +
                            std::to_string(n) + " states");
  require_square(edge_latency_, n, "edge_latency");
  require_square(edge_energy_, n, "edge_energy");
  if (!(state_power_.array() >= 0.0).all()) throw std::invalid_argument("state_power has a negative entry");
  require_nonnegative(edge_latency_, "edge_latency");
  require_nonnegative(edge_energy_, "edge_energy");
  edge_latency_.diagonal().setZero();
  edge_energy_.diagonal().setZero();
}

DeviceProfile DeviceProfile::from_power_latency(std::string name, std::vector<std::string> labels,
                                                Eigen::VectorXd state_power,
                                                const Eigen::MatrixXd& transition_power,
                                                Eigen::MatrixXd edge_latency) {
  const Index n = state_power.size();
  require_square(transition_power, n, "transition_power");
  require_square(edge_latency, n, "edge_latency");
  Eigen::MatrixXd energy = transition_power.cwiseProduct(edge_latency);
  return DeviceProfile(std::move(name), std::move(labels), std::move(state_power),
                       std::move(edge_latency), std::move(energy));
}

std::optional<Index> DeviceProfile::find_state(std::string_view wanted) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == wanted) return static_cast<Index>(i);
  return std::nullopt;
}

DeviceProfile DeviceProfile::scaled(double factor, std::string name) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("scale factor must be >= 0");
  return DeviceProfile(std::move(name), labels_, state_power_ * factor, edge_latency_,
                       edge_energy_ * factor);
}

DeviceProfile default_profile() {
  std::vector<std::string> labels(kLabels.begin(), kLabels.end());
  Eigen::VectorXd power(5);
  power << 0.0, 2.0, 4.0, 8.0, 12.0;
  return DeviceProfile("default", std::move(labels), std::move(power), Eigen::MatrixXd::Zero(5, 5),
                       Eigen::MatrixXd::Zero(5, 5));
}

DeviceProfile raspberry_pi4_profile() {
  Eigen::MatrixXd transition_power = Eigen::MatrixXd::Zero(4, 4);
  Eigen::MatrixXd latency = Eigen::MatrixXd::Zero(4, 4);
  transition_power(0, 1) = 1.5;
  latency(0, 1) = 0.5;
  return DeviceProfile::from_power_latency("raspberry-pi-4",
                                           {"Active", "Idle", "LightSleep", "DeepSleep"},
                                           Eigen::VectorXd::Zero(4), transition_power, latency);
}

double expected_power(const StationaryDistribution& pi, const DeviceProfile& profile) {
  if (pi.size() != profile.size())
    throw DimensionMismatch("distribution has " + std::to_string(pi.size()) +
                            " states, profile has " + std::to_string(profile.size()));
  return pi.probs().dot(profile.state_power());
}

double transition_energy(const DeviceProfile& profile, Index from, Index to) {
  const Index n = profile.size();
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw UnknownState("state index out of range for profile '" + profile.name() + "'");
  if (from == to) return 0.0;
  return profile.edge_energy()(from, to);
}

double transition_energy(const DeviceProfile& profile, PowerState from, PowerState to) {
  return transition_energy(profile, index_of(from), index_of(to));
}

}  // namespace edgepower
