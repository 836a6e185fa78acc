#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "edgepower/error.hpp"

namespace edgepower {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Row sums of an input matrix must be within this of 1.
inline constexpr double kRowSumTolerance = 1e-9;
/// Target for ||pi P - pi||_inf after a steady-state solve.
inline constexpr double kResidualTolerance = 1e-10;

// -----------------------------------------------------------------------------
// Power states
// -----------------------------------------------------------------------------

/// Canonical single-node power ladder, lowest draw first.
enum class PowerState : std::uint8_t { Off = 0, Sleep = 1, Idle = 2, Active = 3, Overloaded = 4 };

inline constexpr std::size_t kCanonicalStateCount = 5;
inline constexpr std::array<PowerState, kCanonicalStateCount> kAllPowerStates = {
    PowerState::Off, PowerState::Sleep, PowerState::Idle, PowerState::Active,
    PowerState::Overloaded};

constexpr Index index_of(PowerState s) noexcept { return static_cast<Index>(s); }

std::string_view label(PowerState s) noexcept;
std::optional<PowerState> power_state_from_label(std::string_view text) noexcept;
/// Throws UnknownState when `i` is outside the canonical ladder.
PowerState power_state_at(Index i);

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

struct MatrixViolation {
  enum class Kind { Empty, NotSquare, EntryOutOfRange, RowSum };
  Kind kind;
  Index row = -1;  ///< -1 when the violation is not tied to a row
  Index col = -1;  ///< -1 for row-level violations
  double value = 0.0;
};

struct ValidationReport {
  std::vector<MatrixViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
  /// One line per violation, e.g. "row 0 sums to 0.9".
  std::string describe() const;
};

template <typename Derived>
ValidationReport validate_matrix(const Eigen::MatrixBase<Derived>& m,
                                 double tolerance = kRowSumTolerance) {
  ValidationReport report;
  using MV = MatrixViolation;
  if (m.rows() == 0 || m.cols() == 0) {
    report.violations.push_back({MV::Kind::Empty});
    return report;
  }
  if (m.rows() != m.cols()) {
    report.violations.push_back({MV::Kind::NotSquare, m.rows(), m.cols()});
    return report;
  }
  for (Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = static_cast<double>(m(i, j));
      if (!(v >= 0.0 && v <= 1.0)) report.violations.push_back({MV::Kind::EntryOutOfRange, i, j, v});
      sum += v;
    }
    if (!(std::abs(sum - 1.0) <= tolerance)) report.violations.push_back({MV::Kind::RowSum, i, -1, sum});
  }
  return report;
}

class InvalidMatrix : public Error {
 public:
  explicit InvalidMatrix(ValidationReport report)
      : Error("invalid transition matrix: " + report.describe()), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

// -----------------------------------------------------------------------------
// Transition matrix and distributions
// -----------------------------------------------------------------------------

/// Row-stochastic square matrix. Validated on construction, immutable after.
template <typename Scalar>
class BasicTransitionMatrix {
 public:
  explicit BasicTransitionMatrix(MatrixX<Scalar> entries) : entries_(std::move(entries)) {
    auto report = validate_matrix(entries_);
    if (!report.ok()) throw InvalidMatrix(std::move(report));
  }

  Index size() const noexcept { return entries_.rows(); }
  const MatrixX<Scalar>& entries() const noexcept { return entries_; }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }
  auto row(Index i) const { return entries_.row(i); }

  friend bool operator==(const BasicTransitionMatrix& a, const BasicTransitionMatrix& b) {
    return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
  }

 private:
  MatrixX<Scalar> entries_;
};

using TransitionMatrix = BasicTransitionMatrix<double>;

/// Probability vector over states: entries >= 0 summing to 1.
template <typename Scalar>
class BasicDistribution {
 public:
  explicit BasicDistribution(VectorX<Scalar> probs, double tolerance = kRowSumTolerance)
      : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw std::invalid_argument("distribution must be non-empty");
    for (Index i = 0; i < probs_.size(); ++i)
      if (!(probs_(i) >= Scalar(0))) throw std::invalid_argument("distribution entry is negative");
    if (!(std::abs(static_cast<double>(probs_.sum()) - 1.0) <= tolerance))
      throw std::invalid_argument("distribution does not sum to 1");
  }

  Index size() const noexcept { return probs_.size(); }
  const VectorX<Scalar>& probs() const noexcept { return probs_; }
  Scalar operator()(Index i) const { return probs_(i); }

 private:
  VectorX<Scalar> probs_;
};

using StationaryDistribution = BasicDistribution<double>;

/// The five-state matrix used throughout the examples and acceptance tests.
MatrixX<double> reference_matrix_entries();
TransitionMatrix reference_matrix();

// -----------------------------------------------------------------------------
// Steady state
// -----------------------------------------------------------------------------

namespace detail {

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns nullopt when a pivot falls below `pivot_floor`.
template <typename Scalar>
std::optional<VectorX<Scalar>> solve_partial_pivot(MatrixX<Scalar> a, VectorX<Scalar> b,
                                                   Scalar pivot_floor) {
  using std::abs;
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    Index pivot = k;
    for (Index r = k + 1; r < n; ++r)
      if (abs(a(r, k)) > abs(a(pivot, k))) pivot = r;
    if (!(abs(a(pivot, k)) > pivot_floor)) return std::nullopt;
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      std::swap(b(k), b(pivot));
    }
    for (Index r = k + 1; r < n; ++r) {
      const Scalar factor = a(r, k) / a(k, k);
      if (factor == Scalar(0)) continue;
      a.row(r).tail(n - k) -= factor * a.row(k).tail(n - k);
      b(r) -= factor * b(k);
    }
  }
  VectorX<Scalar> x(n);
  for (Index k = n - 1; k >= 0; --k) {
    Scalar acc = b(k);
    for (Index c = k + 1; c < n; ++c) acc -= a(k, c) * x(c);
    x(k) = acc / a(k, k);
  }
  return x;
}

}  // namespace detail

/// Stationary distribution of an irreducible-recurrent-class chain.
///
/// Solves (P^T - I) pi = 0 with the last balance equation replaced by
/// sum(pi) = 1. Any n - 1 balance rows are independent exactly when the chain
/// has a single closed class, so a vanishing pivot means the stationary
/// distribution is not unique.
template <typename Scalar>
BasicDistribution<Scalar> steady_state(const BasicTransitionMatrix<Scalar>& m) {
  const Index n = m.size();
  MatrixX<Scalar> a = m.entries().transpose() - MatrixX<Scalar>::Identity(n, n);
  a.row(n - 1).setOnes();
  VectorX<Scalar> b = VectorX<Scalar>::Zero(n);
  b(n - 1) = Scalar(1);

  const Scalar scale = std::max<Scalar>(Scalar(1), a.cwiseAbs().rowwise().sum().maxCoeff());
  const Scalar floor = scale * Scalar(n) * Scalar(64) * std::numeric_limits<Scalar>::epsilon();
  auto solved = detail::solve_partial_pivot<Scalar>(std::move(a), std::move(b), floor);
  if (!solved) throw NonUniqueStationary("transition matrix has more than one closed class");

  VectorX<Scalar> pi = std::move(*solved);
  // Round-off can leave transient-state entries a few ulps below zero.
  for (Index i = 0; i < n; ++i) {
    if (pi(i) < Scalar(0)) {
      if (pi(i) < Scalar(-1e-9)) throw NonUniqueStationary("solver produced a negative probability");
      pi(i) = Scalar(0);
    }
  }
  pi /= pi.sum();
  return BasicDistribution<Scalar>(std::move(pi));
}

/// ||pi P - pi||_inf.
template <typename Scalar>
Scalar stationary_residual(const BasicDistribution<Scalar>& pi, const BasicTransitionMatrix<Scalar>& m) {
  if (pi.size() != m.size()) throw DimensionMismatch("distribution and matrix sizes differ");
  return (pi.probs().transpose() * m.entries() - pi.probs().transpose()).cwiseAbs().maxCoeff();
}

/// Sets entry (i, j) to `value` and rescales the rest of row i proportionally.
template <typename Scalar>
BasicTransitionMatrix<Scalar> perturb_row(const BasicTransitionMatrix<Scalar>& m, Index i, Index j,
                                          Scalar value) {
  const Index n = m.size();
  if (i < 0 || i >= n || j < 0 || j >= n) throw UnknownState("perturb_row: state index out of range");
  if (!(value >= Scalar(0) && value <= Scalar(1)))
    throw std::invalid_argument("perturb_row: value must lie in [0, 1]");

  MatrixX<Scalar> entries = m.entries();
  Scalar off_mass(0);
  for (Index c = 0; c < n; ++c)
    if (c != j) off_mass += entries(i, c);

  if (off_mass == Scalar(0)) {
    if (value < Scalar(1))
      throw InfeasiblePerturbation("row " + std::to_string(i) +
                                   " has no mass outside the perturbed column");
    return m;
  }
  const Scalar ratio = (Scalar(1) - value) / off_mass;
  for (Index c = 0; c < n; ++c) entries(i, c) = c == j ? value : entries(i, c) * ratio;
  return BasicTransitionMatrix<Scalar>(std::move(entries));
}

// -----------------------------------------------------------------------------
// Device profiles
// -----------------------------------------------------------------------------

/// Per-state power draw plus per-edge transition latency and energy.
class DeviceProfile {
 public:
  DeviceProfile(std::string name, std::vector<std::string> labels, Eigen::VectorXd state_power,
                Eigen::MatrixXd edge_latency, Eigen::MatrixXd edge_energy);

  /// Builds edge energy as transition power x latency, entrywise.
  static DeviceProfile from_power_latency(std::string name, std::vector<std::string> labels,
                                          Eigen::VectorXd state_power,
                                          const Eigen::MatrixXd& transition_power,
                                          Eigen::MatrixXd edge_latency);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  Index size() const noexcept { return state_power_.size(); }
  const Eigen::VectorXd& state_power() const noexcept { return state_power_; }
  const Eigen::MatrixXd& edge_latency() const noexcept { return edge_latency_; }
  const Eigen::MatrixXd& edge_energy() const noexcept { return edge_energy_; }

  std::optional<Index> find_state(std::string_view label) const;

  /// Copy with every power and edge energy multiplied by `factor`.
  DeviceProfile scaled(double factor, std::string name) const;

 private:
  std::string name_;
  std::vector<std::string> labels_;
  Eigen::VectorXd state_power_;
  Eigen::MatrixXd edge_latency_;
  Eigen::MatrixXd edge_energy_;
};

/// Five canonical states at [0, 2, 4, 8, 12] W with free transitions.
/// These wattages are an assumption of this project, not measured values.
DeviceProfile default_profile();

/// Four-state Raspberry Pi 4 ladder (Active, Idle, LightSleep, DeepSleep).
/// Only the Active -> Idle edge (1.5 W over 0.5 s) is populated.
DeviceProfile raspberry_pi4_profile();

/// sum_i pi_i * state_power_i, in watts.
double expected_power(const StationaryDistribution& pi, const DeviceProfile& profile);

/// Joules spent moving from `from` to `to`; 0 on the diagonal.
double transition_energy(const DeviceProfile& profile, Index from, Index to);
double transition_energy(const DeviceProfile& profile, PowerState from, PowerState to);

}  // namespace edgepower
