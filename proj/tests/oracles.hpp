#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Repeated left-multiplication from the uniform vector until successive
/// iterates differ by less than `tolerance` (L-infinity).
inline Eigen::VectorXd power_iteration(const Eigen::MatrixXd& p, double tolerance = 1e-15,
                                       int max_iterations = 100000) {
  const auto n = p.rows();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int k = 0; k < max_iterations; ++k) {
    Eigen::RowVectorXd next = x * p;
    next /= next.sum();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (change < tolerance) break;
  }
  return x.transpose();
}

/// Strictly positive rows make the chain irreducible and aperiodic.
inline Eigen::MatrixXd random_irreducible(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p(i, j) = u(gen);
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

/// Deterministic MDP: taking action a in any state moves to state a.
struct DeterministicMdp {
  Eigen::MatrixXd cost;  ///< cost(s, a)
  double discount;

  /// Optimal state values by value iteration to a fixed point.
  Eigen::VectorXd values() const {
    const auto n = cost.rows();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < 100000; ++k) {
      Eigen::VectorXd next(n);
      for (Eigen::Index s = 0; s < n; ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < cost.cols(); ++a) best = std::min(best, cost(s, a) + discount * v(a));
        next(s) = best;
      }
      const double change = (next - v).cwiseAbs().maxCoeff();
      v = next;
      if (change < 1e-13) break;
    }
    return v;
  }

  /// Greedy policy under the optimal values; ties go to the lowest action.
  std::vector<Eigen::Index> policy() const {
    const Eigen::VectorXd v = values();
    std::vector<Eigen::Index> out;
    for (Eigen::Index s = 0; s < cost.rows(); ++s) {
      Eigen::Index best = 0;
      for (Eigen::Index a = 1; a < cost.cols(); ++a)
        if (cost(s, a) + discount * v(a) < cost(s, best) + discount * v(best)) best = a;
      out.push_back(best);
    }
    return out;
  }
};

/// Cheapest energy over every split of `demand` across two nodes with the given
/// capacities and joules-per-task, placing as much as capacity allows.
inline double cheapest_two_node_energy(std::uint64_t demand, std::uint64_t cap0, std::uint64_t cap1,
                                       double jpt0, double jpt1) {
  const std::uint64_t placed = std::min(demand, cap0 + cap1);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t a = 0; a <= std::min(placed, cap0); ++a) {
    const std::uint64_t b = placed - a;
    if (b > cap1) continue;
    best = std::min(best, static_cast<double>(a) * jpt0 + static_cast<double>(b) * jpt1);
  }
  return best;
}

}  // namespace oracle
