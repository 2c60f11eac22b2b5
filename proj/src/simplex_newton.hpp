#pragma once

// Internal: second-order solver for smooth convex objectives over the
// probability simplex (in the coordinates of a support set).

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace rfgan::detail {

/// Smooth convex objective on the open simplex. `smoothing` is the current
/// continuation level; objectives without kinks may ignore it.
struct SimplexObjective {
  std::function<double(const Eigen::VectorXd& p, double smoothing)> value;
  std::function<void(const Eigen::VectorXd& p, double smoothing, Eigen::VectorXd& grad, Eigen::MatrixXd& hess)>
      derivatives;
};

struct BarrierNewtonOptions {
  /// Smoothing and barrier weight, decreased jointly stage by stage.
  std::vector<double> schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  int max_steps_per_stage = 200;
  /// Stage ends once the Newton decrement falls below this (times max(1, |F|)).
  double decrement_tol = 1e-15;
  /// Called with every accepted iterate.
  std::function<void(const Eigen::VectorXd&)> on_iterate;
};

struct BarrierNewtonResult {
  Eigen::VectorXd p;
  int steps = 0;
  double last_decrement = 0.0;
};

/// Minimizes F(p) - mu sum_i ln p_i over {p > 0, sum p = 1} for each mu in
/// the schedule (smoothing = mu), warm-starting each stage. Newton steps on
/// the equality-constrained KKT system, fraction-to-boundary 0.99 and
/// Armijo backtracking.
BarrierNewtonResult barrier_newton(const SimplexObjective& obj, Eigen::VectorXd p0, const BarrierNewtonOptions& opt);

}  // namespace rfgan::detail
