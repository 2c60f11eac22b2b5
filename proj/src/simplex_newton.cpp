#include "simplex_newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfgan::detail {

BarrierNewtonResult barrier_newton(const SimplexObjective& obj, Eigen::VectorXd p, const BarrierNewtonOptions& opt) {
  const Eigen::Index n = p.size();
  BarrierNewtonResult res;
  p = p.cwiseMax(1e-300);
  p /= p.sum();
  if (n == 1) {
    res.p = p;
    return res;
  }

  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  Eigen::MatrixXd kkt(n + 1, n + 1);
  Eigen::VectorXd rhs(n + 1);

  for (double mu : opt.schedule) {
    auto barrier_value = [&](const Eigen::VectorXd& x) {
      if ((x.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
      return obj.value(x, mu) - mu * x.array().log().sum();
    };
    double fcur = barrier_value(p);
    for (int step = 0; step < opt.max_steps_per_stage; ++step) {
      obj.derivatives(p, mu, grad, hess);
      grad.array() -= mu / p.array();
      hess.diagonal().array() += mu / p.array().square() + 1e-12;

      kkt.setZero();
      kkt.topLeftCorner(n, n) = hess;
      kkt.block(0, n, n, 1).setOnes();
      kkt.block(n, 0, 1, n).setOnes();
      rhs.head(n) = -grad;
      rhs(n) = 0.0;
      const Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
      const Eigen::VectorXd d = sol.head(n);
      const double decrement = -grad.dot(d);
      res.last_decrement = decrement;
      if (!(decrement > opt.decrement_tol * std::max(1.0, std::abs(fcur)))) break;

      double alpha = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (d(i) < 0.0) alpha = std::min(alpha, -0.99 * p(i) / d(i));
      Eigen::VectorXd trial;
      double ftrial = fcur;
      bool accepted = false;
      for (int bt = 0; bt < 80; ++bt) {
        trial = p + alpha * d;
        ftrial = barrier_value(trial);
        if (ftrial <= fcur - 1e-4 * alpha * decrement) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      p = trial / trial.sum();
      fcur = barrier_value(p);
      ++res.steps;
      if (opt.on_iterate) opt.on_iterate(p);
    }
  }
  res.p = p;
  return res;
}

}  // namespace rfgan::detail
