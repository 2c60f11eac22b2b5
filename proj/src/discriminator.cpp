#include "rfgan/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Dense>

#include "rfgan/error.hpp"

namespace rfgan {

namespace {

bool is_inf(double p) { return p == std::numeric_limits<double>::infinity(); }

std::vector<double> mean_difference(const FeatureMap& phi, const Dist& p, const Dist& p_prime) {
  auto a = feature_means(p, phi);
  const auto b = feature_means(p_prime, phi);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] -= b[j];
  return a;
}

}  // namespace

DiscriminatorSpec::DiscriminatorSpec(LinearBall b) : variant_(std::move(b)) {
  const auto& ball = std::get<LinearBall>(variant_);
  if (!(ball.p >= 1.0)) throw Error(ErrorCode::UnsupportedNorm, "norm exponent must lie in [1, inf]");
  if (!(ball.radius > ExtReal(0.0))) throw Error(ErrorCode::ValidationError, "ball radius must be positive");
}

DiscriminatorSpec DiscriminatorSpec::linear_ball(FeatureMap phi, double p, ExtReal radius) {
  return DiscriminatorSpec(LinearBall{std::move(phi), p, radius});
}

DiscriminatorSpec DiscriminatorSpec::without_intercept() const {
  DiscriminatorSpec copy = *this;
  copy.intercept_ = false;
  return copy;
}

double dual_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (is_inf(p)) return 1.0;
  return p / (p - 1.0);
}

double lp_norm(std::span<const double> v, double p) {
  if (is_inf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

std::vector<double> project_to_ball(std::span<const double> a, double p, ExtReal radius) {
  std::vector<double> out(a.begin(), a.end());
  if (radius.is_pos_inf()) return out;
  const double r = radius.value();
  if (is_inf(p)) {
    for (double& x : out) x = std::clamp(x, -r, r);
    return out;
  }
  if (p == 2.0) {
    const double n = lp_norm(a, 2.0);
    if (n > r)
      for (double& x : out) x *= r / n;
    return out;
  }
  if (p == 1.0) {
    if (lp_norm(a, 1.0) <= r) return out;
    // Soft-threshold at the level theta found by sorting magnitudes.
    std::vector<double> u(a.size());
    std::transform(a.begin(), a.end(), u.begin(), [](double x) { return std::abs(x); });
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      cum += u[j];
      const double t = (cum - r) / static_cast<double>(j + 1);
      if (u[j] > t) theta = t;
    }
    for (double& x : out) x = std::copysign(std::max(std::abs(x) - theta, 0.0), x);
    return out;
  }
  throw Error(ErrorCode::UnsupportedNorm, "projection implemented for p in {1, 2, inf} only");
}

ExtReal lambda_star_gap(const RegularizerSpec& reg, const Dist& p, const Dist& p_prime) {
  require_same_space(p.space(), p_prime.space(), "lambda_star_gap");
  if (const auto* ind = std::get_if<IndicatorOf>(&reg)) {
    if (ind->spec.is_full_space()) {
      for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i] - p_prime[i]) > 1e-12) return ExtReal::pos_inf();
      return 0.0;
    }
    const auto& ball = ind->spec.ball();
    const auto diff = mean_difference(ball.phi, p, p_prime);
    if (ball.radius.is_pos_inf()) {
      for (double d : diff)
        if (std::abs(d) > 1e-10) return ExtReal::pos_inf();
      return 0.0;
    }
    return ball.radius.value() * lp_norm(diff, dual_exponent(ball.p));
  }
  const auto& quad = std::get<QuadraticCoefficientPenalty>(reg);
  const auto diff = mean_difference(quad.phi, p, p_prime);
  double s = 0.0;
  for (double d : diff) s += d * d;
  return s / (4.0 * quad.weight);
}

FunctionOnSpace realize(const DiscriminatorSpec& spec, std::span<const double> a, double b) {
  if (spec.is_full_space())
    throw Error(ErrorCode::ValidationError, "realize: the full space has no coefficient parameterization");
  const auto& ball = spec.ball();
  if (a.size() != ball.phi.num_features())
    throw Error(ErrorCode::DimensionMismatch, "realize: coefficient count does not match the feature map");
  if (ball.radius.is_finite() && lp_norm(a, ball.p) > ball.radius.value() * (1.0 + 1e-12))
    throw Error(ErrorCode::BallViolation, "realize: coefficients lie outside the ball");
  return FunctionOnSpace(ball.phi.space(), ball.phi.combine(a, spec.has_intercept() ? b : 0.0));
}

bool membership(const DiscriminatorSpec& spec, const FunctionOnSpace& h, double tol) {
  if (spec.is_full_space()) return true;
  const auto& ball = spec.ball();
  require_same_space(ball.phi.space(), h.space(), "membership");
  const auto n = static_cast<Eigen::Index>(h.size());
  const auto k = static_cast<Eigen::Index>(ball.phi.num_features());
  Eigen::MatrixXd design(n, k);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    target(i) = h[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) design(i, j) = ball.phi(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
  }
  if (spec.has_intercept()) {
    // Centering removes the intercept; the min-norm solution then has the
    // smallest Euclidean coefficient norm among all representations.
    target.array() -= target.mean();
    design.rowwise() -= design.colwise().mean();
  }
  const Eigen::VectorXd a = design.completeOrthogonalDecomposition().solve(target);
  const double residual = (design * a - target).norm();
  if (residual > tol) return false;
  if (ball.radius.is_pos_inf()) return true;
  std::vector<double> coeffs(a.data(), a.data() + a.size());
  return lp_norm(coeffs, ball.p) <= ball.radius.value() + tol;
}

}  // namespace rfgan
