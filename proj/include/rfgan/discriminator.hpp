#pragma once

#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "rfgan/ext_real.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

/// All bounded functions on the space.
struct FullSpace {};

/// { a . phi + b : ||a||_p <= radius, b real }. radius = +inf is A = R^k.
struct LinearBall {
  FeatureMap phi;
  double p = 2.0;  ///< norm exponent in [1, inf]; +inf allowed
  ExtReal radius = 1.0;
};

/// Discriminator class H. Every class carries a free intercept, which makes
/// it closed under h -> h + b; `intercept` may only be switched off through
/// without_intercept(), a hook for exercising the shift-invariance
/// precondition.
class DiscriminatorSpec {
 public:
  DiscriminatorSpec(FullSpace s) : variant_(s) {}  // NOLINT(google-explicit-constructor)
  DiscriminatorSpec(LinearBall b);                  // NOLINT(google-explicit-constructor)

  static DiscriminatorSpec linear_ball(FeatureMap phi, double p, ExtReal radius);

  /// Same class with the intercept removed; breaks shift invariance.
  DiscriminatorSpec without_intercept() const;

  bool is_full_space() const { return std::holds_alternative<FullSpace>(variant_); }
  const LinearBall& ball() const { return std::get<LinearBall>(variant_); }
  bool has_intercept() const { return intercept_; }

 private:
  std::variant<FullSpace, LinearBall> variant_;
  bool intercept_ = true;
};

/// lambda = indicator of H.
struct IndicatorOf {
  DiscriminatorSpec spec;
};

/// lambda(a . phi + b) = weight * ||a||_2^2; the intercept is free.
struct QuadraticCoefficientPenalty {
  FeatureMap phi;
  double weight = 1.0;
};

using RegularizerSpec = std::variant<IndicatorOf, QuadraticCoefficientPenalty>;

/// Hoelder conjugate exponent: 1 -> inf, 2 -> 2, inf -> 1.
double dual_exponent(double p);

/// ||v||_p for p in [1, inf].
double lp_norm(std::span<const double> v, double p);

/// Euclidean projection onto { ||a||_p <= radius } for p in {1, 2, inf}.
std::vector<double> project_to_ball(std::span<const double> a, double p, ExtReal radius);

/// lambda*(P - P'), the penalty on the intermediate distribution.
///
/// Indicator(FullSpace): 0 if P = P' (1e-12 per mass) else inf.
/// Indicator(LinearBall, finite R): R ||E_P[phi] - E_P'[phi]||_q, 1/p + 1/q = 1.
/// Indicator(LinearBall, R = inf): 0 if the feature means agree within 1e-10 else inf.
/// QuadraticCoefficientPenalty(w): ||E_P[phi] - E_P'[phi]||_2^2 / (4 w).
ExtReal lambda_star_gap(const RegularizerSpec& reg, const Dist& p, const Dist& p_prime);

/// h_i = a . phi(x_i) + b. Throws BallViolation when ||a||_p > R and
/// DimensionMismatch on a wrong coefficient count.
FunctionOnSpace realize(const DiscriminatorSpec& spec, std::span<const double> a, double b);

/// Whether h lies in H: least-squares fit of h by (a, b) with residual
/// within tol, and the minimum-norm a inside the ball (up to tol).
bool membership(const DiscriminatorSpec& spec, const FunctionOnSpace& h, double tol);

}  // namespace rfgan
