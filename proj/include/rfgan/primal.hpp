#pragma once

#include <cstdint>
#include <span>

#include "rfgan/discriminator.hpp"
#include "rfgan/divergence.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/solve_report.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

struct PrimalConfig {
  int max_iters = 10000;
  double step_init = 1.0;
  /// First-order residual ||a - proj(a + grad)|| at which the ascent stops.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Inner intercept solve; Auto uses the closed form for kl.
  RMethod r_method = RMethod::Auto;
};

/// Coefficient norm beyond which a still-increasing objective is declared
/// unbounded (R = inf classes with infeasible moment directions).
inline constexpr double kRayThreshold = 1e3;

/// Reduced linear-class objective J(a) = a . E_P[phi] - R_g(a . phi),
/// evaluated at an explicit (a, b*) so that the value is attained by a
/// member of the class.
struct LinearObjective {
  ExtReal value;
  double b_star = 0.0;
  std::vector<double> gradient;
};

LinearObjective linear_objective(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                 std::span<const double> a, RMethod method = RMethod::Auto);

/// E_P[h] - E_Q[f*(h)] for an explicit discriminator.
ExtReal primal_objective(const FGenerator& g, const Dist& p, const Dist& q, std::span<const double> h);

/// D_{f,H}(P || Q) = sup_{h in H} E_P[h] - E_Q[f*(h)].
///
/// The full space delegates to df_variational_full. Linear balls maximize
/// J(a) over ||a||_p <= R by projected gradient ascent with backtracking;
/// the gradient of R_g(a . phi) is the feature mean under the tilted
/// weights q_i f*'(a . phi(x_i) + b*), checked against central differences
/// every 50 iterations.
SolveReport restricted_div_primal(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                  const PrimalConfig& cfg = {});

/// D_{f,lambda}(P || Q) = sup_h E_P[h] - E_Q[f*(h)] - lambda(h). Indicator
/// regularizers route to restricted_div_primal; the quadratic penalty
/// maximizes J(a) - w ||a||_2^2 without constraints.
SolveReport regularized_div_primal(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                                   const PrimalConfig& cfg = {});

}  // namespace rfgan
