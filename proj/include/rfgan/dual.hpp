#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "rfgan/discriminator.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/solve_report.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

struct DualConfig {
  /// Mirror-descent iterations before the Newton polish.
  int max_iters = 2000;
  /// Newton stage tolerance on the decrement.
  double tol = 1e-15;
  /// Norm smoothing used by the mirror-descent phase, in [0, 1e-3].
  double smoothing_eps = 1e-6;
  /// Initial mirror step; step t is step0 / sqrt(t).
  double step0 = 1.0;
  std::uint64_t seed = 0;
  /// When set, the report carries dual value minus this primal value.
  std::optional<double> primal_value;
};

/// Dual form: inf over P' << Q of lambda*(P - P') + D_f(P' || Q).
///
/// Runs entropic mirror descent (multiplicative weights, step
/// step0 / sqrt(t), best iterate kept) on the simplex over support(Q), then
/// polishes with barrier Newton under joint smoothing/barrier continuation
/// when f is strictly convex. The reported value is G re-evaluated without
/// smoothing at the returned P', so it is always an upper bound.
SolveReport restricted_div_dual(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                                const DualConfig& cfg = {});
SolveReport restricted_div_dual(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                const DualConfig& cfg = {});

/// G(P') = lambda*(P - P') + D_f(P' || Q), unsmoothed.
ExtReal dual_objective(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                       const Dist& p_prime);

/// inf D_f(P' || Q) subject to E_P'[phi] = E_P[phi] (the R = inf case).
///
/// kl: damped Newton on the log-partition of the exponential tilt
/// q_i e^{theta . phi(x_i)}; value theta . E_P[phi] - A(theta). Other
/// generators: augmented Lagrangian with doubling penalty. Target means
/// outside the hull of {phi(x_i) : q_i > 0} are reported Infeasible with
/// value +inf once ||theta|| exceeds 1e3.
SolveReport moment_projection(const FGenerator& g, const Dist& p, const Dist& q, const FeatureMap& phi,
                              const DualConfig& cfg = {});

/// Same, with explicit target means.
SolveReport moment_projection_to(const FGenerator& g, std::span<const double> target, const Dist& q,
                                 const FeatureMap& phi, const DualConfig& cfg = {});

struct GapReport {
  SolveReport primal;
  SolveReport dual;
  ExtReal absolute_gap;
  ExtReal relative_gap;  ///< |v_p - v_d| / max(1, |v_d|)
  /// max(primal trace) - min(dual trace); <= 0 up to evaluation error.
  double iterate_violation = 0.0;
  bool applicable = true;
};

/// Runs both sides and compares them.
GapReport duality_gap(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                      const PrimalConfig& primal_cfg = {}, const DualConfig& dual_cfg = {});
GapReport duality_gap(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                      const PrimalConfig& primal_cfg = {}, const DualConfig& dual_cfg = {});

}  // namespace rfgan
