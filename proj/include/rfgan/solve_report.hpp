#pragma once

#include <optional>
#include <vector>

#include "rfgan/ext_real.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

enum class SolveStatus {
  Converged,
  NotConverged,   ///< iteration cap hit; value is the best found
  Unbounded,      ///< objective grows without bound; value = +inf
  Infeasible,     ///< constraint set empty; value = +inf
  NotApplicable,  ///< class is not closed under shifts; duality need not hold
};

const char* to_string(SolveStatus s);

/// Outcome of a primal (sup) or dual (inf) solve.
struct SolveReport {
  ExtReal value;
  SolveStatus status = SolveStatus::Converged;

  /// Primal linear classes: optimal coefficients a and intercept b*.
  std::vector<double> coefficients;
  double intercept = 0.0;
  /// Primal over the full space: the maximizing discriminator.
  std::optional<FunctionOnSpace> discriminator;
  /// Dual side: the minimizing intermediate distribution P'.
  std::optional<Dist> intermediate;
  /// Moment projection: tilt parameter theta.
  std::vector<double> theta;
  /// Unbounded / infeasible: normalized direction along which the primal
  /// objective grows (equivalently a separating direction for the means).
  std::vector<double> certificate;

  int iterations = 0;
  /// First-order residual (primal), constraint residual (moment projection)
  /// or certified optimality gap estimate (dual).
  double residual = 0.0;
  /// Dual value minus the primal value when one was supplied.
  std::optional<double> certified_gap;
  /// The optimum is attained by the reported optimizer.
  bool attained = true;
  /// Some discriminator value was truncated at the search cap.
  bool capped = false;
  /// Largest |analytic - finite-difference| gradient mismatch observed,
  /// scaled by max(1, |gradient|).
  double gradient_check = 0.0;
  /// Objective value at every logged iterate.
  std::vector<double> trace;
};

}  // namespace rfgan
