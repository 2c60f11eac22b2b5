#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rfgan/ext_real.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/solve_report.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

/// Every distribution on the space, parameterized by softmax logits.
struct FullSimplex {
  OutcomeSpace space;
};

/// q_theta,i = base_i e^{theta . psi(x_i)} / Z(theta).
struct ExpFamily {
  Dist base;
  FeatureMap psi;
};

class GeneratorFamily {
 public:
  GeneratorFamily(FullSimplex f);  // NOLINT(google-explicit-constructor)
  GeneratorFamily(ExpFamily f);    // NOLINT(google-explicit-constructor)

  const OutcomeSpace& space() const;
  std::size_t num_params() const;
  bool is_full_simplex() const { return std::holds_alternative<FullSimplex>(variant_); }
  const ExpFamily& exp_family() const { return std::get<ExpFamily>(variant_); }

  Dist member(std::span<const double> theta) const;
  /// d q_i / d theta_j, row i.
  std::vector<std::vector<double>> jacobian(std::span<const double> theta) const;

 private:
  std::variant<FullSimplex, ExpFamily> variant_;
};

struct EstimatorConfig {
  std::uint64_t seed = 0;
  int starts = 5;
  int max_iters = 2000;
  /// Outer stopping tolerance on the gradient norm.
  double tol = 1e-9;
  /// Also stop once the objective is within this of a known lower bound.
  double value_tol = 1e-12;
  double fd_step = 1e-5;
  /// Residual tolerance for the inner primal solves.
  double inner_tol = 1e-10;
  /// Use the envelope gradient -sum_i f*(h_i + b*) dq_i/dtheta instead of
  /// finite differences in the f-GAN outer loop.
  bool envelope_gradient = false;
};

/// The three criteria at a fixed model Q. Entries are absent when the
/// inputs needed to evaluate them were not supplied.
struct CrossTable {
  std::optional<ExtReal> mle;   ///< KL(Pdata || Q)
  std::optional<double> gmm;    ///< ||E_Pdata[phi] - E_Q[phi]||_2
  std::optional<ExtReal> fgan;  ///< restricted divergence over the linear ball
};

struct StartRecord {
  std::vector<double> theta0;
  std::vector<double> theta;
  double value = 0.0;
  int iterations = 0;
  bool capped = false;  ///< stopped by the iteration cap
};

struct FitReport {
  std::string estimator;
  Dist q_star;
  std::vector<double> theta;  ///< empty when the fit is not a parameter value
  ExtReal objective;
  CrossTable cross;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  std::vector<StartRecord> starts;
  std::vector<std::string> notes;
};

/// Inputs shared by the estimators; phi/generator/radius feed both the
/// GMM and f-GAN criteria and the cross-table.
struct FitProblem {
  GeneratorFamily family;
  Dist data;
  std::optional<FeatureMap> phi;
  std::string generator = "kl";
  ExtReal radius = 1.0;
};

CrossTable evaluate_criteria(const FitProblem& prob, const Dist& q, double inner_tol = 1e-10);

/// argmin_theta KL(Pdata || Q_theta). FullSimplex returns Pdata; ExpFamily
/// runs damped Newton to the psi-moment match.
FitReport fit_mle(const FitProblem& prob, const EstimatorConfig& cfg = {});

/// argmin ||E_Pdata[phi] - E_Q[phi]||_2. ExpFamily: gradient descent with
/// multistart. FullSimplex: the moment-matching distribution closest to
/// uniform in KL.
FitReport fit_gmm(const FitProblem& prob, const EstimatorConfig& cfg = {});

/// argmin_theta sup_{||a||_2 <= R} a . E_Pdata[phi] - R_g(a . phi over Q_theta),
/// outer descent with central differences and multistart.
FitReport fit_linear_fgan(const FitProblem& prob, const EstimatorConfig& cfg = {});

FitReport fit(const std::string& estimator, const FitProblem& prob, const EstimatorConfig& cfg = {});

}  // namespace rfgan
