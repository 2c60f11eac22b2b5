#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfgan/discriminator.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/estimators.hpp"
#include "rfgan/ext_real.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

struct DiscriminatorEntry {
  enum class Kind { FullSpace, LinearBall, QuadraticPenalty };
  Kind kind = Kind::FullSpace;
  std::string features;  ///< feature map name (linear_ball, quadratic_penalty)
  double norm = 2.0;     ///< linear_ball exponent; +inf allowed
  ExtReal radius = 1.0;
  double weight = 1.0;  ///< quadratic_penalty

  friend bool operator==(const DiscriminatorEntry&, const DiscriminatorEntry&) = default;
};

struct FamilyEntry {
  enum class Kind { FullSimplex, ExpFamily };
  Kind kind = Kind::FullSimplex;
  std::string base;      ///< exp_family base distribution name
  std::string features;  ///< exp_family sufficient statistics

  friend bool operator==(const FamilyEntry&, const FamilyEntry&) = default;
};

struct PrimalSettings {
  int max_iters = PrimalConfig{}.max_iters;
  double step_init = PrimalConfig{}.step_init;
  double tol = PrimalConfig{}.tol;
  friend bool operator==(const PrimalSettings&, const PrimalSettings&) = default;
};

struct DualSettings {
  int max_iters = DualConfig{}.max_iters;
  double tol = DualConfig{}.tol;
  double smoothing_eps = DualConfig{}.smoothing_eps;
  double step0 = DualConfig{}.step0;
  friend bool operator==(const DualSettings&, const DualSettings&) = default;
};

struct EstimatorSettings {
  int starts = EstimatorConfig{}.starts;
  int max_iters = EstimatorConfig{}.max_iters;
  double tol = EstimatorConfig{}.tol;
  double value_tol = EstimatorConfig{}.value_tol;
  double fd_step = EstimatorConfig{}.fd_step;
  double inner_tol = EstimatorConfig{}.inner_tol;
  bool envelope_gradient = EstimatorConfig{}.envelope_gradient;
  friend bool operator==(const EstimatorSettings&, const EstimatorSettings&) = default;
};

/// Parsed instance description. Distributions hold raw nonnegative weights
/// (normalized on use); feature maps are k rows of length n.
struct InstanceFile {
  std::vector<std::string> labels;
  std::map<std::string, std::vector<double>> distributions;
  std::map<std::string, std::vector<std::vector<double>>> features;
  std::string generator = "kl";
  std::string p = "P";
  std::string q = "Q";
  DiscriminatorEntry discriminator;
  std::optional<FamilyEntry> family;
  std::string data;  ///< distribution name used as Pdata by fit
  std::string estimator = "mle";
  PrimalSettings primal;
  DualSettings dual;
  EstimatorSettings fit;
  std::uint64_t seed = 0;

  friend bool operator==(const InstanceFile&, const InstanceFile&) = default;

  OutcomeSpace space() const;
  Dist dist(const std::string& name) const;
  FeatureMap feature_map(const std::string& name) const;
  RegularizerSpec regularizer() const;
  /// Throws ValidationError for the quadratic penalty, which is not a class.
  DiscriminatorSpec discriminator_spec() const;
  GeneratorFamily generator_family() const;
  /// Needs `family` and `data`.
  FitProblem fit_problem() const;

  PrimalConfig primal_config(std::uint64_t seed) const;
  DualConfig dual_config(std::uint64_t seed) const;
  EstimatorConfig estimator_config(std::uint64_t seed) const;
};

/// Parses and validates. Syntax errors report the line and column; semantic
/// errors name the offending field as a JSON pointer. `source` prefixes
/// every message.
InstanceFile parse_instance(const std::string& text, const std::string& source = "<instance>");

/// Throws FileNotFound when the file cannot be opened.
InstanceFile load_instance(const std::string& path);

/// Canonical text form: fixed key order, two-space indent, shortest
/// round-trip decimal for every number, trailing newline.
std::string serialize_instance(const InstanceFile& inst);

/// Checks that every referenced name resolves and all dimensions agree.
void validate_instance(const InstanceFile& inst);

}  // namespace rfgan
