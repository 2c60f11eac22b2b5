#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rfgan/discriminator.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

struct BruteForceResult {
  double value = 0.0;
  /// Certified: true sup - value <= error_bound.
  double error_bound = 0.0;
  std::vector<double> best_a;
  std::size_t grid_points = 0;
};

/// Grid search over the coefficient ball (k <= 2, finite radius). Box grid
/// points at the given spacing are projected onto the ball and the
/// intercept is solved exactly at each. The bound is L * res * sqrt(k) / 2
/// with L = 2 max_i ||phi(x_i)||_2.
BruteForceResult brute_force_primal(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                    double resolution);

struct InstanceRecord {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
  /// Reported quantities.
  std::map<std::string, double> values;
  /// Checked quantities; each passes when <= its tolerance.
  std::map<std::string, double> checks;
  bool passed = true;
  /// Largest amount by which a check exceeded its tolerance (0 if passed).
  double violation = 0.0;
  std::vector<std::string> failures;
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t instance_count = 0;
  std::size_t pass_count = 0;
  double worst_violation = 0.0;
  /// Largest value of every checked quantity across instances.
  std::map<std::string, double> worst;
  /// Tolerance applied to each checked quantity.
  std::map<std::string, double> tolerances;
  std::vector<InstanceRecord> records;

  bool all_passed() const { return pass_count == instance_count; }
};

const std::vector<std::string>& suite_names();

/// Runs the named property battery on `count` instances derived from
/// `seed`. Instances run in parallel; results do not depend on scheduling.
SuiteResult run_suite(const std::string& name, std::uint64_t seed, std::size_t count);

/// Parameters of the i-th duality-suite instance (shared with sandwich).
struct DualityCase {
  std::string generator;
  double radius = 1.0;
  std::size_t n = 0;
  std::size_t k = 0;
  bool partial_support = false;
  std::uint64_t seed = 0;
};
DualityCase duality_case(std::uint64_t seed, std::size_t index);
RandomInstance make_duality_instance(const DualityCase& c);

/// Per-instance seed: a SplitMix64 step of seed + index.
std::uint64_t derive_seed(std::uint64_t seed, std::size_t index);

}  // namespace rfgan
