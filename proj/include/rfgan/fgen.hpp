#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rfgan/ext_real.hpp"

namespace rfgan {

/// An f-divergence generator together with its convex conjugate.
///
/// f is convex, lower semi-continuous, f(1) = 0 and f(x) = +inf for x < 0.
/// The conjugate is taken under that domain restriction, so
/// f*(t) = sup_{x >= 0} (x t - f(x)), which is non-decreasing in t.
struct FGenerator {
  std::string name;
  std::function<ExtReal(double)> f;
  std::function<ExtReal(double)> fstar;
  /// Right derivative of f*; +inf where f* is infinite.
  std::function<ExtReal(double)> fstar_prime;
  /// f' and f'' on (0, inf); only used by the dual Newton phase.
  std::function<double(double)> fprime;
  std::function<double(double)> fsecond;
  /// sup { t : f*(t) < inf } and whether it belongs to the domain.
  ExtReal fstar_domain_upper;
  bool fstar_domain_closed = false;
  /// lim_{x -> inf} f(x) / x, equal to fstar_domain_upper.
  ExtReal fprime_at_infinity;
  /// f is twice differentiable with f'' > 0 on (0, inf).
  bool strictly_convex = true;
  std::string note;
};

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();

/// kl, reverse_kl, js_gan, pearson_chi2, squared_hellinger, total_variation.
FGenerator builtin(const std::string& name);

struct GridSpec {
  double x_max = 10.0;
  std::size_t x_points = 201;
  double t_min = -10.0;
  double t_max = 3.0;
  std::size_t t_points = 201;
};

struct CheckEntry {
  std::string name;
  bool passed = false;
  /// Worst observed value of the checked quantity (slack, deviation, ...).
  double worst = 0.0;
  std::string detail;
};

struct CheckReport {
  std::string generator;
  std::vector<CheckEntry> entries;
  std::vector<std::string> notes;

  bool all_passed() const;
  const CheckEntry& entry(const std::string& name) const;
};

/// Numeric sanity suite for a generator: normalization f(1) = 0, the
/// x < 0 restriction, midpoint convexity, monotone conjugate,
/// sup_t (t - f*(t)) = 0, Fenchel-Young on the grid product, numeric
/// biconjugation and the slope of f at infinity. Failures are entries,
/// never exceptions.
CheckReport check_generator(const FGenerator& g, const GridSpec& grid = {});

}  // namespace rfgan
