#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rfgan {

/// Finite outcome space with distinct labels. Events are all subsets.
class OutcomeSpace {
 public:
  explicit OutcomeSpace(std::vector<std::string> labels);

  /// Space with labels "x0", "x1", ...
  static OutcomeSpace of_size(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Index of a label; throws ValidationError when absent.
  std::size_t index_of(const std::string& label) const;

  friend bool operator==(const OutcomeSpace&, const OutcomeSpace&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Probability vector over an OutcomeSpace.
///
/// Masses are nonnegative and sum to one: sums within 1e-12 of one are
/// stored as given, sums within 1e-9 are renormalized, anything further off
/// is rejected as a harness bug.
class Dist {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kRenormalizeLimit = 1e-9;

  Dist(OutcomeSpace space, std::vector<double> masses);

  const OutcomeSpace& space() const { return space_; }
  std::size_t size() const { return p_.size(); }
  std::span<const double> masses() const { return p_; }
  double operator[](std::size_t i) const { return p_[i]; }

  /// Indices with strictly positive mass.
  std::vector<std::size_t> support() const;
  bool in_support(std::size_t i) const { return p_[i] > 0.0; }

  /// (1 - alpha) * a + alpha * b.
  static Dist mix(const Dist& a, const Dist& b, double alpha);

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  OutcomeSpace space_;
  std::vector<double> p_;
};

/// Real-valued function on the outcomes (a discriminator h).
class FunctionOnSpace {
 public:
  FunctionOnSpace(OutcomeSpace space, std::vector<double> values);

  const OutcomeSpace& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  static FunctionOnSpace constant(const OutcomeSpace& space, double c);

 private:
  OutcomeSpace space_;
  std::vector<double> values_;
};

/// k feature functions evaluated on every outcome; entry (j, i) = phi_j(x_i).
class FeatureMap {
 public:
  FeatureMap(OutcomeSpace space, std::vector<std::vector<double>> rows);

  const OutcomeSpace& space() const { return space_; }
  std::size_t num_features() const { return rows_.size(); }
  std::size_t num_outcomes() const { return space_.size(); }
  double operator()(std::size_t j, std::size_t i) const { return rows_[j][i]; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  /// a . phi(x_i) for every outcome, plus intercept b.
  std::vector<double> combine(std::span<const double> a, double b = 0.0) const;

  /// Largest Euclidean norm of a feature column phi(x_i).
  double max_column_norm() const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  OutcomeSpace space_;
  std::vector<std::vector<double>> rows_;
};

/// Normalizes nonnegative weights into a distribution.
Dist make_dist(const OutcomeSpace& space, std::span<const double> weights);

double expectation(const Dist& p, const FunctionOnSpace& h);

/// Expectation of raw values (same length as the space).
double expectation(const Dist& p, std::span<const double> values);

std::vector<double> feature_means(const Dist& p, const FeatureMap& phi);

/// support(P) is contained in support(Q).
bool absolutely_continuous(const Dist& p, const Dist& q);

/// Total variation distance, half the l1 distance.
double total_variation(const Dist& a, const Dist& b);

/// Random distribution with every mass >= min_mass; deterministic per seed.
Dist random_dist(const OutcomeSpace& space, std::uint64_t seed, double min_mass);

struct RandomInstance {
  Dist p;
  Dist q;
  FeatureMap phi;
};

/// Random (P, Q, phi) on n outcomes with k standard-normal features.
/// P has full support (min mass 1e-3/n), Q has min mass 1e-2/n.
RandomInstance random_instance(std::uint64_t seed, std::size_t n, std::size_t k);

void require_same_space(const OutcomeSpace& a, const OutcomeSpace& b, const char* where);

}  // namespace rfgan
