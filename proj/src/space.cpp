#include "rfgan/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "rfgan/error.hpp"

namespace rfgan {

OutcomeSpace::OutcomeSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorCode::BadSpace, "outcome space needs at least one outcome");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw Error(ErrorCode::BadSpace, "outcome labels must be unique");
}

OutcomeSpace OutcomeSpace::of_size(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  return OutcomeSpace(std::move(labels));
}

std::size_t OutcomeSpace::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(ErrorCode::ValidationError, "unknown outcome label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

void require_same_space(const OutcomeSpace& a, const OutcomeSpace& b, const char* where) {
  if (!(a == b)) throw Error(ErrorCode::SpaceMismatch, std::string(where) + ": operands live on different outcome spaces");
}

Dist::Dist(OutcomeSpace space, std::vector<double> masses) : space_(std::move(space)), p_(std::move(masses)) {
  if (p_.size() != space_.size())
    throw Error(ErrorCode::DimensionMismatch, "distribution length does not match the outcome space");
  double sum = 0.0;
  for (double m : p_) {
    if (!std::isfinite(m)) throw Error(ErrorCode::ValidationError, "non-finite probability mass");
    if (m < 0.0) throw Error(ErrorCode::NegativeWeight, "negative probability mass");
    sum += m;
  }
  const double off = std::abs(sum - 1.0);
  if (off > kRenormalizeLimit)
    throw Error(ErrorCode::NotNormalized, "masses sum to " + std::to_string(sum));
  if (off > kSumTolerance)
    for (double& m : p_) m /= sum;
}

std::vector<std::size_t> Dist::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < p_.size(); ++i)
    if (p_[i] > 0.0) s.push_back(i);
  return s;
}

Dist Dist::mix(const Dist& a, const Dist& b, double alpha) {
  require_same_space(a.space(), b.space(), "Dist::mix");
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (1.0 - alpha) * a[i] + alpha * b[i];
  return make_dist(a.space(), m);
}

FunctionOnSpace::FunctionOnSpace(OutcomeSpace space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_.size())
    throw Error(ErrorCode::DimensionMismatch, "function length does not match the outcome space");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::ValidationError, "function values must be finite");
}

FunctionOnSpace FunctionOnSpace::constant(const OutcomeSpace& space, double c) {
  return FunctionOnSpace(space, std::vector<double>(space.size(), c));
}

FeatureMap::FeatureMap(OutcomeSpace space, std::vector<std::vector<double>> rows)
    : space_(std::move(space)), rows_(std::move(rows)) {
  if (rows_.empty()) throw Error(ErrorCode::DimensionMismatch, "feature map needs at least one feature");
  for (const auto& r : rows_) {
    if (r.size() != space_.size())
      throw Error(ErrorCode::DimensionMismatch, "feature row length does not match the outcome space");
    for (double v : r)
      if (!std::isfinite(v)) throw Error(ErrorCode::ValidationError, "feature values must be finite");
  }
}

std::vector<double> FeatureMap::combine(std::span<const double> a, double b) const {
  if (a.size() != rows_.size()) throw Error(ErrorCode::DimensionMismatch, "coefficient length does not match feature count");
  std::vector<double> h(space_.size(), b);
  for (std::size_t j = 0; j < rows_.size(); ++j)
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += a[j] * rows_[j][i];
  return h;
}

double FeatureMap::max_column_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < space_.size(); ++i) {
    double s = 0.0;
    for (const auto& r : rows_) s += r[i] * r[i];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

Dist make_dist(const OutcomeSpace& space, std::span<const double> weights) {
  if (weights.size() != space.size())
    throw Error(ErrorCode::DimensionMismatch, "weight vector length does not match the outcome space");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::ValidationError, "non-finite weight");
    if (w < 0.0) throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
    sum += w;
  }
  if (sum <= 0.0) throw Error(ErrorCode::AllZero, "at least one weight must be positive");
  std::vector<double> p(weights.begin(), weights.end());
  for (double& v : p) v /= sum;
  return Dist(space, std::move(p));
}

double expectation(const Dist& p, std::span<const double> values) {
  if (values.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "expectation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (p[i] > 0.0) s += p[i] * values[i];
  return s;
}

double expectation(const Dist& p, const FunctionOnSpace& h) {
  require_same_space(p.space(), h.space(), "expectation");
  return expectation(p, h.values());
}

std::vector<double> feature_means(const Dist& p, const FeatureMap& phi) {
  require_same_space(p.space(), phi.space(), "feature_means");
  std::vector<double> m;
  m.reserve(phi.num_features());
  for (const auto& row : phi.rows()) m.push_back(expectation(p, row));
  return m;
}

bool absolutely_continuous(const Dist& p, const Dist& q) {
  require_same_space(p.space(), q.space(), "absolutely_continuous");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0 && !(q[i] > 0.0)) return false;
  return true;
}

double total_variation(const Dist& a, const Dist& b) {
  require_same_space(a.space(), b.space(), "total_variation");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

Dist random_dist(const OutcomeSpace& space, std::uint64_t seed, double min_mass) {
  const double n = static_cast<double>(space.size());
  if (!(min_mass >= 0.0) || min_mass * n >= 1.0)
    throw Error(ErrorCode::BadMinMass, "min_mass must lie in [0, 1/n)");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(space.size());
  for (double& v : w) v = expo(rng);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  const double free_mass = 1.0 - min_mass * n;
  for (double& v : w) v = min_mass + free_mass * v / sum;
  return make_dist(space, w);
}

RandomInstance random_instance(std::uint64_t seed, std::size_t n, std::size_t k) {
  const OutcomeSpace space = OutcomeSpace::of_size(n);
  std::mt19937_64 rng(seed);
  const auto p_seed = rng();
  const auto q_seed = rng();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> rows(k, std::vector<double>(n));
  for (auto& r : rows)
    for (double& v : r) v = normal(rng);
  const double dn = static_cast<double>(n);
  return {random_dist(space, p_seed, 1e-3 / dn), random_dist(space, q_seed, 1e-2 / dn),
          FeatureMap(space, std::move(rows))};
}

}  // namespace rfgan
