#include "rfgan/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>

#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/error.hpp"
#include "rfgan/estimators.hpp"
#include "rfgan/optim1d.hpp"
#include "rfgan/primal.hpp"

namespace rfgan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kSmoothGenerators = {"kl", "pearson_chi2", "squared_hellinger", "js_gan"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Records checks on one instance.
class Checker {
 public:
  Checker(InstanceRecord& rec, std::map<std::string, double>& tol) : rec_(rec), tol_(tol) {}

  // measured <= tol; NaN fails.
  void le(const std::string& key, double measured, double tol) {
    tol_[key] = tol;
    auto [it, fresh] = rec_.checks.emplace(key, measured);
    if (!fresh) it->second = std::max(it->second, measured);
    if (measured <= tol) return;
    fail(key, std::isnan(measured) ? kInf : measured - tol);
  }

  // Boolean property, recorded as 0 (holds) or 1 (violated).
  void holds(const std::string& key, bool ok) { le(key, ok ? 0.0 : 1.0, 0.0); }

  void value(const std::string& key, double v) { rec_.values[key] = v; }
  void param(const std::string& key, std::string v) { rec_.params[key] = std::move(v); }

 private:
  void fail(const std::string& key, double amount) {
    rec_.passed = false;
    rec_.violation = std::max(rec_.violation, amount);
    if (std::find(rec_.failures.begin(), rec_.failures.end(), key) == rec_.failures.end()) rec_.failures.push_back(key);
  }

  InstanceRecord& rec_;
  std::map<std::string, double>& tol_;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<double> mean_difference(const Dist& a, const Dist& b, const FeatureMap& phi) {
  auto m = feature_means(a, phi);
  const auto e = feature_means(b, phi);
  for (std::size_t j = 0; j < m.size(); ++j) m[j] -= e[j];
  return m;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// |a - b| with matching infinities counting as zero.
double ext_diff(ExtReal a, ExtReal b) {
  if (a.is_finite() && b.is_finite()) return std::abs(a.value() - b.value());
  return a == b ? 0.0 : kInf;
}

using SuiteFn = std::function<void(std::uint64_t seed, std::size_t index, Checker&)>;

void suite_generators(std::uint64_t seed, std::size_t i, Checker& c) {
  const auto& names = builtin_names();
  const auto g = builtin(names[i % names.size()]);
  GridSpec grid;
  if (i >= names.size()) {
    std::mt19937_64 rng(seed);
    grid.x_max = uniform(rng, 5.0, 20.0);
    grid.x_points = pick(rng, 101, 301);
    grid.t_min = uniform(rng, -15.0, -5.0);
    grid.t_max = uniform(rng, 1.0, 4.0);
    grid.t_points = pick(rng, 101, 301);
  }
  c.param("generator", g.name);
  c.param("grid", fmt(grid.x_max) + "/" + std::to_string(grid.x_points) + "/" + fmt(grid.t_min) + "/" +
                      fmt(grid.t_max) + "/" + std::to_string(grid.t_points));
  const auto report = check_generator(g, grid);
  for (const auto& e : report.entries) {
    c.value(e.name, e.worst);
    c.holds(e.name + "_passed", e.passed);
  }
}

void suite_variational_full(std::uint64_t seed, std::size_t, Checker& c) {
  std::mt19937_64 rng(seed);
  const std::size_t n = pick(rng, 2, 10);
  const auto space = OutcomeSpace::of_size(n);
  const Dist p = random_dist(space, rng(), 1e-3 / static_cast<double>(n));
  const Dist q = random_dist(space, rng(), 1e-3 / static_cast<double>(n));
  c.param("n", std::to_string(n));
  for (const auto& name : builtin_names()) {
    const auto g = builtin(name);
    const auto closed = df_closed(g, p, q).value;
    c.value(name + "_closed", closed.to_double());
    c.le("closed_negativity", -closed.to_double(), 1e-12);
    c.le("closed_identity", std::abs(df_closed(g, p, p).value.to_double()), 0.0);
    if (!closed.is_finite()) continue;
    const auto var = df_variational_full(g, p, q);
    c.value(name + "_variational", var.value.to_double());
    c.le("abs_difference", ext_diff(var.value, closed), 1e-6);
  }
}

void duality_checks(const DualityCase& dc, Checker& c, bool with_oracle) {
  const auto inst = make_duality_instance(dc);
  const auto g = builtin(dc.generator);
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, dc.radius);
  const auto gap = duality_gap(g, inst.p, inst.q, spec);
  c.value("primal", gap.primal.value.to_double());
  c.value("dual", gap.dual.value.to_double());
  c.param("primal_status", to_string(gap.primal.status));
  c.param("dual_status", to_string(gap.dual.status));
  c.le("relative_gap", gap.relative_gap.to_double(), 1e-3);
  c.le("iterate_violation", gap.iterate_violation, 1e-6);
  if (gap.dual.intermediate) c.holds("dual_support", absolutely_continuous(*gap.dual.intermediate, inst.q));
  if (with_oracle && dc.k <= 2) {
    const double res = 2.0 * dc.radius / (dc.k == 1 ? 4000.0 : 200.0);
    const auto bf = brute_force_primal(g, inst.p, inst.q, spec, res);
    c.value("brute_force", bf.value);
    c.value("brute_force_bound", bf.error_bound);
    c.le("brute_force_excess", std::abs(bf.value - gap.primal.value.to_double()) - bf.error_bound, 1e-6);
  }
}

void describe(const DualityCase& dc, Checker& c) {
  c.param("generator", dc.generator);
  c.param("radius", fmt(dc.radius));
  c.param("n", std::to_string(dc.n));
  c.param("k", std::to_string(dc.k));
  c.param("q_support", dc.partial_support ? "partial" : "full");
}

void suite_duality(std::uint64_t seed, std::size_t i, Checker& c) {
  const auto dc = duality_case(seed, i);
  describe(dc, c);
  duality_checks(dc, c, true);
}

void suite_sandwich(std::uint64_t seed, std::size_t i, Checker& c) {
  const auto dc = duality_case(seed, i);
  describe(dc, c);
  const auto inst = make_duality_instance(dc);
  const auto g = builtin(dc.generator);
  // D-bar by its sup definition: h is free on Q-null outcomes, so it is
  // infinite as soon as P escapes the support of Q.
  const ExtReal closed =
      absolutely_continuous(inst.p, inst.q) ? df_closed(g, inst.p, inst.q).value : ExtReal::pos_inf();
  const double tiny = restricted_div_primal(g, inst.p, inst.q,
                                            DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1e-9)).value.to_double();
  c.value("value_R_1e-9", tiny);
  c.le("zero_at_tiny_radius", std::abs(tiny), 1e-8);
  double prev = -kInf;
  for (double r : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, r);
    const double v = restricted_div_primal(g, inst.p, inst.q, spec).value.to_double();
    c.value("value_R_" + fmt(r), v);
    c.le("monotonicity_drop", prev - v, 1e-8);
    prev = v;
    const ExtReal bound = min(lambda_star_gap(IndicatorOf{spec}, inst.p, inst.q), closed);
    c.le("upper_bound_excess", v - bound.to_double(), 1e-8);
  }
}

void suite_moment_projection(std::uint64_t seed, std::size_t i, Checker& c) {
  std::mt19937_64 rng(seed);
  const auto kl = builtin("kl");
  const bool infeasible = i % 5 == 4;
  const std::size_t n = pick(rng, 4, 10);
  const std::size_t k = pick(rng, 1, 3);
  auto inst = random_instance(rng(), n, k);
  c.param("n", std::to_string(n));
  c.param("k", std::to_string(k));
  c.param("kind", infeasible ? "infeasible" : "feasible");
  if (infeasible) {
    // Q misses the last outcome, which the first feature singles out.
    std::vector<double> qw(inst.q.masses().begin(), inst.q.masses().end());
    qw.back() = 0.0;
    auto rows = inst.phi.rows();
    for (std::size_t x = 0; x < n; ++x) rows[0][x] = x + 1 == n ? 1.0 : 0.0;
    inst = RandomInstance{inst.p, make_dist(inst.q.space(), qw), FeatureMap(inst.q.space(), rows)};
  }
  const auto mp = moment_projection(kl, inst.p, inst.q, inst.phi);
  const auto pr = restricted_div_primal(kl, inst.p, inst.q,
                                        DiscriminatorSpec::linear_ball(inst.phi, 2.0, ExtReal::pos_inf()));
  c.value("projection", mp.value.to_double());
  c.value("primal", pr.value.to_double());
  c.param("projection_status", to_string(mp.status));
  c.param("primal_status", to_string(pr.status));
  if (infeasible) {
    c.holds("projection_infinite", mp.value.is_pos_inf());
    c.holds("primal_infinite", pr.value.is_pos_inf());
    return;
  }
  c.holds("projection_converged", mp.status == SolveStatus::Converged && mp.intermediate.has_value());
  if (mp.intermediate) c.le("moment_residual", inf_norm(mean_difference(*mp.intermediate, inst.p, inst.phi)), 1e-8);
  c.le("route_difference", ext_diff(mp.value, pr.value), 1e-5);
}

void suite_r_functional(std::uint64_t seed, std::size_t i, Checker& c) {
  std::mt19937_64 rng(seed);
  const auto& names = builtin_names();
  const auto g = builtin(names[i % names.size()]);
  const std::size_t n = pick(rng, 2, 10);
  const auto space = OutcomeSpace::of_size(n);
  const Dist q = random_dist(space, rng(), 1e-3 / static_cast<double>(n));
  const Dist p = random_dist(space, rng(), 1e-3 / static_cast<double>(n));
  std::normal_distribution<double> normal(0.0, 1.5);
  std::vector<double> h(n), h2(n), mid(n);
  for (std::size_t x = 0; x < n; ++x) {
    h[x] = normal(rng);
    h2[x] = h[x] + std::abs(normal(rng));
    mid[x] = 0.5 * (h[x] + h2[x]);
  }
  const double cst = uniform(rng, -3.0, 3.0);
  c.param("generator", g.name);
  c.param("n", std::to_string(n));

  const double rc = r_functional(g, q, std::vector<double>(n, cst)).value;
  c.le("constant_error", std::abs(rc - cst), 1e-9);

  const double r1 = r_functional(g, q, h).value, r2 = r_functional(g, q, h2).value;
  c.value("R_h", r1);
  c.le("monotonicity_violations", r1 > r2 + 1e-12 * std::max(1.0, std::abs(r2)) ? 1.0 : 0.0, 0.0);

  // Midpoint convexity on an independent pair.
  std::vector<double> u(n);
  for (double& v : u) v = normal(rng);
  for (std::size_t x = 0; x < n; ++x) mid[x] = 0.5 * (h[x] + u[x]);
  const double ru = r_functional(g, q, u).value;
  c.le("midpoint_convexity_deficit", r_functional(g, q, mid).value - 0.5 * (r1 + ru), 1e-9);

  // sup_b E_P[h] + b - E_Q[f*(h + b)] = E_P[h] - R(h), by direct 1-D search.
  const double ep = expectation(p, h);
  auto inner = [&](double b) {
    auto s = h;
    for (double& v : s) v += b;
    return ExtReal(ep + b) - conjugate_expectation(g, q, s);
  };
  const double hmax = *std::max_element(h.begin(), h.end());
  const double start = g.fstar_domain_upper.is_finite() ? g.fstar_domain_upper.value() - hmax - 1.0 : -hmax;
  const auto best = maximize_concave(inner, start, -1e4, 1e4, 1e-13);
  c.le("bridge_error", std::abs(best.value.to_double() - (ep - r1)), 1e-8);

  const auto kl = builtin("kl");
  const double closed = r_functional(kl, q, h, RMethod::Auto).value;
  const double numeric = r_functional(kl, q, h, RMethod::Numeric).value;
  c.value("kl_closed_form", closed);
  c.le("kl_closed_vs_numeric", std::abs(closed - numeric), 1e-7);
}

void suite_gmm_agreement(std::uint64_t seed, std::size_t, Checker& c) {
  std::mt19937_64 rng(seed);
  const std::size_t n = pick(rng, 3, 6);
  const std::size_t k = pick(rng, 1, 2);
  const auto inst = random_instance(rng(), n, k);
  c.param("n", std::to_string(n));
  c.param("k", std::to_string(k));
  FitProblem prob{FullSimplex{inst.p.space()}, inst.p, inst.phi, "kl", ExtReal::pos_inf()};
  EstimatorConfig cfg;
  cfg.seed = seed;
  const auto fg = fit_linear_fgan(prob, cfg);
  const double residual = std::sqrt([&] {
    double s = 0.0;
    for (double v : mean_difference(inst.p, fg.q_star, inst.phi)) s += v * v;
    return s;
  }());
  c.value("fgan_objective", fg.objective.to_double());
  c.param("fgan_status", to_string(fg.status));
  c.le("moment_residual", residual, 1e-4);
  const auto gm = fit_gmm(prob, cfg);
  c.le("gmm_objective", gm.objective.to_double(), 1e-8);
}

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> suites = {
      {"generators", suite_generators},
      {"variational_full", suite_variational_full},
      {"duality", suite_duality},
      {"moment_projection", suite_moment_projection},
      {"r_functional", suite_r_functional},
      {"gmm_agreement", suite_gmm_agreement},
      {"sandwich", suite_sandwich},
  };
  return suites;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DualityCase duality_case(std::uint64_t seed, std::size_t index) {
  static const double radii[] = {0.1, 1.0, 10.0};
  DualityCase c;
  c.seed = derive_seed(seed, index);
  std::mt19937_64 rng(c.seed);
  c.generator = kSmoothGenerators[index % kSmoothGenerators.size()];
  c.radius = radii[(index / kSmoothGenerators.size()) % 3];
  c.k = 1 + index % 3;
  c.n = std::max<std::size_t>(c.k + 2, pick(rng, 4, 12));
  c.partial_support = index % 5 == 2;
  return c;
}

RandomInstance make_duality_instance(const DualityCase& c) {
  auto inst = random_instance(c.seed, c.n, c.k);
  if (!c.partial_support) return inst;
  // Drop one or two outcomes from Q.
  std::mt19937_64 rng(c.seed ^ 0x5bd1e995ULL);
  std::vector<double> w(inst.q.masses().begin(), inst.q.masses().end());
  const std::size_t drops = 1 + rng() % 2;
  for (std::size_t d = 0; d < drops; ++d) w[rng() % c.n] = 0.0;
  return RandomInstance{inst.p, make_dist(inst.q.space(), w), inst.phi};
}

BruteForceResult brute_force_primal(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                    double resolution) {
  if (spec.is_full_space()) throw Error(ErrorCode::ValidationError, "brute_force_primal needs a linear ball");
  const auto& ball = spec.ball();
  const std::size_t k = ball.phi.num_features();
  if (k > 2) throw Error(ErrorCode::TooManyFeatures, "brute_force_primal supports at most 2 features");
  if (!ball.radius.is_finite()) throw Error(ErrorCode::ValidationError, "brute_force_primal needs a finite radius");
  if (!(resolution > 0.0)) throw Error(ErrorCode::ValidationError, "grid resolution must be positive");
  require_same_space(p.space(), q.space(), "brute_force_primal");

  const double radius = ball.radius.value();
  const auto m = static_cast<long>(std::ceil(radius / resolution));
  BruteForceResult out;
  out.value = -kInf;
  std::vector<double> a(k, 0.0);
  auto visit = [&] {
    const auto proj = project_to_ball(a, ball.p, ball.radius);
    const ExtReal v = linear_objective(g, p, q, spec, proj).value;
    ++out.grid_points;
    if (v.to_double() > out.value) {
      out.value = v.to_double();
      out.best_a = proj;
    }
  };
  for (long s = -m; s <= m; ++s) {
    a[0] = static_cast<double>(s) * resolution;
    if (k == 1) {
      visit();
      continue;
    }
    for (long t = -m; t <= m; ++t) {
      a[1] = static_cast<double>(t) * resolution;
      visit();
    }
  }
  if (k == 0) visit();
  const double lipschitz = 2.0 * ball.phi.max_column_norm();
  out.error_bound = lipschitz * resolution * std::sqrt(static_cast<double>(k)) / 2.0;
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, std::size_t count) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorCode::UnknownSuite, "unknown suite '" + name + "'");
  const SuiteFn& fn = it->second;

  SuiteResult result;
  result.suite = name;
  result.seed = seed;
  result.instance_count = count;
  result.records.resize(count);
  std::vector<std::map<std::string, double>> tolerances(count);
  std::vector<std::string> errors(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      auto& rec = result.records[i];
      rec.seed = derive_seed(seed, i);
      Checker c(rec, tolerances[i]);
      try {
        fn(rec.seed, i, c);
      } catch (const std::exception& e) {
        rec.passed = false;
        rec.violation = kInf;
        rec.failures.push_back(std::string("exception: ") + e.what());
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < count; ++i) {
    const auto& rec = result.records[i];
    if (rec.passed) ++result.pass_count;
    result.worst_violation = std::max(result.worst_violation, rec.violation);
    for (const auto& [key, v] : rec.checks) {
      auto [w, fresh] = result.worst.emplace(key, v);
      if (!fresh && !(w->second >= v)) w->second = v;
    }
    for (const auto& [key, t] : tolerances[i]) result.tolerances[key] = t;
  }
  return result;
}

}  // namespace rfgan
