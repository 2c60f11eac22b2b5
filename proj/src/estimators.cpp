#include "rfgan/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "rfgan/discriminator.hpp"
#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/error.hpp"
#include "rfgan/primal.hpp"

namespace rfgan {

namespace {

std::vector<double> softmax(std::vector<double> z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : z) zmax = std::max(zmax, v);
  double s = 0.0;
  for (double& v : z) {
    v = std::isinf(v) ? 0.0 : std::exp(v - zmax);
    s += v;
  }
  for (double& v : z) v /= s;
  return z;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> mean_gap(const Dist& data, const Dist& q, const FeatureMap& phi) {
  auto m = feature_means(data, phi);
  const auto e = feature_means(q, phi);
  for (std::size_t j = 0; j < m.size(); ++j) m[j] -= e[j];
  return m;
}

const FeatureMap& require_phi(const FitProblem& prob, const char* who) {
  if (!prob.phi) throw Error(ErrorCode::ValidationError, std::string(who) + " needs discriminator features");
  require_same_space(prob.phi->space(), prob.data.space(), who);
  return *prob.phi;
}

struct Objective {
  std::function<double(const std::vector<double>&)> value;
  /// Known lower bound; reaching it within tol ends the descent.
  double lower_bound = -std::numeric_limits<double>::infinity();
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

// Gradient descent with Armijo backtracking and Barzilai-Borwein trial steps.
StartRecord descend(const Objective& obj, std::vector<double> theta, const EstimatorConfig& cfg, bool& hit_cap) {
  StartRecord rec;
  rec.theta0 = theta;
  double fx = obj.value(theta);
  auto grad = obj.gradient(theta);
  double step = 1.0;
  const std::size_t d = theta.size();
  hit_cap = true;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const double gn = norm2(grad);
    if (!(gn > cfg.tol * std::max(1.0, std::abs(fx))) || fx <= obj.lower_bound + cfg.value_tol) {
      hit_cap = false;
      break;
    }
    double s = step;
    std::vector<double> next(d);
    double fn = fx;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < d; ++j) next[j] = theta[j] - s * grad[j];
      fn = obj.value(next);
      if (std::isfinite(fn) && fn <= fx - 1e-4 * s * gn * gn) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      hit_cap = false;  // no decrease left at working precision
      break;
    }
    auto gnext = obj.gradient(next);
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dt = next[j] - theta[j];
      ss += dt * dt;
      sy += dt * (gnext[j] - grad[j]);
    }
    step = (sy > 0.0) ? std::clamp(ss / sy, 1e-8, 1e8) : std::min(2.0 * s, 1e8);
    theta = std::move(next);
    grad = std::move(gnext);
    fx = fn;
  }
  rec.theta = theta;
  rec.value = fx;
  rec.iterations = it;
  return rec;
}

std::vector<std::vector<double>> start_points(std::size_t dim, const EstimatorConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> starts;
  starts.emplace_back(dim, 0.0);
  for (int s = 1; s < std::max(1, cfg.starts); ++s) {
    std::vector<double> t(dim);
    for (double& v : t) v = normal(rng);
    starts.push_back(std::move(t));
  }
  return starts;
}

// `fallback` is tried only when every regular start has an infinite value.
FitReport multistart(const std::string& name, const FitProblem& prob, const Objective& obj,
                     const EstimatorConfig& cfg, const std::function<std::vector<double>()>& fallback = {}) {
  FitReport rep{name, prob.data, {}, ExtReal(0.0), {}, SolveStatus::Converged, 0, {}, {}};
  auto run = [&](const std::vector<double>& s0) {
    bool cap = false;
    rep.starts.push_back(descend(obj, s0, cfg, cap));
    rep.starts.back().capped = cap;
    rep.iterations += rep.starts.back().iterations;
  };
  for (const auto& s0 : start_points(prob.family.num_params(), cfg)) run(s0);
  if (fallback && std::none_of(rep.starts.begin(), rep.starts.end(),
                               [](const StartRecord& r) { return std::isfinite(r.value); })) {
    run(fallback());
    rep.notes.push_back("every start had an infinite objective; added a start at the MLE fit");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rep.starts.size(); ++i) {
    const double a = rep.starts[i].value, b = rep.starts[best].value;
    const double band = 1e-12 * std::max(1.0, std::abs(b));
    if (a < b - band || (std::abs(a - b) <= band && rep.starts[i].theta < rep.starts[best].theta)) best = i;
  }
  const auto& win = rep.starts[best];
  rep.theta = win.theta;
  rep.q_star = prob.family.member(win.theta);
  std::size_t ties = 0;
  for (const auto& r : rep.starts) {
    if (std::abs(r.value - win.value) <= 1e-12 * std::max(1.0, std::abs(win.value)) &&
        total_variation(prob.family.member(r.theta), rep.q_star) > 1e-6)
      ++ties;
  }
  if (ties > 0)
    rep.notes.push_back("several distinct minimizers reach the same value; the lexicographically smallest theta is reported");
  const auto masses = rep.q_star.masses();
  if (std::any_of(masses.begin(), masses.end(), [](double m) { return m > 0.0 && m < 1e-6; }))
    rep.notes.push_back("the fitted model puts mass below 1e-6 on some outcome; the optimum is approached at the boundary "
                        "of the family and the reported parameter is where the descent stopped");
  if (win.capped) {
    rep.status = SolveStatus::NotConverged;
    rep.notes.push_back("iteration cap reached by the best start");
  } else if (std::any_of(rep.starts.begin(), rep.starts.end(), [](const StartRecord& r) { return r.capped; })) {
    rep.notes.push_back("iteration cap reached by a start that did not win");
  }
  return rep;
}

}  // namespace

GeneratorFamily::GeneratorFamily(FullSimplex f) : variant_(std::move(f)) {}

GeneratorFamily::GeneratorFamily(ExpFamily f) : variant_(std::move(f)) {
  const auto& e = std::get<ExpFamily>(variant_);
  require_same_space(e.base.space(), e.psi.space(), "ExpFamily");
}

const OutcomeSpace& GeneratorFamily::space() const {
  if (const auto* s = std::get_if<FullSimplex>(&variant_)) return s->space;
  return std::get<ExpFamily>(variant_).base.space();
}

std::size_t GeneratorFamily::num_params() const {
  if (const auto* s = std::get_if<FullSimplex>(&variant_)) return s->space.size();
  return std::get<ExpFamily>(variant_).psi.num_features();
}

Dist GeneratorFamily::member(std::span<const double> theta) const {
  if (theta.size() != num_params()) throw Error(ErrorCode::DimensionMismatch, "parameter length does not match family");
  if (const auto* s = std::get_if<FullSimplex>(&variant_))
    return Dist(s->space, softmax(std::vector<double>(theta.begin(), theta.end())));
  const auto& e = std::get<ExpFamily>(variant_);
  std::vector<double> z(e.base.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (e.base[i] <= 0.0) {
      z[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    z[i] = std::log(e.base[i]);
    for (std::size_t j = 0; j < theta.size(); ++j) z[i] += theta[j] * e.psi(j, i);
  }
  return Dist(e.base.space(), softmax(std::move(z)));
}

std::vector<std::vector<double>> GeneratorFamily::jacobian(std::span<const double> theta) const {
  const Dist q = member(theta);
  const std::size_t n = q.size(), m = num_params();
  std::vector<std::vector<double>> jac(n, std::vector<double>(m, 0.0));
  if (is_full_simplex()) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) jac[i][j] = q[i] * ((i == j ? 1.0 : 0.0) - q[j]);
    return jac;
  }
  const auto& psi = exp_family().psi;
  const auto mean = feature_means(q, psi);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) jac[i][j] = q[i] * (psi(j, i) - mean[j]);
  return jac;
}

CrossTable evaluate_criteria(const FitProblem& prob, const Dist& q, double inner_tol) {
  CrossTable t;
  t.mle = df_closed(builtin("kl"), prob.data, q).value;
  if (prob.phi) {
    t.gmm = norm2(mean_gap(prob.data, q, *prob.phi));
    PrimalConfig pc;
    pc.tol = inner_tol;
    const auto spec = DiscriminatorSpec::linear_ball(*prob.phi, 2.0, prob.radius);
    t.fgan = restricted_div_primal(builtin(prob.generator), prob.data, q, spec, pc).value;
  }
  return t;
}

FitReport fit_mle(const FitProblem& prob, const EstimatorConfig& cfg) {
  require_same_space(prob.family.space(), prob.data.space(), "fit_mle");
  FitReport rep{"mle", prob.data, {}, ExtReal(0.0), {}, SolveStatus::Converged, 0, {}, {}};
  if (!prob.family.is_full_simplex()) {
    const auto& e = prob.family.exp_family();
    if (!absolutely_continuous(prob.data, e.base))
      throw Error(ErrorCode::SupportViolation, "data puts mass outside the support of the family base");
    DualConfig dc;
    dc.seed = cfg.seed;
    const auto mp = moment_projection_to(builtin("kl"), feature_means(prob.data, e.psi), e.base, e.psi, dc);
    rep.theta = mp.theta;
    rep.q_star = prob.family.member(rep.theta);
    rep.iterations = mp.iterations;
    if (mp.status != SolveStatus::Converged) {
      rep.status = SolveStatus::NotConverged;
      rep.notes.push_back("psi-moments of the data are not matched by any finite parameter");
    }
  }
  rep.objective = df_closed(builtin("kl"), prob.data, rep.q_star).value;
  rep.cross = evaluate_criteria(prob, rep.q_star, cfg.inner_tol);
  return rep;
}

FitReport fit_gmm(const FitProblem& prob, const EstimatorConfig& cfg) {
  require_same_space(prob.family.space(), prob.data.space(), "fit_gmm");
  const FeatureMap& phi = require_phi(prob, "fit_gmm");
  const auto m = feature_means(prob.data, phi);
  FitReport rep{"gmm", prob.data, {}, ExtReal(0.0), {}, SolveStatus::Converged, 0, {}, {}};
  if (prob.family.is_full_simplex()) {
    const Dist uniform = make_dist(prob.data.space(), std::vector<double>(prob.data.size(), 1.0));
    const auto mp = moment_projection_to(builtin("kl"), m, uniform, phi);
    rep.iterations = mp.iterations;
    if (mp.status == SolveStatus::Converged && mp.intermediate) {
      rep.q_star = *mp.intermediate;
    } else {
      rep.notes.push_back("moment-matching set has no interior tilt of uniform; the data distribution is reported");
    }
  } else {
    Objective obj;
    obj.value = [&](const std::vector<double>& th) {
      const auto gap = mean_gap(prob.data, prob.family.member(th), phi);
      double s = 0.0;
      for (double v : gap) s += v * v;
      return 0.5 * s;
    };
    obj.lower_bound = 0.0;
    obj.gradient = [&](const std::vector<double>& th) {
      const auto gap = mean_gap(prob.data, prob.family.member(th), phi);
      const auto jac = prob.family.jacobian(th);
      std::vector<double> g(th.size(), 0.0);
      for (std::size_t i = 0; i < jac.size(); ++i) {
        double w = 0.0;
        for (std::size_t k = 0; k < gap.size(); ++k) w += gap[k] * phi(k, i);
        for (std::size_t j = 0; j < th.size(); ++j) g[j] -= w * jac[i][j];
      }
      return g;
    };
    rep = multistart("gmm", prob, obj, cfg);
  }
  rep.objective = norm2(mean_gap(prob.data, rep.q_star, phi));
  rep.cross = evaluate_criteria(prob, rep.q_star, cfg.inner_tol);
  return rep;
}

FitReport fit_linear_fgan(const FitProblem& prob, const EstimatorConfig& cfg) {
  require_same_space(prob.family.space(), prob.data.space(), "fit_linear_fgan");
  const FeatureMap& phi = require_phi(prob, "fit_linear_fgan");
  const FGenerator g = builtin(prob.generator);
  const auto spec = DiscriminatorSpec::linear_ball(phi, 2.0, prob.radius);
  PrimalConfig pc;
  pc.tol = cfg.inner_tol;
  pc.seed = cfg.seed;

  auto solve = [&](const std::vector<double>& th) {
    return restricted_div_primal(g, prob.data, prob.family.member(th), spec, pc);
  };
  Objective obj;
  obj.value = [&](const std::vector<double>& th) { return solve(th).value.to_double(); };
  obj.lower_bound = 0.0;  // h = 0 is always admissible
  if (cfg.envelope_gradient) {
    obj.gradient = [&](const std::vector<double>& th) {
      const auto rep = solve(th);
      const auto h = phi.combine(rep.coefficients, rep.intercept);
      const auto jac = prob.family.jacobian(th);
      std::vector<double> grad(th.size(), 0.0);
      for (std::size_t i = 0; i < h.size(); ++i) {
        const ExtReal fs = g.fstar(h[i]);
        if (!fs.is_finite()) continue;
        for (std::size_t j = 0; j < th.size(); ++j) grad[j] -= fs.value() * jac[i][j];
      }
      return grad;
    };
  } else {
    obj.gradient = [&](const std::vector<double>& th) {
      std::vector<double> grad(th.size());
      for (std::size_t j = 0; j < th.size(); ++j) {
        auto up = th, down = th;
        up[j] += cfg.fd_step;
        down[j] -= cfg.fd_step;
        grad[j] = (obj.value(up) - obj.value(down)) / (2.0 * cfg.fd_step);
      }
      return grad;
    };
  }
  auto mle_start = [&] {
    if (prob.family.is_full_simplex()) {
      // Logits of the data, with empty outcomes pushed far down.
      std::vector<double> th(prob.data.size());
      for (std::size_t i = 0; i < th.size(); ++i) th[i] = prob.data[i] > 0.0 ? std::log(prob.data[i]) : -50.0;
      return th;
    }
    try {
      auto th = fit_mle(prob, cfg).theta;
      if (th.size() == prob.family.num_params()) return th;
    } catch (const Error&) {
    }
    return std::vector<double>(prob.family.num_params(), 0.0);
  };
  FitReport rep = multistart("fgan", prob, obj, cfg, mle_start);
  const auto final_solve = solve(rep.theta);
  rep.objective = final_solve.value;
  if (final_solve.status != SolveStatus::Converged) {
    rep.status = SolveStatus::NotConverged;
    rep.notes.push_back(std::string("inner solve at the optimum: ") + to_string(final_solve.status));
  }
  rep.cross = evaluate_criteria(prob, rep.q_star, cfg.inner_tol);
  return rep;
}

FitReport fit(const std::string& estimator, const FitProblem& prob, const EstimatorConfig& cfg) {
  if (estimator == "mle") return fit_mle(prob, cfg);
  if (estimator == "gmm") return fit_gmm(prob, cfg);
  if (estimator == "fgan") return fit_linear_fgan(prob, cfg);
  throw Error(ErrorCode::ValidationError, "unknown estimator '" + estimator + "' (expected mle, gmm or fgan)");
}

}  // namespace rfgan
