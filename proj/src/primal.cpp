#include "rfgan/primal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "rfgan/error.hpp"

namespace rfgan {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NotConverged: return "not_converged";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Ascent problem on the coefficient vector: value/gradient oracle plus the
// feasible-set projection.
struct AscentProblem {
  std::function<LinearObjective(std::span<const double>)> evaluate;
  std::function<std::vector<double>(std::span<const double>)> project;
  bool unconstrained_ray_check = false;
  /// The objective has kinks; curvature estimates say nothing there.
  bool nonsmooth = false;
};

SolveReport projected_ascent(const AscentProblem& prob, std::size_t dim, const PrimalConfig& cfg) {
  SolveReport rep;
  std::vector<double> a = prob.project(std::vector<double>(dim, 0.0));
  LinearObjective cur = prob.evaluate(a);
  rep.trace.push_back(cur.value.to_double());
  double step = cfg.step_init;
  rep.status = SolveStatus::NotConverged;

  auto residual_at = [&](const std::vector<double>& x, const std::vector<double>& grad) {
    std::vector<double> y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] + grad[j];
    const auto py = prob.project(y);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += (py[j] - x[j]) * (py[j] - x[j]);
    return std::sqrt(s);
  };

  // Curvature along the last step; bounds the ascent still available.
  double curvature = 0.0;
  // Nonmonotone line search: compare against the worst of recent values.
  constexpr std::size_t kWindow = 10;
  std::deque<double> recent{cur.value.to_double()};
  std::vector<double> best_a = a;
  LinearObjective best = cur;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    rep.residual = residual_at(a, cur.gradient);
    if (rep.residual <= cfg.tol) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (!prob.nonsmooth && curvature > 0.0 && cur.value.is_finite()) {
      const double resolution =
          16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.value.value()));
      if (rep.residual * rep.residual / (2.0 * curvature) <= resolution) {
        rep.status = SolveStatus::Converged;
        break;
      }
    }
    if (prob.unconstrained_ray_check) {
      const double na = norm2(a);
      if (na > kRayThreshold && dot(cur.gradient, a) / na > 0.0) {
        rep.status = SolveStatus::Unbounded;
        rep.certificate = a;
        for (double& v : rep.certificate) v /= na;
        break;
      }
    }

    if (it > 0 && it % 50 == 0) {
      constexpr double h = 1e-6;
      double scale = 1.0;
      for (double gj : cur.gradient) scale = std::max(scale, std::abs(gj));
      for (std::size_t j = 0; j < dim; ++j) {
        auto up = a, down = a;
        up[j] += h;
        down[j] -= h;
        const double fd = (prob.evaluate(up).value.to_double() - prob.evaluate(down).value.to_double()) / (2.0 * h);
        rep.gradient_check = std::max(rep.gradient_check, std::abs(fd - cur.gradient[j]) / scale);
      }
    }

    // Backtracking: Armijo condition along the projection arc.
    double s = step;
    std::vector<double> next;
    LinearObjective cand;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      std::vector<double> y(dim);
      for (std::size_t j = 0; j < dim; ++j) y[j] = a[j] + s * cur.gradient[j];
      next = prob.project(y);
      cand = prob.evaluate(next);
      double lin = 0.0;
      for (std::size_t j = 0; j < dim; ++j) lin += cur.gradient[j] * (next[j] - a[j]);
      const double reference = *std::min_element(recent.begin(), recent.end());
      if (cand.value.is_finite() && cand.value.value() >= reference + 1e-4 * lin) {
        accepted = true;
        break;
      }
      // Near the optimum value changes drop below rounding; accept a step
      // that is flat to working precision but shrinks the residual.
      if (cand.value.is_finite() && cur.value.is_finite()) {
        const double cv = cur.value.value();
        const bool flat = cand.value.value() >= cv - 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cv));
        if (flat && residual_at(next, cand.gradient) < rep.residual) {
          accepted = true;
          break;
        }
      }
      s *= 0.5;
    }
    if (!accepted) break;  // stalled at rounding level; residual decides

    // Barzilai-Borwein guess for the next trial step.
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double da = next[j] - a[j];
      const double dg = cand.gradient[j] - cur.gradient[j];
      ss += da * da;
      sy += da * dg;
    }
    step = (sy < 0.0 && ss > 0.0) ? std::clamp(ss / -sy, 1e-10, 1e10) : std::min(2.0 * s, 1e10);
    if (sy < 0.0 && ss > 0.0) curvature = -sy / ss;
    a = std::move(next);
    cur = std::move(cand);
    rep.trace.push_back(cur.value.to_double());
    recent.push_back(cur.value.to_double());
    if (recent.size() > kWindow) recent.pop_front();
    if (cur.value > best.value) {
      best = cur;
      best_a = a;
    }
  }
  if (rep.status == SolveStatus::NotConverged && prob.nonsmooth && best.value.is_finite()) {
    // Projected subgradient steps with diminishing length for the rest of
    // the budget. Improves the value but cannot certify it.
    double radius = std::max(1.0, norm2(best_a));
    a = best_a;
    cur = best;
    for (int k = 0; it < cfg.max_iters; ++it, ++k) {
      const double gn = norm2(cur.gradient);
      if (gn == 0.0) break;
      std::vector<double> y(dim);
      for (std::size_t j = 0; j < dim; ++j) y[j] = a[j] + radius / std::sqrt(k + 1.0) * cur.gradient[j] / gn;
      a = prob.project(y);
      cur = prob.evaluate(a);
      rep.trace.push_back(cur.value.to_double());
      if (cur.value > best.value) {
        best = cur;
        best_a = a;
      }
    }
  }
  if (rep.status == SolveStatus::NotConverged) {
    if (best.value > cur.value) {
      a = best_a;
      cur = best;
    }
    rep.residual = residual_at(a, cur.gradient);
  }
  rep.iterations = it;
  rep.coefficients = a;
  rep.intercept = cur.b_star;
  rep.value = rep.status == SolveStatus::Unbounded ? ExtReal::pos_inf() : cur.value;
  rep.attained = rep.status == SolveStatus::Converged;
  return rep;
}

}  // namespace

ExtReal primal_objective(const FGenerator& g, const Dist& p, const Dist& q, std::span<const double> h) {
  return ExtReal(expectation(p, h)) - conjugate_expectation(g, q, h);
}

LinearObjective linear_objective(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                 std::span<const double> a, RMethod method) {
  const auto& ball = spec.ball();
  const auto m = feature_means(p, ball.phi);
  const auto h = ball.phi.combine(a);
  LinearObjective out;
  out.gradient = m;
  std::vector<double> weights(h.size());
  if (spec.has_intercept()) {
    const RValue r = r_functional(g, q, h, method);
    out.b_star = r.b_star;
    auto shifted = h;
    for (double& v : shifted) v += r.b_star;
    out.value = primal_objective(g, p, q, shifted);
    weights = r_functional_tilt(g, q, h, r.b_star);
  } else {
    out.value = primal_objective(g, p, q, h);
    for (std::size_t i = 0; i < h.size(); ++i) {
      const ExtReal d = q[i] > 0.0 ? g.fstar_prime(h[i]) : ExtReal(0.0);
      weights[i] = d.is_finite() ? q[i] * d.value() : 0.0;
    }
  }
  for (std::size_t j = 0; j < m.size(); ++j)
    for (std::size_t i = 0; i < h.size(); ++i) out.gradient[j] -= weights[i] * ball.phi(j, i);
  return out;
}

SolveReport restricted_div_primal(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                  const PrimalConfig& cfg) {
  require_same_space(p.space(), q.space(), "restricted_div_primal");
  if (spec.is_full_space()) {
    const auto dv = df_variational_full(g, p, q);
    SolveReport rep;
    rep.value = dv.value;
    rep.discriminator = dv.attained_h;
    rep.capped = dv.capped;
    rep.status = dv.value.is_pos_inf() ? SolveStatus::Unbounded : SolveStatus::Converged;
    rep.attained = !dv.capped;
    rep.trace.push_back(dv.value.to_double());
    return rep;
  }
  const auto& ball = spec.ball();
  require_same_space(p.space(), ball.phi.space(), "restricted_div_primal");
  if (ball.radius.is_finite() && !(ball.p == 1.0 || ball.p == 2.0 || std::isinf(ball.p)))
    throw Error(ErrorCode::UnsupportedNorm, "projected ascent supports p in {1, 2, inf}");

  AscentProblem prob;
  prob.evaluate = [&](std::span<const double> a) { return linear_objective(g, p, q, spec, a, cfg.r_method); };
  prob.project = [&](std::span<const double> a) { return project_to_ball(a, ball.p, ball.radius); };
  prob.unconstrained_ray_check = ball.radius.is_pos_inf();
  prob.nonsmooth = !g.strictly_convex;
  return projected_ascent(prob, ball.phi.num_features(), cfg);
}

SolveReport regularized_div_primal(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                                   const PrimalConfig& cfg) {
  if (const auto* ind = std::get_if<IndicatorOf>(&reg)) return restricted_div_primal(g, p, q, ind->spec, cfg);
  const auto& quad = std::get<QuadraticCoefficientPenalty>(reg);
  require_same_space(p.space(), q.space(), "regularized_div_primal");
  require_same_space(p.space(), quad.phi.space(), "regularized_div_primal");
  if (!(quad.weight > 0.0)) throw Error(ErrorCode::ValidationError, "penalty weight must be positive");
  const DiscriminatorSpec spec = DiscriminatorSpec::linear_ball(quad.phi, 2.0, ExtReal::pos_inf());

  AscentProblem prob;
  prob.evaluate = [&](std::span<const double> a) {
    auto obj = linear_objective(g, p, q, spec, a, cfg.r_method);
    obj.value = obj.value - ExtReal(quad.weight * dot(a, a));
    for (std::size_t j = 0; j < a.size(); ++j) obj.gradient[j] -= 2.0 * quad.weight * a[j];
    return obj;
  };
  prob.project = [](std::span<const double> a) { return std::vector<double>(a.begin(), a.end()); };
  prob.nonsmooth = !g.strictly_convex;
  return projected_ascent(prob, quad.phi.num_features(), cfg);
}

}  // namespace rfgan
