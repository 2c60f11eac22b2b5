#include "rfgan/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfgan/divergence.hpp"
#include "rfgan/error.hpp"
#include "simplex_newton.hpp"

namespace rfgan {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// lambda* as a function of the mean gap v = E_P[phi] - E_P'[phi], with an
// optional smoothing level for the nonsmooth norms.
struct Penalty {
  enum class Kind { L2, L1, LInf, Quadratic } kind = Kind::L2;
  double scale = 1.0;  // R for norms, 1/(4w) for the quadratic

  double value(const VectorXd& v, double eps) const {
    switch (kind) {
      case Kind::L2:
        return scale * (eps > 0.0 ? std::sqrt(v.squaredNorm() + eps * eps) - eps : v.norm());
      case Kind::L1: {
        if (eps <= 0.0) return scale * v.lpNorm<1>();
        return scale * ((v.array().square() + eps * eps).sqrt() - eps).sum();
      }
      case Kind::LInf: {
        if (eps <= 0.0) return scale * v.lpNorm<Eigen::Infinity>();
        // eps * log sum_l exp(z_l / eps) over z = (v, -v), shifted to stay below the max.
        const double zmax = v.cwiseAbs().maxCoeff();
        const double s = ((v.array() - zmax) / eps).exp().sum() + ((-v.array() - zmax) / eps).exp().sum();
        return scale * (zmax + eps * std::log(s) - eps * std::log(2.0 * static_cast<double>(v.size())));
      }
      case Kind::Quadratic:
        return scale * v.squaredNorm();
    }
    return 0.0;
  }

  // Gradient and Hessian with respect to v.
  void derivatives(const VectorXd& v, double eps, VectorXd& grad, MatrixXd& hess) const {
    const Eigen::Index k = v.size();
    grad.resize(k);
    hess.setZero(k, k);
    switch (kind) {
      case Kind::L2: {
        const double s = std::sqrt(v.squaredNorm() + eps * eps);
        if (s == 0.0) { grad.setZero(); return; }
        grad = scale * v / s;
        hess = scale * (MatrixXd::Identity(k, k) / s - v * v.transpose() / (s * s * s));
        return;
      }
      case Kind::L1: {
        for (Eigen::Index j = 0; j < k; ++j) {
          const double s = std::sqrt(v(j) * v(j) + eps * eps);
          grad(j) = s == 0.0 ? 0.0 : scale * v(j) / s;
          hess(j, j) = s == 0.0 ? 0.0 : scale * eps * eps / (s * s * s);
        }
        return;
      }
      case Kind::LInf: {
        if (eps <= 0.0) {
          Eigen::Index j;
          v.cwiseAbs().maxCoeff(&j);
          grad.setZero();
          grad(j) = scale * (v(j) >= 0.0 ? 1.0 : -1.0);
          return;
        }
        const double zmax = v.cwiseAbs().maxCoeff();
        const VectorXd wp = ((v.array() - zmax) / eps).exp();
        const VectorXd wm = ((-v.array() - zmax) / eps).exp();
        const double total = wp.sum() + wm.sum();
        const VectorXd pi_p = wp / total, pi_m = wm / total;
        const VectorXd mean = pi_p - pi_m;
        grad = scale * mean;
        hess = (scale / eps) * (MatrixXd((pi_p + pi_m).asDiagonal()) - mean * mean.transpose());
        return;
      }
      case Kind::Quadratic:
        grad = 2.0 * scale * v;
        hess = 2.0 * scale * MatrixXd::Identity(k, k);
        return;
    }
  }
};

// Dual objective in the coordinates of support(Q).
struct ReducedDual {
  const FGenerator& g;
  std::vector<std::size_t> support;
  VectorXd q;        // Q on the support
  MatrixXd phi;      // k x s
  VectorXd target;   // E_P[phi]
  Penalty penalty;
  // total_variation has a kink at 1; smooth it as (sqrt((x-1)^2 + eps^2) - eps) / 2.
  bool kinked = false;

  VectorXd gap(const VectorXd& p) const { return target - phi * p; }

  double divergence(const VectorXd& p, double eps = 0.0) const {
    ExtReal s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double x = p(i) / q(i);
      s += kinked && eps > 0.0 ? ExtReal(q(i) * 0.5 * (std::hypot(x - 1.0, eps) - eps)) : q(i) * g.f(x);
    }
    return s.to_double();
  }

  double value(const VectorXd& p, double eps) const { return penalty.value(gap(p), eps) + divergence(p, eps); }

  // f' and f'' at x, smoothed for the kinked generator.
  std::pair<double, double> fderiv(double x, double eps) const {
    if (kinked && eps > 0.0) {
      const double r = std::hypot(x - 1.0, eps);
      return {0.5 * (x - 1.0) / r, 0.5 * eps * eps / (r * r * r)};
    }
    return {g.fprime(x), g.fsecond(x)};
  }

  VectorXd gradient(const VectorXd& p, double eps) const {
    VectorXd gv;
    MatrixXd hv;
    penalty.derivatives(gap(p), eps, gv, hv);
    VectorXd grad = -phi.transpose() * gv;
    for (Eigen::Index i = 0; i < p.size(); ++i) grad(i) += fderiv(std::max(p(i), 1e-300) / q(i), eps).first;
    return grad;
  }

  void derivatives(const VectorXd& p, double eps, VectorXd& grad, MatrixXd& hess) const {
    VectorXd gv;
    MatrixXd hv;
    penalty.derivatives(gap(p), eps, gv, hv);
    grad = -phi.transpose() * gv;
    hess = phi.transpose() * hv * phi;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const auto [d1, d2] = fderiv(std::max(p(i), 1e-300) / q(i), eps);
      grad(i) += d1;
      hess(i, i) += d2 / q(i);
    }
  }
};

ReducedDual reduce(const FGenerator& g, std::span<const double> target, const Dist& q, const FeatureMap& phi,
                   Penalty penalty) {
  ReducedDual red{g, q.support(), {}, {}, {}, penalty, !g.strictly_convex};
  if (red.support.empty()) throw Error(ErrorCode::EmptyFeasible, "Q has empty support");
  const auto s = static_cast<Eigen::Index>(red.support.size());
  const auto k = static_cast<Eigen::Index>(phi.num_features());
  red.q.resize(s);
  red.phi.resize(k, s);
  for (Eigen::Index c = 0; c < s; ++c) {
    const std::size_t i = red.support[static_cast<std::size_t>(c)];
    red.q(c) = q[i];
    for (Eigen::Index j = 0; j < k; ++j) red.phi(j, c) = phi(static_cast<std::size_t>(j), i);
  }
  red.target = Eigen::Map<const VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
  return red;
}

Dist expand(const ReducedDual& red, const VectorXd& p, const Dist& q) {
  std::vector<double> full(q.size(), 0.0);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) sum += std::max(p(c), 0.0);
  for (Eigen::Index c = 0; c < p.size(); ++c)
    full[red.support[static_cast<std::size_t>(c)]] = std::max(p(c), 0.0) / sum;
  return Dist(q.space(), std::move(full));
}

SolveReport solve_penalized_dual(const ReducedDual& red, const Dist& q, const DualConfig& cfg) {
  SolveReport rep;
  const Eigen::Index s = red.q.size();
  VectorXd p = red.q / red.q.sum();
  VectorXd best = p;
  double best_value = red.value(p, 0.0);
  rep.trace.push_back(best_value);

  // Entropic mirror descent.
  VectorXd logp(s);
  int it = 1;
  for (; it <= cfg.max_iters && s > 1; ++it) {
    const VectorXd grad = red.gradient(p, cfg.smoothing_eps);
    if (!grad.allFinite()) break;
    const double eta = cfg.step0 / std::sqrt(static_cast<double>(it));
    logp = p.array().max(1e-300).log().matrix() - eta * grad;
    logp.array() -= logp.maxCoeff();
    p = logp.array().exp().matrix();
    p /= p.sum();
    const double v = red.value(p, 0.0);
    rep.trace.push_back(v);
    if (v < best_value) {
      best_value = v;
      best = p;
    }
  }
  rep.iterations = it - 1;

  if (s > 1) {
    detail::SimplexObjective obj;
    obj.value = [&](const VectorXd& x, double eps) { return red.value(x, eps); };
    obj.derivatives = [&](const VectorXd& x, double eps, VectorXd& grad, MatrixXd& hess) {
      red.derivatives(x, eps, grad, hess);
    };
    detail::BarrierNewtonOptions opt;
    opt.decrement_tol = cfg.tol;
    opt.on_iterate = [&](const VectorXd& x) {
      const double v = red.value(x, 0.0);
      rep.trace.push_back(v);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    };
    const VectorXd start = 0.999999 * best + 1e-6 * red.q;
    const auto res = detail::barrier_newton(obj, start, opt);
    rep.iterations += res.steps;
    rep.residual = res.last_decrement;
  }

  rep.intermediate = expand(red, best, q);
  rep.value = ExtReal::from_double(best_value);
  return rep;
}

Penalty make_penalty(const RegularizerSpec& reg) {
  if (const auto* quad = std::get_if<QuadraticCoefficientPenalty>(&reg)) {
    if (!(quad->weight > 0.0)) throw Error(ErrorCode::ValidationError, "penalty weight must be positive");
    return {Penalty::Kind::Quadratic, 1.0 / (4.0 * quad->weight)};
  }
  const auto& ball = std::get<IndicatorOf>(reg).spec.ball();
  const double dual_p = dual_exponent(ball.p);
  Penalty pen;
  pen.scale = ball.radius.value();
  if (dual_p == 2.0) pen.kind = Penalty::Kind::L2;
  else if (dual_p == 1.0) pen.kind = Penalty::Kind::L1;
  else if (std::isinf(dual_p)) pen.kind = Penalty::Kind::LInf;
  else throw Error(ErrorCode::UnsupportedNorm, "dual solver supports p in {1, 2, inf}");
  return pen;
}

const FeatureMap& penalty_features(const RegularizerSpec& reg) {
  if (const auto* quad = std::get_if<QuadraticCoefficientPenalty>(&reg)) return quad->phi;
  return std::get<IndicatorOf>(reg).spec.ball().phi;
}

SolveReport kl_tilt(std::span<const double> target, const Dist& q, const FeatureMap& phi, const DualConfig& cfg) {
  const auto support = q.support();
  if (support.empty()) throw Error(ErrorCode::EmptyFeasible, "Q has empty support");
  const auto s = static_cast<Eigen::Index>(support.size());
  const auto k = static_cast<Eigen::Index>(phi.num_features());
  MatrixXd F(k, s);
  VectorXd logq(s);
  for (Eigen::Index c = 0; c < s; ++c) {
    const std::size_t i = support[static_cast<std::size_t>(c)];
    logq(c) = std::log(q[i]);
    for (Eigen::Index j = 0; j < k; ++j) F(j, c) = phi(static_cast<std::size_t>(j), i);
  }
  const VectorXd m = Eigen::Map<const VectorXd>(target.data(), k);

  struct State {
    double log_partition;
    VectorXd weights;  // tilted distribution on the support
  };
  auto state = [&](const VectorXd& theta) {
    VectorXd z = logq + F.transpose() * theta;
    const double zmax = z.maxCoeff();
    VectorXd w = (z.array() - zmax).exp();
    const double sum = w.sum();
    return State{zmax + std::log(sum), w / sum};
  };

  SolveReport rep;
  VectorXd theta = VectorXd::Zero(k);
  State st = state(theta);
  double obj = st.log_partition - theta.dot(m);
  VectorXd grad = F * st.weights - m;
  rep.status = SolveStatus::NotConverged;
  const int max_newton = std::max(200, cfg.max_iters / 10);
  int it = 0;
  for (; it < max_newton; ++it) {
    rep.trace.push_back(-obj);
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-13) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (theta.norm() > kRayThreshold) {
      rep.status = SolveStatus::Infeasible;
      break;
    }
    const VectorXd centered_w = st.weights;
    const VectorXd mean = F * centered_w;
    MatrixXd cov = F * centered_w.asDiagonal() * F.transpose() - mean * mean.transpose();
    cov.diagonal().array() += 1e-12;
    const VectorXd d = -cov.ldlt().solve(grad);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const VectorXd cand = theta + step * d;
      const State cs = state(cand);
      const double cobj = cs.log_partition - cand.dot(m);
      const double flat = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(obj));
      if (cobj < obj || (cobj <= obj + flat && (F * cs.weights - m).squaredNorm() < grad.squaredNorm())) {
        theta = cand;
        st = cs;
        obj = cobj;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    grad = F * st.weights - m;
    if (!moved) {
      // Stalled at rounding level.
      if (grad.lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, m.lpNorm<Eigen::Infinity>()))
        rep.status = SolveStatus::Converged;
      break;
    }
  }
  rep.iterations = it;
  rep.residual = grad.lpNorm<Eigen::Infinity>();
  rep.theta.assign(theta.data(), theta.data() + k);
  if (rep.status == SolveStatus::Infeasible || (rep.residual > 1e-8 && theta.norm() > kRayThreshold)) {
    rep.status = SolveStatus::Infeasible;
    rep.value = ExtReal::pos_inf();
    rep.attained = false;
    const double nt = theta.norm();
    rep.certificate.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) rep.certificate[static_cast<std::size_t>(j)] = theta(j) / nt;
    return rep;
  }
  std::vector<double> full(q.size(), 0.0);
  for (Eigen::Index c = 0; c < s; ++c) full[support[static_cast<std::size_t>(c)]] = st.weights(c);
  rep.intermediate = Dist(q.space(), std::move(full));
  rep.value = -obj;  // theta . m - A(theta)
  rep.attained = rep.status == SolveStatus::Converged;
  return rep;
}

SolveReport augmented_lagrangian(const FGenerator& g, std::span<const double> target, const Dist& q,
                                 const FeatureMap& phi, const DualConfig& cfg) {
  ReducedDual red = reduce(g, target, q, phi, Penalty{Penalty::Kind::Quadratic, 0.0});
  const Eigen::Index k = red.target.size();
  VectorXd y = VectorXd::Zero(k);
  double rho = 1.0;
  VectorXd p = red.q;
  SolveReport rep;
  rep.status = SolveStatus::NotConverged;
  double prev_residual = std::numeric_limits<double>::infinity();
  double residual = prev_residual;
  int outer = 0;
  for (; outer < 200; ++outer) {
    // L(p) = D_f(p || q) - y . gap + rho/2 ||gap||^2 with gap = target - phi p.
    detail::SimplexObjective obj;
    obj.value = [&](const VectorXd& x, double) {
      const VectorXd v = red.gap(x);
      return red.divergence(x) - y.dot(v) + 0.5 * rho * v.squaredNorm();
    };
    obj.derivatives = [&](const VectorXd& x, double, VectorXd& grad, MatrixXd& hess) {
      const VectorXd v = red.gap(x);
      grad = red.phi.transpose() * (y - rho * v);
      hess = rho * red.phi.transpose() * red.phi;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = std::max(x(i), 1e-300) / red.q(i);
        grad(i) += g.fprime(r);
        hess(i, i) += g.fsecond(r) / red.q(i);
      }
    };
    detail::BarrierNewtonOptions opt;
    opt.schedule = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
    opt.decrement_tol = cfg.tol;
    const auto res = detail::barrier_newton(obj, 0.999999 * p + 1e-6 * red.q, opt);
    p = res.p;
    rep.iterations += res.steps;
    const VectorXd v = red.gap(p);
    residual = v.lpNorm<Eigen::Infinity>();
    rep.trace.push_back(red.divergence(p));
    if (residual < 1e-10) {
      rep.status = SolveStatus::Converged;
      break;
    }
    y -= rho * v;
    if (residual > 0.25 * prev_residual) rho *= 2.0;
    prev_residual = residual;
    if (rho > 1e12 || y.norm() > 1e8) {
      rep.status = SolveStatus::Infeasible;
      break;
    }
  }
  rep.residual = residual;
  // The multiplier of the moment constraint is minus the primal coefficient vector.
  const VectorXd a = -y;
  rep.theta.assign(a.data(), a.data() + k);
  if (rep.status == SolveStatus::Infeasible) {
    rep.value = ExtReal::pos_inf();
    rep.attained = false;
    const double na = a.norm();
    for (Eigen::Index j = 0; j < k; ++j) rep.certificate.push_back(na > 0.0 ? a(j) / na : 0.0);
    return rep;
  }
  rep.intermediate = expand(red, p, q);
  rep.value = ExtReal::from_double(red.divergence(p));
  rep.attained = rep.status == SolveStatus::Converged;
  return rep;
}

void attach_gap(SolveReport& rep, const DualConfig& cfg) {
  if (!cfg.primal_value) return;
  if (rep.value.is_finite()) rep.certified_gap = rep.value.value() - *cfg.primal_value;
  else if (std::isinf(*cfg.primal_value)) rep.certified_gap = 0.0;
}

}  // namespace

ExtReal dual_objective(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                       const Dist& p_prime) {
  return lambda_star_gap(reg, p, p_prime) + df_closed(g, p_prime, q).value;
}

SolveReport moment_projection_to(const FGenerator& g, std::span<const double> target, const Dist& q,
                                 const FeatureMap& phi, const DualConfig& cfg) {
  require_same_space(q.space(), phi.space(), "moment_projection");
  if (target.size() != phi.num_features())
    throw Error(ErrorCode::DimensionMismatch, "moment_projection: target length does not match features");
  SolveReport rep = g.name == "kl" ? kl_tilt(target, q, phi, cfg) : augmented_lagrangian(g, target, q, phi, cfg);
  attach_gap(rep, cfg);
  return rep;
}

SolveReport moment_projection(const FGenerator& g, const Dist& p, const Dist& q, const FeatureMap& phi,
                              const DualConfig& cfg) {
  require_same_space(p.space(), q.space(), "moment_projection");
  const auto m = feature_means(p, phi);
  return moment_projection_to(g, m, q, phi, cfg);
}

SolveReport restricted_div_dual(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                                const DualConfig& cfg) {
  require_same_space(p.space(), q.space(), "restricted_div_dual");
  if (cfg.smoothing_eps < 0.0 || cfg.smoothing_eps > 1e-3)
    throw Error(ErrorCode::ValidationError, "smoothing_eps must lie in [0, 1e-3]");
  if (q.support().empty()) throw Error(ErrorCode::EmptyFeasible, "Q has empty support");

  if (const auto* ind = std::get_if<IndicatorOf>(&reg)) {
    const auto& spec = ind->spec;
    if (!spec.has_intercept()) {
      SolveReport rep;
      rep.status = SolveStatus::NotApplicable;
      rep.value = ExtReal::pos_inf();
      rep.attained = false;
      return rep;
    }
    if (spec.is_full_space()) {
      // lambda* forces P' = P.
      SolveReport rep;
      if (absolutely_continuous(p, q)) {
        rep.value = df_closed(g, p, q).value;
        rep.intermediate = p;
      } else {
        rep.value = ExtReal::pos_inf();
        rep.status = SolveStatus::Infeasible;
        rep.attained = false;
      }
      rep.trace.push_back(rep.value.to_double());
      attach_gap(rep, cfg);
      return rep;
    }
    if (spec.ball().radius.is_pos_inf()) return moment_projection(g, p, q, spec.ball().phi, cfg);
  }

  const FeatureMap& phi = penalty_features(reg);
  require_same_space(p.space(), phi.space(), "restricted_div_dual");
  const auto target = feature_means(p, phi);
  const ReducedDual red = reduce(g, target, q, phi, make_penalty(reg));
  SolveReport rep = solve_penalized_dual(red, q, cfg);
  // Report the exact objective at the returned P'.
  rep.value = dual_objective(g, p, q, reg, *rep.intermediate);
  attach_gap(rep, cfg);
  return rep;
}

SolveReport restricted_div_dual(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                                const DualConfig& cfg) {
  return restricted_div_dual(g, p, q, RegularizerSpec{IndicatorOf{spec}}, cfg);
}

GapReport duality_gap(const FGenerator& g, const Dist& p, const Dist& q, const RegularizerSpec& reg,
                      const PrimalConfig& primal_cfg, const DualConfig& dual_cfg) {
  GapReport out;
  if (const auto* ind = std::get_if<IndicatorOf>(&reg); ind && !ind->spec.has_intercept()) {
    out.applicable = false;
    out.primal.status = SolveStatus::NotApplicable;
    out.dual.status = SolveStatus::NotApplicable;
    out.absolute_gap = 0.0;
    out.relative_gap = 0.0;
    return out;
  }
  out.primal = regularized_div_primal(g, p, q, reg, primal_cfg);
  DualConfig dcfg = dual_cfg;
  dcfg.primal_value = out.primal.value.to_double();
  out.dual = restricted_div_dual(g, p, q, reg, dcfg);

  const ExtReal vp = out.primal.value, vd = out.dual.value;
  if (vp.is_pos_inf() && vd.is_pos_inf()) {
    out.absolute_gap = 0.0;
  } else if (vp.is_finite() && vd.is_finite()) {
    out.absolute_gap = std::abs(vd.value() - vp.value());
  } else {
    out.absolute_gap = ExtReal::pos_inf();
  }
  if (out.absolute_gap.is_finite()) {
    const double denom = vd.is_finite() ? std::max(1.0, std::abs(vd.value())) : 1.0;
    out.relative_gap = out.absolute_gap.value() / denom;
  } else {
    out.relative_gap = ExtReal::pos_inf();
  }
  double best_lower = -std::numeric_limits<double>::infinity();
  for (double v : out.primal.trace) best_lower = std::max(best_lower, v);
  double best_upper = std::numeric_limits<double>::infinity();
  for (double v : out.dual.trace) best_upper = std::min(best_upper, v);
  out.iterate_violation = (std::isfinite(best_lower) && std::isfinite(best_upper)) ? best_lower - best_upper : 0.0;
  return out;
}

GapReport duality_gap(const FGenerator& g, const Dist& p, const Dist& q, const DiscriminatorSpec& spec,
                      const PrimalConfig& primal_cfg, const DualConfig& dual_cfg) {
  return duality_gap(g, p, q, RegularizerSpec{IndicatorOf{spec}}, primal_cfg, dual_cfg);
}

}  // namespace rfgan
