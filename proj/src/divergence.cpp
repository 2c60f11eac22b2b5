#include "rfgan/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfgan/error.hpp"
#include "rfgan/optim1d.hpp"

namespace rfgan {

namespace {

double conjugate_start(const FGenerator& g) {
  if (g.fstar_domain_upper.is_finite()) return std::min(0.0, g.fstar_domain_upper.value() - 1.0);
  return 0.0;
}

}  // namespace

ExtReal conjugate_expectation(const FGenerator& g, const Dist& q, std::span<const double> h) {
  ExtReal s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (q[i] > 0.0) s += q[i] * g.fstar(h[i]);
  return s;
}

DivergenceValue df_closed(const FGenerator& g, const Dist& p, const Dist& q) {
  require_same_space(p.space(), q.space(), "df_closed");
  ExtReal total = 0.0;
  double escaped = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] > 0.0) {
      total += q[i] * g.f(p[i] / q[i]);
    } else {
      escaped += p[i];
    }
  }
  if (escaped > 0.0) total += escaped * g.fprime_at_infinity;
  return {total, std::nullopt, false};
}

DivergenceValue kl_bar(const Dist& p, const Dist& q) { return df_closed(builtin("kl"), p, q); }

DivergenceValue df_variational_full(const FGenerator& g, const Dist& p, const Dist& q) {
  require_same_space(p.space(), q.space(), "df_variational_full");
  // Widest search before a sup is treated as approached at infinity.
  constexpr double kSearchLimit = 1e12;
  ExtReal total = 0.0;
  bool capped = false;
  std::vector<double> h(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i], qi = q[i];
    if (pi == 0.0 && qi == 0.0) continue;
    auto term = [&](double t) -> ExtReal {
      const ExtReal c = g.fstar(t);
      if (qi == 0.0) return c.is_finite() ? ExtReal(pi * t) : ExtReal::neg_inf();
      return ExtReal(pi * t) - qi * c;
    };
    double limit = kDiscriminatorCap;
    Maximum1D best;
    bool at_hi = false, at_lo = false;
    for (;;) {
      const double upper = g.fstar_domain_upper.is_finite() ? std::min(limit, g.fstar_domain_upper.value()) : limit;
      best = maximize_concave(term, conjugate_start(g), -limit, upper);
      at_hi = best.hit_upper && upper == limit;
      at_lo = best.hit_lower;
      if (!(at_hi || at_lo) || limit >= kSearchLimit) break;
      limit *= 1e3;
    }
    ExtReal value = best.value;
    h[i] = best.arg;
    if (at_hi || at_lo) {
      capped = true;
      h[i] = at_hi ? kDiscriminatorCap : -kDiscriminatorCap;
      const ExtReal beyond = term(at_hi ? 2.0 * limit : -2.0 * limit);
      if (beyond > best.value + ExtReal(1e-9 * std::max(1.0, std::abs(best.value.to_double()))))
        value = ExtReal::pos_inf();
    }
    total += value;
  }
  return {total, FunctionOnSpace(p.space(), std::move(h)), capped};
}

RValue r_functional(const FGenerator& g, const Dist& q, const FunctionOnSpace& h, RMethod method) {
  require_same_space(q.space(), h.space(), "r_functional");
  return r_functional(g, q, h.values(), method);
}

RValue r_functional(const FGenerator& g, const Dist& q, std::span<const double> h, RMethod method) {
  if (h.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "r_functional: length mismatch");
  double hmax = -std::numeric_limits<double>::infinity();
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (q[i] <= 0.0) continue;
    hmax = std::max(hmax, h[i]);
    hmin = std::min(hmin, h[i]);
  }

  if (method == RMethod::Auto && g.name == "kl") {
    // ln sum_i q_i e^{h_i}, shifted by the max for stability.
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
      if (q[i] > 0.0) s += q[i] * std::exp(h[i] - hmax);
    const double r = hmax + std::log(s);
    return {r, 1.0 - r};
  }

  // Derivative of b -> E_Q[f*(h + b)] - b; +inf once some h_i + b leaves dom f*.
  auto slope = [&](double b) -> ExtReal {
    ExtReal s = -1.0;
    for (std::size_t i = 0; i < h.size(); ++i)
      if (q[i] > 0.0) s += q[i] * g.fstar_prime(h[i] + b);
    return s;
  };
  auto value_at = [&](double b) -> ExtReal {
    ExtReal s = -b;
    for (std::size_t i = 0; i < h.size(); ++i)
      if (q[i] > 0.0) s += q[i] * g.fstar(h[i] + b);
    return s;
  };

  const double b0 = g.fstar_domain_upper.is_finite() ? g.fstar_domain_upper.value() - hmax - 1.0 : -hmax;
  const double limit = 1e3 + (hmax - hmin);

  double lo = b0;
  for (double step = 1.0; !(slope(lo) < ExtReal(0.0)); step *= 2.0) {
    if (step > limit) throw Error(ErrorCode::Unbounded, "r_functional: no lower bracket for the intercept");
    lo = b0 - step;
  }
  double hi = b0;
  for (double step = 1.0; slope(hi) < ExtReal(0.0); step *= 2.0) {
    if (step > limit) throw Error(ErrorCode::Unbounded, "r_functional: no upper bracket for the intercept");
    hi = b0 + step;
  }
  while (hi - lo > std::max(1e-10, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < ExtReal(0.0)) lo = mid; else hi = mid;
  }
  // The minimum lies in [lo, hi]; take the better finite end.
  const ExtReal vlo = value_at(lo), vhi = value_at(hi);
  if (!vlo.is_finite() && !vhi.is_finite())
    throw Error(ErrorCode::Unbounded, "r_functional: objective infinite at the bracketed minimizer");
  if (vhi.is_finite() && (!vlo.is_finite() || vhi < vlo)) return {vhi.value(), hi};
  return {vlo.value(), lo};
}

std::vector<double> r_functional_tilt(const FGenerator& g, const Dist& q, std::span<const double> h, double b_star) {
  std::vector<double> w(h.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (q[i] <= 0.0) continue;
    const ExtReal d = g.fstar_prime(h[i] + b_star);
    w[i] = q[i] * (d.is_finite() ? d.value() : 0.0);
    sum += w[i];
  }
  if (sum > 0.0)
    for (double& v : w) v /= sum;
  return w;
}

}  // namespace rfgan
