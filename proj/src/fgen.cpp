#include "rfgan/fgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rfgan/error.hpp"
#include "rfgan/optim1d.hpp"

namespace rfgan {

namespace {

const ExtReal kInf = ExtReal::pos_inf();
constexpr double kLn2 = std::numbers::ln2;

// Conjugates below are sup over x >= 0 only; they differ from the
// unrestricted textbook formulas wherever the unrestricted maximizer is
// negative.

FGenerator make_kl() {
  FGenerator g;
  g.name = "kl";
  g.f = [](double x) -> ExtReal {
    if (x < 0.0) return kInf;
    if (x == 0.0) return 0.0;
    return x * std::log(x);
  };
  // x* = e^{t-1} > 0 for every t.
  g.fstar = [](double t) -> ExtReal { return std::exp(t - 1.0); };
  g.fstar_prime = [](double t) -> ExtReal { return std::exp(t - 1.0); };
  g.fprime = [](double x) { return std::log(x) + 1.0; };
  g.fsecond = [](double x) { return 1.0 / x; };
  g.fstar_domain_upper = kInf;
  g.fstar_domain_closed = false;
  g.fprime_at_infinity = kInf;
  return g;
}

FGenerator make_reverse_kl() {
  FGenerator g;
  g.name = "reverse_kl";
  g.f = [](double x) -> ExtReal {
    if (x <= 0.0) return kInf;
    return -std::log(x);
  };
  // t < 0: x* = -1/t, f* = -1 - ln(-t); t >= 0: unbounded.
  g.fstar = [](double t) -> ExtReal {
    if (t >= 0.0) return kInf;
    return -1.0 - std::log(-t);
  };
  g.fstar_prime = [](double t) -> ExtReal {
    if (t >= 0.0) return kInf;
    return -1.0 / t;
  };
  g.fprime = [](double x) { return -1.0 / x; };
  g.fsecond = [](double x) { return 1.0 / (x * x); };
  g.fstar_domain_upper = 0.0;
  g.fstar_domain_closed = false;
  g.fprime_at_infinity = 0.0;
  return g;
}

FGenerator make_js_gan() {
  FGenerator g;
  g.name = "js_gan";
  // x ln x - (x+1) ln(x+1), shifted by 2 ln 2 so that f(1) = 0.
  g.f = [](double x) -> ExtReal {
    if (x < 0.0) return kInf;
    const double xlogx = x == 0.0 ? 0.0 : x * std::log(x);
    return xlogx - (x + 1.0) * std::log(x + 1.0) + 2.0 * kLn2;
  };
  // t < 0: x* = 1/(e^{-t} - 1), f* = -ln(1 - e^t) - 2 ln 2.
  g.fstar = [](double t) -> ExtReal {
    if (t >= 0.0) return kInf;
    return -std::log1p(-std::exp(t)) - 2.0 * kLn2;
  };
  g.fstar_prime = [](double t) -> ExtReal {
    if (t >= 0.0) return kInf;
    return 1.0 / std::expm1(-t);
  };
  g.fprime = [](double x) { return std::log(x / (x + 1.0)); };
  g.fsecond = [](double x) { return 1.0 / (x * (x + 1.0)); };
  g.fstar_domain_upper = 0.0;
  g.fstar_domain_closed = false;
  g.fprime_at_infinity = 0.0;
  g.note = "standard GAN generator shifted by 2 ln 2 so that f(1) = 0";
  return g;
}

FGenerator make_pearson_chi2() {
  FGenerator g;
  g.name = "pearson_chi2";
  g.f = [](double x) -> ExtReal {
    if (x < 0.0) return kInf;
    return (x - 1.0) * (x - 1.0);
  };
  // Stationary point x = 1 + t/2 is feasible iff t >= -2; below that x* = 0.
  g.fstar = [](double t) -> ExtReal {
    if (t < -2.0) return -1.0;
    return t + 0.25 * t * t;
  };
  g.fstar_prime = [](double t) -> ExtReal {
    if (t < -2.0) return 0.0;
    return 1.0 + 0.5 * t;
  };
  g.fprime = [](double x) { return 2.0 * (x - 1.0); };
  g.fsecond = [](double) { return 2.0; };
  g.fstar_domain_upper = kInf;
  g.fstar_domain_closed = false;
  g.fprime_at_infinity = kInf;
  return g;
}

FGenerator make_squared_hellinger() {
  FGenerator g;
  g.name = "squared_hellinger";
  g.f = [](double x) -> ExtReal {
    if (x < 0.0) return kInf;
    const double r = std::sqrt(x) - 1.0;
    return r * r;
  };
  // With s = sqrt(x): s^2 (t - 1) + 2 s - 1, maximized at s = 1/(1 - t) for t < 1.
  g.fstar = [](double t) -> ExtReal {
    if (t >= 1.0) return kInf;
    return t / (1.0 - t);
  };
  g.fstar_prime = [](double t) -> ExtReal {
    if (t >= 1.0) return kInf;
    return 1.0 / ((1.0 - t) * (1.0 - t));
  };
  g.fprime = [](double x) { return 1.0 - 1.0 / std::sqrt(x); };
  g.fsecond = [](double x) { return 0.5 / (x * std::sqrt(x)); };
  g.fstar_domain_upper = 1.0;
  g.fstar_domain_closed = false;
  g.fprime_at_infinity = 1.0;
  return g;
}

FGenerator make_total_variation() {
  FGenerator g;
  g.name = "total_variation";
  g.f = [](double x) -> ExtReal {
    if (x < 0.0) return kInf;
    return 0.5 * std::abs(x - 1.0);
  };
  // Piecewise linear: x* = 0 for t < -1/2, x* = 1 on [-1/2, 1/2], unbounded above.
  g.fstar = [](double t) -> ExtReal {
    if (t > 0.5) return kInf;
    return std::max(t, -0.5);
  };
  g.fstar_prime = [](double t) -> ExtReal {
    if (t >= 0.5) return kInf;
    return t < -0.5 ? 0.0 : 1.0;
  };
  g.fprime = [](double x) { return x < 1.0 ? -0.5 : (x > 1.0 ? 0.5 : 0.0); };
  g.fsecond = [](double) { return 0.0; };
  g.fstar_domain_upper = 0.5;
  g.fstar_domain_closed = true;
  g.fprime_at_infinity = 0.5;
  g.strictly_convex = false;
  g.note = "piecewise linear f: not strictly convex, dual uses the first-order phase only";
  return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Feasible starting point for maximizing x t - f*(t): strictly inside dom f*.
double conjugate_start(const FGenerator& g) {
  if (g.fstar_domain_upper.is_finite()) return std::min(0.0, g.fstar_domain_upper.value() - 1.0);
  return 0.0;
}

double conjugate_upper(const FGenerator& g, double cap) {
  return g.fstar_domain_upper.is_finite() ? std::min(cap, g.fstar_domain_upper.value()) : cap;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"kl",           "reverse_kl",        "js_gan",
                                                 "pearson_chi2", "squared_hellinger", "total_variation"};
  return names;
}

FGenerator builtin(const std::string& name) {
  if (name == "kl") return make_kl();
  if (name == "reverse_kl") return make_reverse_kl();
  if (name == "js_gan") return make_js_gan();
  if (name == "pearson_chi2") return make_pearson_chi2();
  if (name == "squared_hellinger") return make_squared_hellinger();
  if (name == "total_variation") return make_total_variation();
  throw Error(ErrorCode::UnknownGenerator, "no builtin generator named '" + name + "'");
}

bool CheckReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.passed; });
}

const CheckEntry& CheckReport::entry(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(ErrorCode::ValidationError, "check report has no entry '" + name + "'");
}

CheckReport check_generator(const FGenerator& g, const GridSpec& grid) {
  CheckReport rep;
  rep.generator = g.name;
  if (!g.note.empty()) rep.notes.push_back(g.note);

  const auto xs = linspace(0.0, grid.x_max, grid.x_points);
  double t_hi = grid.t_max;
  if (g.fstar_domain_upper.is_finite()) t_hi = std::min(t_hi, g.fstar_domain_upper.value());
  const auto ts = linspace(grid.t_min, t_hi, grid.t_points);

  std::vector<ExtReal> fx, ft;
  fx.reserve(xs.size());
  ft.reserve(ts.size());
  for (double x : xs) fx.push_back(g.f(x));
  for (double t : ts) ft.push_back(g.fstar(t));

  {
    const ExtReal f1 = g.f(1.0);
    CheckEntry e{"normalization", f1 == ExtReal(0.0), f1.to_double(), "f(1) = " + f1.str()};
    rep.entries.push_back(e);
  }
  {
    bool ok = true;
    for (double x : {-1e-9, -0.5, -1.0, -10.0})
      if (!g.f(x).is_pos_inf()) ok = false;
    rep.entries.push_back({"negative_domain", ok, 0.0, "f(x) = inf for x < 0"});
  }
  {
    // f(mid) <= (f(lo) + f(hi)) / 2 on adjacent and stride-2 triples.
    double worst = 0.0;
    for (std::size_t stride : {std::size_t{1}, std::size_t{2}}) {
      for (std::size_t i = stride; i + stride < xs.size(); ++i) {
        const ExtReal lo = fx[i - stride], hi = fx[i + stride];
        if (!lo.is_finite() || !hi.is_finite()) continue;
        const ExtReal mid = g.f(0.5 * (xs[i - stride] + xs[i + stride]));
        const double excess = mid.is_finite() ? mid.value() - 0.5 * (lo.value() + hi.value()) : 1e300;
        worst = std::max(worst, excess);
      }
    }
    rep.entries.push_back({"convexity", worst <= 1e-9, worst, "max midpoint excess " + fmt(worst)});
  }
  {
    double worst = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ft[i] < ft[i - 1]) {
        const double drop = ft[i - 1].is_finite() && ft[i].is_finite() ? ft[i - 1].value() - ft[i].value() : 1e300;
        worst = std::max(worst, drop);
      }
    }
    rep.entries.push_back({"conjugate_monotone", worst == 0.0, worst, "max decrease of f* on grid " + fmt(worst)});
  }
  {
    // sup_t (t - f*(t)): grid scan refined by golden section.
    auto objective = [&](double t) -> ExtReal { return ExtReal(t) - g.fstar(t); };
    const auto best = maximize_concave(objective, conjugate_start(g), -1e3, conjugate_upper(g, 1e3));
    double sup = best.value.to_double();
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ft[i].is_finite()) sup = std::max(sup, ts[i] - ft[i].value());
    rep.entries.push_back({"conjugate_normalization", std::abs(sup) <= 1e-6, sup,
                           "sup_t (t - f*(t)) = " + fmt(sup) + " at t = " + fmt(best.arg)});
  }
  {
    double worst = 0.0;  // most negative slack f(x) + f*(t) - x t
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!fx[i].is_finite()) continue;
      for (std::size_t j = 0; j < ts.size(); ++j) {
        if (!ft[j].is_finite()) continue;
        worst = std::min(worst, fx[i].value() + ft[j].value() - xs[i] * ts[j]);
      }
    }
    rep.entries.push_back({"fenchel_young", worst >= -1e-9, worst, "min slack " + fmt(worst)});
  }
  {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      if (!fx[i].is_finite()) continue;
      const double x = xs[i];
      auto objective = [&](double t) -> ExtReal { return ExtReal(x * t) - g.fstar(t); };
      const auto best = maximize_concave(objective, conjugate_start(g), -1e3, conjugate_upper(g, 1e3));
      const double dev = best.value.is_finite() ? std::abs(best.value.value() - fx[i].value()) : 1e300;
      worst = std::max(worst, dev);
    }
    rep.entries.push_back({"biconjugate", worst <= 1e-6, worst, "max |f**(x) - f(x)| " + fmt(worst)});
  }
  {
    constexpr double kFar = 1e6;
    const ExtReal fx_far = g.f(kFar);
    const double slope = fx_far.to_double() / kFar;
    bool ok;
    std::string detail;
    if (g.fprime_at_infinity.is_finite()) {
      const double lim = g.fprime_at_infinity.value();
      ok = std::abs(slope - lim) <= 0.05 * std::max(1.0, std::abs(lim));
      detail = "f(1e6)/1e6 = " + fmt(slope) + ", declared limit " + fmt(lim);
    } else {
      ok = slope >= 10.0;
      detail = "f(1e6)/1e6 = " + fmt(slope) + ", declared limit inf";
    }
    rep.entries.push_back({"slope_at_infinity", ok, slope, detail});
  }
  if (!g.strictly_convex) rep.notes.push_back("f is not strictly convex; dual solves may converge slowly");
  return rep;
}

}  // namespace rfgan
