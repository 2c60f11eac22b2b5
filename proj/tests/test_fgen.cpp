#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "rfgan/fgen.hpp"
#include "support.hpp"

using namespace rfgan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Generators written out independently of the library.
const std::map<std::string, std::function<double(double)>>& reference_f() {
  static const std::map<std::string, std::function<double(double)>> table = {
      {"kl", [](double x) { return x == 0.0 ? 0.0 : x * std::log(x); }},
      {"reverse_kl", [](double x) { return -std::log(x); }},
      {"js_gan",
       [](double x) { return (x == 0.0 ? 0.0 : x * std::log(x)) - (x + 1) * std::log(x + 1) + 2 * std::log(2.0); }},
      {"pearson_chi2", [](double x) { return (x - 1) * (x - 1); }},
      {"squared_hellinger", [](double x) { return (std::sqrt(x) - 1) * (std::sqrt(x) - 1); }},
      {"total_variation", [](double x) { return 0.5 * std::abs(x - 1); }},
  };
  return table;
}

// sup_{x >= 0} x t - f(x) by golden section on [0, hi] (concave objective).
double numeric_conjugate(const std::function<double(double)>& f, double t, double hi) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = 0.0, b = hi;
  auto obj = [&](double x) { return x * t - f(x); };
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < 300 && b - a > 1e-13 * std::max(1.0, b); ++i) {
    if (obj(c) >= obj(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  double best = std::max(obj(a), obj(b));
  best = std::max(best, obj(0.5 * (a + b)));
  return std::max(best, f(0.0) == kInf ? -kInf : -f(0.0));
}

}  // namespace

TEST_CASE("builtin catalog") {
  CHECK(builtin_names().size() == 6);
  for (const auto& name : builtin_names()) {
    const auto g = builtin(name);
    CAPTURE(name);
    CHECK(g.name == name);
    CHECK(g.f(1.0) == ExtReal(0.0));
    CHECK(g.f(-1e-9).is_pos_inf());
  }
  CHECK(error_of([] { builtin("logistic"); }) == ErrorCode::UnknownGenerator);
}

TEST_CASE("generators match their textbook forms") {
  for (const auto& [name, f] : reference_f()) {
    const auto g = builtin(name);
    CAPTURE(name);
    for (double x : {0.01, 0.3, 1.0, 2.5, 40.0}) CHECK(g.f(x).value() == doctest::Approx(f(x)).epsilon(1e-13));
  }
}

TEST_CASE("conjugates agree with a numeric supremum") {
  // Points inside every conjugate domain; the search box covers the argmax.
  const std::map<std::string, std::vector<double>> points = {
      {"kl", {-3.0, -0.5, 0.0, 1.0, 3.0}},
      {"reverse_kl", {-4.0, -1.0, -0.2}},
      {"js_gan", {-4.0, -1.0, -0.1}},
      {"pearson_chi2", {-3.0, -2.0, -0.5, 0.0, 2.0}},
      {"squared_hellinger", {-3.0, 0.0, 0.5, 0.8}},
      {"total_variation", {-2.0, -0.5, 0.0, 0.3, 0.5}},
  };
  for (const auto& [name, ts] : points) {
    const auto g = builtin(name);
    const auto& f = reference_f().at(name);
    for (double t : ts) {
      CAPTURE(name);
      CAPTURE(t);
      const double oracle = numeric_conjugate(f, t, 200.0);
      CHECK(g.fstar(t).value() == doctest::Approx(oracle).epsilon(1e-7));
    }
  }
}

TEST_CASE("conjugate domains and slopes at infinity") {
  CHECK(builtin("kl").fstar(50.0).is_finite());
  CHECK(builtin("reverse_kl").fstar(0.0).is_pos_inf());
  CHECK(builtin("js_gan").fstar(0.0).is_pos_inf());
  CHECK(builtin("squared_hellinger").fstar(1.0).is_pos_inf());
  CHECK(builtin("total_variation").fstar(0.5).value() == 0.5);
  CHECK(builtin("total_variation").fstar(0.5000001).is_pos_inf());

  const std::map<std::string, double> slope = {{"kl", kInf},          {"reverse_kl", 0.0},
                                               {"js_gan", 0.0},       {"pearson_chi2", kInf},
                                               {"squared_hellinger", 1.0}, {"total_variation", 0.5}};
  for (const auto& [name, s] : slope) {
    CAPTURE(name);
    CHECK(builtin(name).fprime_at_infinity.to_double() == s);
  }
  CHECK_FALSE(builtin("total_variation").strictly_convex);
}

TEST_CASE("conjugates are non-decreasing and vanish-sup holds") {
  for (const auto& name : builtin_names()) {
    const auto g = builtin(name);
    CAPTURE(name);
    double prev = -kInf;
    for (double t = -8.0; t <= 2.0; t += 0.01) {
      const double v = g.fstar(t).to_double();
      CHECK(v >= prev);
      prev = v;
    }
    // f*(t) >= t - f(1) = t, with equality at t = f'(1) for the smooth ones.
    CHECK(g.fstar(0.0).to_double() >= -1e-15);
  }
}

TEST_CASE("check_generator passes every builtin") {
  for (const auto& name : builtin_names()) {
    const auto rep = check_generator(builtin(name));
    CAPTURE(name);
    for (const auto& e : rep.entries) {
      CAPTURE(e.name);
      CAPTURE(e.detail);
      CHECK(e.passed);
    }
    CHECK(rep.all_passed());
  }
}

TEST_CASE("check_generator reports a broken generator instead of throwing") {
  FGenerator bad = builtin("kl");
  bad.name = "shifted";
  bad.f = [](double x) -> ExtReal {
    if (x < 0.0) return ExtReal::pos_inf();
    return (x == 0.0 ? 0.0 : x * std::log(x)) + 0.1;
  };
  const auto rep = check_generator(bad);
  CHECK_FALSE(rep.all_passed());
  CHECK_FALSE(rep.entry("normalization").passed);
}
