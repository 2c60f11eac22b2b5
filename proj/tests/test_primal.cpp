#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "rfgan/divergence.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/verify.hpp"
#include "support.hpp"

using namespace rfgan;

namespace {

const OutcomeSpace two = OutcomeSpace::of_size(2);

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi, c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && b - a > 1e-12; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::max({f(a), f(b), f(0.5 * (a + b))});
}

// sup over |a| <= R and free b of E_P[a phi + b] - E_Q[f*(a phi + b)], one
// feature, with the textbook chi-square conjugate.
double chi2_oracle(const Dist& p, const Dist& q, const std::vector<double>& phi, double radius) {
  auto fstar = [](double t) { return t >= -2.0 ? t + t * t / 4.0 : -1.0; };
  auto inner = [&](double a) {
    return golden_max(
        [&](double b) {
          double v = 0.0;
          for (std::size_t i = 0; i < phi.size(); ++i) v += p[i] * (a * phi[i] + b) - q[i] * fstar(a * phi[i] + b);
          return v;
        },
        -50.0, 50.0);
  };
  return golden_max(inner, -radius, radius);
}

}  // namespace

TEST_CASE("two-point KL with an unrestricted coefficient recovers the divergence") {
  const Dist p(two, {0.5, 0.5});
  const Dist q(two, {0.75, 0.25});
  const FeatureMap phi(two, {{0.0, 1.0}});
  const auto rep =
      restricted_div_primal(builtin("kl"), p, q, DiscriminatorSpec::linear_ball(phi, 2.0, ExtReal::pos_inf()));
  const double oracle = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(std::abs(rep.value.value() - oracle) <= 1e-6);
  // The optimal tilt q e^{a phi} / Z reproduces P: e^a = (0.5/0.25)/(0.5/0.75) = 3.
  REQUIRE(rep.coefficients.size() == 1);
  CHECK(rep.coefficients[0] == doctest::Approx(std::log(3.0)).epsilon(1e-6));
}

TEST_CASE("KL ball constraint against a one-dimensional search") {
  const auto s = OutcomeSpace::of_size(4);
  const Dist p(s, {0.1, 0.2, 0.3, 0.4});
  const Dist q(s, {0.4, 0.3, 0.2, 0.1});
  const std::vector<double> f = {-1.0, 0.0, 0.5, 2.0};
  const FeatureMap phi(s, {f});
  for (double radius : {0.05, 0.3, 1.0, 5.0}) {
    // J(a) = a E_P[phi] - ln E_Q[e^{a phi}].
    const double oracle = golden_max(
        [&](double a) {
          double m = 0.0, z = 0.0;
          for (std::size_t i = 0; i < 4; ++i) {
            m += p[i] * f[i];
            z += q[i] * std::exp(a * f[i]);
          }
          return a * m - std::log(z);
        },
        -radius, radius);
    const auto rep = restricted_div_primal(builtin("kl"), p, q, DiscriminatorSpec::linear_ball(phi, 2.0, radius));
    CAPTURE(radius);
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(std::abs(rep.value.value() - oracle) <= 1e-9);
  }
}

TEST_CASE("chi-square ball against nested searches") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist p(s, {0.6, 0.1, 0.3});
  const Dist q(s, {0.2, 0.5, 0.3});
  const std::vector<double> f = {1.0, -1.0, 0.5};
  for (double radius : {0.2, 1.0, 3.0}) {
    const auto rep = restricted_div_primal(builtin("pearson_chi2"), p, q,
                                           DiscriminatorSpec::linear_ball(FeatureMap(s, {f}), 2.0, radius));
    CAPTURE(radius);
    CHECK(std::abs(rep.value.value() - chi2_oracle(p, q, f, radius)) <= 1e-8);
  }
}

TEST_CASE("identical distributions and a zero radius give zero") {
  const auto inst = random_instance(3, 6, 2);
  for (const auto& name : {"kl", "pearson_chi2", "squared_hellinger", "js_gan"}) {
    CAPTURE(name);
    const auto same = restricted_div_primal(builtin(name), inst.p, inst.p,
                                            DiscriminatorSpec::linear_ball(inst.phi, 2.0, 10.0));
    CHECK(std::abs(same.value.value()) <= 1e-10);
    const auto tiny = restricted_div_primal(builtin(name), inst.p, inst.q,
                                            DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1e-9));
    CHECK(std::abs(tiny.value.value()) <= 1e-8);
  }
}

TEST_CASE("value grows with the radius and is capped by the full divergence") {
  const auto inst = random_instance(9, 7, 2);
  const auto g = builtin("squared_hellinger");
  double prev = 0.0;
  const double full = df_closed(g, inst.p, inst.q).value.value();
  for (double radius : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    const auto rep = restricted_div_primal(g, inst.p, inst.q, DiscriminatorSpec::linear_ball(inst.phi, 2.0, radius));
    CHECK(rep.value.value() >= prev - 1e-10);
    CHECK(rep.value.value() <= full + 1e-10);
    prev = rep.value.value();
  }
}

TEST_CASE("the full space delegates to the variational divergence") {
  const auto inst = random_instance(4, 5, 1);
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto rep = restricted_div_primal(builtin(name), inst.p, inst.q, FullSpace{});
    CHECK(std::abs(rep.value.value() - df_closed(builtin(name), inst.p, inst.q).value.value()) <= 1e-6);
    CHECK(rep.discriminator.has_value());
  }
}

TEST_CASE("unbounded direction when the means leave the support hull") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist p(s, {0.3, 0.3, 0.4});
  const Dist q(s, {0.5, 0.5, 0.0});
  const FeatureMap phi(s, {{0.0, 0.0, 1.0}});
  const auto rep =
      restricted_div_primal(builtin("kl"), p, q, DiscriminatorSpec::linear_ball(phi, 2.0, ExtReal::pos_inf()));
  CHECK(rep.status == SolveStatus::Unbounded);
  CHECK(rep.value.is_pos_inf());
  REQUIRE(rep.certificate.size() == 1);
  CHECK(rep.certificate[0] == doctest::Approx(1.0));
}

TEST_CASE("removing the intercept can only lower the value") {
  const auto inst = random_instance(21, 6, 2);
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, 2.0);
  for (const auto& name : {"kl", "pearson_chi2"}) {
    const auto with = restricted_div_primal(builtin(name), inst.p, inst.q, spec);
    const auto without = restricted_div_primal(builtin(name), inst.p, inst.q, spec.without_intercept());
    CAPTURE(name);
    CHECK(without.value.value() <= with.value.value() + 1e-10);
  }
}

TEST_CASE("analytic gradient agrees with central differences") {
  const auto inst = random_instance(2, 8, 3);
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1.0);
  for (const auto& name : {"kl", "reverse_kl", "js_gan", "pearson_chi2", "squared_hellinger"}) {
    const auto g = builtin(name);
    const std::vector<double> a = {0.2, -0.3, 0.1};
    const auto obj = linear_objective(g, inst.p, inst.q, spec, a);
    for (std::size_t j = 0; j < 3; ++j) {
      auto up = a, down = a;
      up[j] += 1e-6;
      down[j] -= 1e-6;
      const double fd = (linear_objective(g, inst.p, inst.q, spec, up).value.value() -
                         linear_objective(g, inst.p, inst.q, spec, down).value.value()) /
                        2e-6;
      CAPTURE(name);
      CHECK(obj.gradient[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("quadratic coefficient penalty") {
  const auto inst = random_instance(8, 5, 2);
  const QuadraticCoefficientPenalty reg{inst.phi, 0.7};
  const auto rep = regularized_div_primal(builtin("kl"), inst.p, inst.q, reg);
  CHECK(rep.status == SolveStatus::Converged);
  // Stationarity: gradient of J(a) equals 2 w a.
  const auto obj = linear_objective(builtin("kl"), inst.p, inst.q,
                                    DiscriminatorSpec::linear_ball(inst.phi, 2.0, ExtReal::pos_inf()), rep.coefficients);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(obj.gradient[j] - 2 * 0.7 * rep.coefficients[j]) <= 1e-7);
}

TEST_CASE("total variation primal is flagged, never overstated") {
  const OutcomeSpace s({"a", "b", "c", "d"});
  const Dist p(s, {0.1, 0.4, 0.2, 0.3}), q(s, {0.3, 0.2, 0.4, 0.1});
  const auto spec = DiscriminatorSpec::linear_ball(FeatureMap(s, {{0, 1, 0.5, 2}, {1, 0, 1.5, 0.5}}), 2.0, 1.0);
  const auto g = builtin("total_variation");
  const auto rep = restricted_div_primal(g, p, q, spec);
  const auto bf = brute_force_primal(g, p, q, spec, 1e-3);
  CHECK(rep.status == SolveStatus::NotConverged);
  CHECK_FALSE(rep.attained);
  CHECK(rep.value.value() <= bf.value + bf.error_bound);
  CHECK(rep.value.value() > 0.0);
}
