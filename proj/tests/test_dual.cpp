#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/verify.hpp"
#include "support.hpp"

using namespace rfgan;

namespace {
const OutcomeSpace two = OutcomeSpace::of_size(2);
const char* const kSmooth[] = {"kl", "pearson_chi2", "squared_hellinger", "js_gan"};
}  // namespace

TEST_CASE("two-point moment projection") {
  const Dist p(two, {0.5, 0.5});
  const Dist q(two, {0.75, 0.25});
  const FeatureMap phi(two, {{0.0, 1.0}});
  const auto mp = moment_projection(builtin("kl"), p, q, phi);
  CHECK(mp.status == SolveStatus::Converged);
  CHECK(mp.theta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(mp.value.value() == doctest::Approx(0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0)).epsilon(1e-12));
  REQUIRE(mp.intermediate);
  CHECK((*mp.intermediate)[0] == doctest::Approx(0.5));
}

TEST_CASE("moment projection by the augmented Lagrangian matches the primal") {
  const auto inst = random_instance(17, 6, 2);
  for (const auto& name : {"pearson_chi2", "squared_hellinger"}) {
    const auto g = builtin(name);
    const auto mp = moment_projection(g, inst.p, inst.q, inst.phi);
    const auto pr =
        restricted_div_primal(g, inst.p, inst.q, DiscriminatorSpec::linear_ball(inst.phi, 2.0, ExtReal::pos_inf()));
    CAPTURE(name);
    CHECK(mp.status == SolveStatus::Converged);
    CHECK(std::abs(mp.value.value() - pr.value.value()) <= 1e-7);
    const auto gap = feature_means(*mp.intermediate, inst.phi);
    const auto target = feature_means(inst.p, inst.phi);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(gap[j] - target[j]) <= 1e-8);
  }
}

TEST_CASE("infeasible moments") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist p(s, {0.3, 0.3, 0.4});
  const Dist q(s, {0.5, 0.5, 0.0});
  const FeatureMap phi(s, {{0.0, 0.0, 1.0}});
  const auto mp = moment_projection(builtin("kl"), p, q, phi);
  CHECK(mp.status == SolveStatus::Infeasible);
  CHECK(mp.value.is_pos_inf());
  const auto ds = restricted_div_dual(builtin("kl"), p, q, DiscriminatorSpec::linear_ball(phi, 2.0, ExtReal::pos_inf()));
  CHECK(ds.value.is_pos_inf());
}

TEST_CASE("dual equals primal on finite balls") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = random_instance(100 + seed, 5 + seed % 4, 1 + seed % 3);
    for (const char* name : kSmooth) {
      for (double radius : {0.1, 1.0, 10.0}) {
        const auto gr = duality_gap(builtin(name), inst.p, inst.q, DiscriminatorSpec::linear_ball(inst.phi, 2.0, radius));
        CAPTURE(name);
        CAPTURE(radius);
        CAPTURE(seed);
        CHECK(gr.relative_gap.value() <= 1e-6);
        CHECK(gr.iterate_violation <= 1e-9);
      }
    }
  }
}

TEST_CASE("dual value dominates every feasible point") {
  const auto inst = random_instance(5, 6, 2);
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1.0);
  for (const char* name : kSmooth) {
    const auto g = builtin(name);
    const auto ds = restricted_div_dual(g, inst.p, inst.q, spec);
    // P' = Q gives lambda*(P - Q); P' = P gives D_f(P || Q).
    CHECK(ds.value.value() <= dual_objective(g, inst.p, inst.q, IndicatorOf{spec}, inst.q).value() + 1e-12);
    CHECK(ds.value.value() <= df_closed(g, inst.p, inst.q).value.value() + 1e-12);
    for (double alpha : {0.2, 0.5, 0.8}) {
      const Dist mix = Dist::mix(inst.q, inst.p, alpha);
      CHECK(ds.value.value() <= dual_objective(g, inst.p, inst.q, IndicatorOf{spec}, mix).value() + 1e-12);
    }
  }
}

TEST_CASE("quadratic penalty duality") {
  const auto inst = random_instance(33, 7, 2);
  const QuadraticCoefficientPenalty reg{inst.phi, 0.25};
  for (const char* name : kSmooth) {
    const auto gr = duality_gap(builtin(name), inst.p, inst.q, reg);
    CAPTURE(name);
    CHECK(gr.relative_gap.value() <= 1e-6);
  }
}

TEST_CASE("partial support of Q") {
  const auto base = random_instance(40, 7, 2);
  std::vector<double> w(base.q.masses().begin(), base.q.masses().end());
  w[3] = 0.0;
  const Dist q = make_dist(base.q.space(), w);
  for (const char* name : kSmooth) {
    const auto gr = duality_gap(builtin(name), base.p, q, DiscriminatorSpec::linear_ball(base.phi, 2.0, 1.0));
    CAPTURE(name);
    CHECK(gr.relative_gap.value() <= 1e-6);
    REQUIRE(gr.dual.intermediate);
    CHECK((*gr.dual.intermediate)[3] == 0.0);
  }
}

TEST_CASE("total variation dual against the grid oracle") {
  const auto inst = random_instance(77, 6, 1);
  const auto g = builtin("total_variation");
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1.0);
  const auto ds = restricted_div_dual(g, inst.p, inst.q, spec);
  const auto bf = brute_force_primal(g, inst.p, inst.q, spec, 1e-4);
  CHECK(ds.value.value() >= bf.value - 1e-9);
  CHECK(ds.value.value() <= bf.value + bf.error_bound + 1e-7);
}

TEST_CASE("full space dual") {
  const auto inst = random_instance(2, 5, 1);
  for (const auto& name : builtin_names()) {
    const auto ds = restricted_div_dual(builtin(name), inst.p, inst.q, DiscriminatorSpec(FullSpace{}));
    CAPTURE(name);
    CHECK(ds.value.value() == doctest::Approx(df_closed(builtin(name), inst.p, inst.q).value.value()).epsilon(1e-12));
  }
}

TEST_CASE("preconditions") {
  const auto inst = random_instance(3, 4, 1);
  const auto spec = DiscriminatorSpec::linear_ball(inst.phi, 2.0, 1.0);
  const auto na = restricted_div_dual(builtin("kl"), inst.p, inst.q, spec.without_intercept());
  CHECK(na.status == SolveStatus::NotApplicable);
  const auto gr = duality_gap(builtin("kl"), inst.p, inst.q, spec.without_intercept());
  CHECK_FALSE(gr.applicable);
  CHECK(error_of([&] {
          restricted_div_dual(builtin("kl"), inst.p, inst.q, DiscriminatorSpec::linear_ball(inst.phi, 3.0, 1.0));
        }) == ErrorCode::UnsupportedNorm);
}

TEST_CASE("other norms") {
  const auto inst = random_instance(12, 6, 2);
  for (double pn : {1.0, std::numeric_limits<double>::infinity()}) {
    const auto gr = duality_gap(builtin("kl"), inst.p, inst.q, DiscriminatorSpec::linear_ball(inst.phi, pn, 1.0));
    CAPTURE(pn);
    CHECK(gr.relative_gap.value() <= 1e-5);
  }
}
