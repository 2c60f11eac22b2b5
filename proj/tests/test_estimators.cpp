#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/estimators.hpp"
#include "support.hpp"

using namespace rfgan;

namespace {

const OutcomeSpace abc({"a", "b", "c"});

// The mismatch instance: family e^{theta [x = b]} over uniform, data with
// phi-mean 1.1 while every family member has phi-mean 1.
FitProblem mismatch() {
  const Dist base(abc, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  return FitProblem{ExpFamily{base, FeatureMap(abc, {{0.0, 1.0, 0.0}})}, Dist(abc, {0.2, 0.5, 0.3}),
                    FeatureMap(abc, {{0.0, 1.0, 2.0}}), "kl", ExtReal(1.0)};
}

// min over a coarse theta grid of max_{|a| <= 1} a E_P[phi] - ln E_Q[e^{a phi}].
double fgan_grid_oracle(double step) {
  const double pm = 0.5 + 0.6;
  auto inner = [&](double theta) {
    const double e = std::exp(theta), z = 2 + e;
    const double q[3] = {1 / z, e / z, 1 / z};
    auto j = [&](double a) { return a * pm - std::log(q[0] + q[1] * std::exp(a) + q[2] * std::exp(2 * a)); };
    double lo = -1, hi = 1;
    for (int i = 0; i < 100; ++i) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (j(m1) < j(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    return std::max({j(lo), j(-1.0), j(1.0)});
  };
  double best = 1e300;
  for (double t = -20; t <= 20; t += step) best = std::min(best, inner(t));
  return best;
}

}  // namespace

TEST_CASE("MLE on the mismatch instance") {
  const auto fr = fit_mle(mismatch());
  // Matching the data mass 0.5 on b: e^theta / (2 + e^theta) = 1/2.
  REQUIRE(fr.theta.size() == 1);
  CHECK(fr.theta[0] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(fr.q_star[0] == doctest::Approx(0.25));
  CHECK(fr.q_star[1] == doctest::Approx(0.5));
  const double kl = 0.2 * std::log(0.2 / 0.25) + 0.3 * std::log(0.3 / 0.25);
  CHECK(fr.objective.value() == doctest::Approx(kl).epsilon(1e-12));
  REQUIRE(fr.cross.mle);
  CHECK(fr.cross.mle->value() == doctest::Approx(kl).epsilon(1e-12));
}

TEST_CASE("GMM on the mismatch instance") {
  const auto fr = fit_gmm(mismatch());
  // Symmetric members have phi-mean q_b + 2 q_c = 1, a distance of 0.1 from 1.1.
  CHECK(fr.objective.value() == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(fr.status == SolveStatus::Converged);
  CHECK_FALSE(fr.notes.empty());  // flat objective: every start ties
}

TEST_CASE("linear KL-GAN on the mismatch instance") {
  const auto prob = mismatch();
  const auto fr = fit_linear_fgan(prob);
  const double oracle = fgan_grid_oracle(1e-2);
  CHECK(std::abs(fr.objective.value() - oracle) <= 1e-6);
  // Recomputed through the dual form.
  const auto dual = restricted_div_dual(builtin("kl"), prob.data, fr.q_star,
                                        DiscriminatorSpec::linear_ball(*prob.phi, 2.0, 1.0));
  CHECK(std::abs(dual.value.value() - fr.objective.value()) <= 1e-8);
  CHECK(total_variation(fr.q_star, fit_mle(prob).q_star) >= 1e-3);
  CHECK(total_variation(fr.q_star, fit_gmm(prob).q_star) >= 1e-3);
  // The criterion sits between zero and the MLE model's value.
  CHECK(fr.objective.value() <= fit_mle(prob).cross.fgan->value() + 1e-12);

  EstimatorConfig env;
  env.envelope_gradient = true;
  const auto fe = fit_linear_fgan(prob, env);
  CHECK(std::abs(fe.objective.value() - fr.objective.value()) <= 1e-6);
}

TEST_CASE("full simplex fits") {
  const auto inst = random_instance(8, 5, 2);
  const FitProblem prob{FullSimplex{inst.p.space()}, inst.p, inst.phi, "kl", ExtReal::pos_inf()};
  const auto mle = fit_mle(prob);
  CHECK(mle.q_star == inst.p);
  CHECK(mle.objective.value() == 0.0);

  const auto fg = fit_linear_fgan(prob);
  const auto gap_means = feature_means(fg.q_star, inst.phi);
  const auto data_means = feature_means(inst.p, inst.phi);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(gap_means[j] - data_means[j]) <= 1e-4);

  const auto gm = fit_gmm(prob);
  CHECK(gm.objective.value() <= 1e-8);
  // Closest to uniform among moment matches: an exponential tilt of uniform.
  const auto mp = moment_projection_to(builtin("kl"), data_means,
                                       make_dist(inst.p.space(), std::vector<double>(5, 1.0)), inst.phi);
  CHECK(total_variation(gm.q_star, *mp.intermediate) <= 1e-9);
}

TEST_CASE("determinism and validation") {
  const auto prob = mismatch();
  EstimatorConfig cfg;
  cfg.seed = 99;
  CHECK(fit_linear_fgan(prob, cfg).theta == fit_linear_fgan(prob, cfg).theta);
  CHECK(error_of([&] { fit("ols", prob); }) == ErrorCode::ValidationError);

  const Dist sparse_base(abc, {0.5, 0.5, 0.0});
  const FitProblem bad{ExpFamily{sparse_base, FeatureMap(abc, {{0.0, 1.0, 0.0}})}, Dist(abc, {0.2, 0.5, 0.3}),
                       std::nullopt, "kl", ExtReal(1.0)};
  CHECK(error_of([&] { fit_mle(bad); }) == ErrorCode::SupportViolation);
  CHECK(error_of([&] { fit_gmm(bad); }) == ErrorCode::ValidationError);  // no discriminator features
}

TEST_CASE("family parameterizations") {
  const GeneratorFamily simplex(FullSimplex{abc});
  CHECK(simplex.num_params() == 3);
  const auto q = simplex.member(std::vector<double>{0.0, 0.0, std::log(2.0)});
  CHECK(q[2] == doctest::Approx(0.5));
  // Jacobian against central differences.
  const GeneratorFamily ef(ExpFamily{Dist(abc, {0.2, 0.3, 0.5}), FeatureMap(abc, {{1.0, -1.0, 0.5}})});
  const std::vector<double> th = {0.3};
  const auto jac = ef.jacobian(th);
  const auto up = ef.member(std::vector<double>{0.3 + 1e-6});
  const auto dn = ef.member(std::vector<double>{0.3 - 1e-6});
  for (std::size_t i = 0; i < 3; ++i) CHECK(jac[i][0] == doctest::Approx((up[i] - dn[i]) / 2e-6).epsilon(1e-6));
}
