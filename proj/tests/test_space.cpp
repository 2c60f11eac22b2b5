#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rfgan/space.hpp"
#include "support.hpp"

using namespace rfgan;

TEST_CASE("outcome space labels") {
  const OutcomeSpace s({"a", "b", "c"});
  CHECK(s.size() == 3);
  CHECK(s.index_of("c") == 2);
  CHECK(error_of([&] { (void)s.index_of("d"); }) == ErrorCode::ValidationError);
  CHECK(error_of([] { OutcomeSpace({"a", "a"}); }) == ErrorCode::BadSpace);
  CHECK(error_of([] { OutcomeSpace(std::vector<std::string>{}); }) == ErrorCode::BadSpace);
  CHECK(OutcomeSpace::of_size(2).labels() == std::vector<std::string>{"x0", "x1"});
}

TEST_CASE("distribution normalization rules") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist exact(s, {0.2, 0.3, 0.5});
  CHECK(exact[1] == 0.3);

  // Off by 5e-10: renormalized so the masses sum to one.
  const Dist near(s, {0.2, 0.3, 0.5 + 5e-10});
  const double sum = near[0] + near[1] + near[2];
  CHECK(std::abs(sum - 1.0) <= 1e-15);

  CHECK(error_of([&] { Dist(s, {0.2, 0.3, 0.6}); }) == ErrorCode::NotNormalized);
  CHECK(error_of([&] { Dist(s, {-0.1, 0.6, 0.5}); }) == ErrorCode::NegativeWeight);
  CHECK(error_of([&] { Dist(s, {0.5, 0.5}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("make_dist divides by the total") {
  const auto s = OutcomeSpace::of_size(4);
  const std::vector<double> w = {1, 2, 3, 4};
  const Dist d = make_dist(s, w);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d[i] == doctest::Approx(w[i] / 10.0).epsilon(1e-15));
  CHECK(error_of([&] { make_dist(s, std::vector<double>{0, 0, 0, 0}); }) == ErrorCode::AllZero);
  CHECK(error_of([&] { make_dist(s, std::vector<double>{1, -1, 1, 1}); }) == ErrorCode::NegativeWeight);
}

TEST_CASE("support, absolute continuity, total variation") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist p(s, {0.5, 0.5, 0.0});
  const Dist q(s, {0.25, 0.25, 0.5});
  CHECK(p.support() == std::vector<std::size_t>{0, 1});
  CHECK(absolutely_continuous(p, q));
  CHECK_FALSE(absolutely_continuous(q, p));
  CHECK(total_variation(p, q) == doctest::Approx(0.5));
  CHECK(total_variation(p, p) == 0.0);
  const Dist m = Dist::mix(p, q, 0.5);
  CHECK(m[2] == doctest::Approx(0.25));
}

TEST_CASE("expectations and feature means") {
  const auto s = OutcomeSpace::of_size(3);
  const Dist p(s, {0.2, 0.5, 0.3});
  const FeatureMap phi(s, {{0, 1, 2}, {1, 1, 1}});
  const auto m = feature_means(p, phi);
  CHECK(m[0] == doctest::Approx(1.1));
  CHECK(m[1] == doctest::Approx(1.0));
  const auto h = phi.combine(std::vector<double>{2.0, -1.0}, 0.5);
  CHECK(h == std::vector<double>{-0.5, 1.5, 3.5});
  CHECK(phi.max_column_norm() == doctest::Approx(std::sqrt(5.0)));
  CHECK(expectation(p, FunctionOnSpace(s, {1, 2, 3})) == doctest::Approx(2.1));
}

TEST_CASE("spaces must match") {
  const Dist a(OutcomeSpace({"a", "b"}), {0.5, 0.5});
  const Dist b(OutcomeSpace({"a", "c"}), {0.5, 0.5});
  CHECK(error_of([&] { require_same_space(a.space(), b.space(), "test"); }) == ErrorCode::SpaceMismatch);
}

TEST_CASE("random distributions are seeded and respect the floor") {
  const auto s = OutcomeSpace::of_size(7);
  const Dist a = random_dist(s, 42, 1e-3);
  const Dist b = random_dist(s, 42, 1e-3);
  CHECK(a == b);
  for (double m : a.masses()) CHECK(m >= 1e-3 - 1e-15);
  CHECK(error_of([&] { random_dist(s, 1, 1.0 / 7.0); }) == ErrorCode::BadMinMass);
  const auto inst = random_instance(5, 6, 3);
  CHECK(inst.phi.num_features() == 3);
  for (double m : inst.q.masses()) CHECK(m >= 1e-2 / 6 - 1e-15);
}
