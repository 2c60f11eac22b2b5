#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "rfgan/instance.hpp"
#include "support.hpp"

using namespace rfgan;

namespace {

const std::string kMinimal = R"({
  "space": ["x0", "x1"],
  "distributions": {"P": [0.5, 0.5], "Q": [3, 1]},
  "features": {"phi": [[0, 1]]},
  "discriminator": {"type": "linear_ball", "features": "phi", "radius": "inf"}
})";

std::string message_of(const std::string& text) {
  try {
    parse_instance(text, "case.json");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal instance with defaults") {
  const auto inst = parse_instance(kMinimal);
  CHECK(inst.generator == "kl");
  CHECK(inst.dist("Q")[0] == doctest::Approx(0.75));
  CHECK(inst.discriminator.kind == DiscriminatorEntry::Kind::LinearBall);
  CHECK(inst.discriminator.radius.is_pos_inf());
  CHECK(inst.discriminator.norm == 2.0);
  CHECK(inst.primal == PrimalSettings{});
  CHECK(inst.seed == 0);
  CHECK_FALSE(inst.family.has_value());
  const auto spec = inst.discriminator_spec();
  CHECK(spec.ball().phi.num_features() == 1);
}

TEST_CASE("round trip") {
  const auto a = parse_instance(kMinimal);
  const auto text = serialize_instance(a);
  const auto b = parse_instance(text);
  CHECK(a == b);
  CHECK(serialize_instance(b) == text);

  // Every shipped instance is already canonical up to a round trip.
  for (const auto& entry : std::filesystem::directory_iterator(std::string(RFGAN_SOURCE_DIR) + "/instances")) {
    const auto inst = load_instance(entry.path().string());
    CAPTURE(entry.path().string());
    CHECK(parse_instance(serialize_instance(inst)) == inst);
  }
}

TEST_CASE("numbers survive bit for bit") {
  auto inst = parse_instance(kMinimal);
  inst.distributions["R"] = {0.1, 1.0 / 3.0};
  inst.features["psi"] = {{std::nextafter(1.0, 2.0), -1e-300}};
  inst.dual.tol = 1.2345678901234567e-13;
  const auto back = parse_instance(serialize_instance(inst));
  CHECK(back.distributions.at("R")[1] == 1.0 / 3.0);
  CHECK(back.features.at("psi")[0][0] == std::nextafter(1.0, 2.0));
  CHECK(back.features.at("psi")[0][1] == -1e-300);
  CHECK(back.dual.tol == 1.2345678901234567e-13);
}

TEST_CASE("numbers may be written as decimal strings") {
  const auto inst = parse_instance(R"({"space": ["a", "b"], "distributions": {"P": ["0.25", "0.75"], "Q": [1, 1]}})");
  CHECK(inst.distributions.at("P")[0] == 0.25);
}

TEST_CASE("syntax errors carry the line") {
  const auto msg = message_of("{\n  \"space\": [\"a\",\n  ]\n}");
  CHECK(msg.find("ParseError") == 0);
  CHECK(msg.find("case.json:3:") != std::string::npos);
}

TEST_CASE("semantic errors name the field") {
  auto has = [](const std::string& msg, const std::string& part) {
    CAPTURE(msg);
    return msg.find(part) != std::string::npos;
  };
  CHECK(has(message_of(R"({"distributions": {}})"), "missing field 'space'"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {"P": [1, 2]}})"), "/distributions/P"));
  CHECK(has(message_of(R"({"space": ["a", "b"], "distributions": {"P": [1, -2]}})"), "/distributions/P/1"));
  CHECK(has(message_of(R"({"space": ["a", "a"], "distributions": {}})"), "/space/1"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {}, "colour": 1})"), "/colour: unknown field"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {}, "generator": "logistic"})"), "/generator"));
  CHECK(has(message_of(R"({"space": ["a", "b"], "distributions": {"P": [1, 1]}, "p": "X"})"), "/p"));
  CHECK(has(message_of(R"({"space": ["a", "b"], "distributions": {}, "discriminator": {"type": "linear_ball", "features": "phi"}})"),
            "/discriminator/features"));
  CHECK(has(message_of(R"({"space": ["a", "b"], "distributions": {}, "features": {"phi": [[1, 2, 3]]}})"),
            "/features/phi/0"));
  CHECK(has(message_of(R"({"space": ["a", "b"], "distributions": {}, "features": {"phi": [[1, 2]]},
      "discriminator": {"type": "linear_ball", "features": "phi", "radius": "big"}})"),
            "/discriminator/radius"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {}, "discriminator": {"type": "cone"}})"),
            "/discriminator/type"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {}, "solver": {"primal": {"tol": -1}}})"),
            "/solver/primal/tol"));
  CHECK(has(message_of(R"({"space": ["a"], "distributions": {}, "family": {"type": "exp_family", "base": "B", "features": "f"}})"),
            "/family/base"));
}

TEST_CASE("missing files") {
  CHECK(error_of([] { load_instance("/nonexistent/instance.json"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("regularizers and families") {
  const auto inst = parse_instance(R"({
    "space": ["a", "b", "c"],
    "distributions": {"data": [2, 5, 3], "base": [1, 1, 1]},
    "features": {"phi": [[0, 1, 2]], "psi": [[0, 1, 0]]},
    "discriminator": {"type": "quadratic_penalty", "features": "phi", "weight": 0.5},
    "family": {"type": "exp_family", "base": "base", "features": "psi"},
    "data": "data",
    "seed": 12
  })");
  CHECK(std::holds_alternative<QuadraticCoefficientPenalty>(inst.regularizer()));
  CHECK(error_of([&] { (void)inst.discriminator_spec(); }) == ErrorCode::ValidationError);
  const auto prob = inst.fit_problem();
  CHECK_FALSE(prob.family.is_full_simplex());
  CHECK(prob.data[1] == doctest::Approx(0.5));
  CHECK(inst.estimator_config(inst.seed).seed == 12);
}
