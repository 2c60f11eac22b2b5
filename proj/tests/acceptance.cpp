// Acceptance battery: one PASS/FAIL line per criterion, each with its
// runtime limit. Exit status is nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "rfgan/commands.hpp"
#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/estimators.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/verify.hpp"

using namespace rfgan;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s; %.3fs (limit %gs)%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs,
              limit_s, in_time ? "" : " over time");
  std::fflush(stdout);
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome suite_outcome(const std::string& name, std::uint64_t seed, std::size_t count) {
  const auto sr = run_suite(name, seed, count);
  std::ostringstream d;
  d << sr.pass_count << "/" << sr.instance_count << " passed";
  for (const auto& [k, tol] : sr.tolerances) d << ", " << k << " " << g(sr.worst.at(k)) << " <= " << g(tol);
  return {sr.all_passed() && sr.instance_count == count, d.str()};
}

std::string instance(const std::string& name) { return std::string(RFGAN_SOURCE_DIR) + "/instances/" + name; }

// KL(P||Q) by direct summation for the two-point pair.
double two_point_oracle() { return 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25); }

// The mismatch instance: family e^{theta [x = b]} over uniform, data
// (0.2, 0.5, 0.3), statistic phi = (0, 1, 2), unit l2 ball.
const OutcomeSpace abc({"a", "b", "c"});

FitProblem mismatch() {
  const Dist base(abc, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  return FitProblem{ExpFamily{base, FeatureMap(abc, {{0.0, 1.0, 0.0}})}, Dist(abc, {0.2, 0.5, 0.3}),
                    FeatureMap(abc, {{0.0, 1.0, 2.0}}), "kl", ExtReal(1.0)};
}

// Grid over theta, ternary search over the 1-D discriminator coefficient.
double fgan_grid_oracle(double step) {
  const double pm = 0.5 + 2 * 0.3;
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
  const auto steps = static_cast<long>(std::llround(40.0 / step));
  for (long i = 0; i <= steps; ++i) best = std::min(best, inner(-20.0 + i * step));
  return best;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
  criterion(1, "generator catalog", 1.0, [] {
    std::string bad;
    for (const auto& name : builtin_names()) {
      if (!check_generator(builtin(name)).all_passed()) bad += " " + name;
    }
    return Outcome{bad.empty(), bad.empty() ? std::to_string(builtin_names().size()) + " builtins pass"
                                            : "failed:" + bad};
  });

  criterion(2, "variational representation on full space", 2.0,
            [] { return suite_outcome("variational_full", 20261015, 100); });

  criterion(3, "strong duality", 60.0, [] { return suite_outcome("duality", 20261015, 50); });

  criterion(4, "moment projection", 10.0, [] {
    const auto sr = run_suite("moment_projection", 20261015, 25);
    std::size_t feasible = 0, infeasible = 0;
    for (const auto& r : sr.records) (r.params.at("kind") == "feasible" ? feasible : infeasible)++;
    auto o = suite_outcome("moment_projection", 20261015, 25);
    o.ok = o.ok && feasible == 20 && infeasible == 5;
    o.detail += ", " + std::to_string(feasible) + " feasible, " + std::to_string(infeasible) + " infeasible";
    return o;
  });

  criterion(5, "two-point completeness", 1.0, [] {
    const OutcomeSpace s({"x1", "x2"});
    const Dist p(s, {0.5, 0.5}), q(s, {0.75, 0.25});
    const auto r = restricted_div_primal(builtin("kl"), p, q,
                                         DiscriminatorSpec::linear_ball(FeatureMap(s, {{0.0, 1.0}}), 2.0,
                                                                        ExtReal::pos_inf()));
    const double oracle = two_point_oracle();
    const double err = std::abs(r.value.to_double() - oracle);
    const double closed_err = std::abs(df_closed(builtin("kl"), p, q).value.to_double() - oracle);
    return Outcome{err <= 1e-6 && closed_err <= 1e-6 && std::abs(oracle - 0.143841) < 5e-7,
                   "value " + std::to_string(r.value.to_double()) + ", oracle " + std::to_string(oracle) +
                       ", error " + g(err)};
  });

  criterion(6, "sandwich and monotonicity", 10.0, [] { return suite_outcome("sandwich", 20261015, 50); });

  criterion(7, "GMM agreement without mismatch", 30.0, [] { return suite_outcome("gmm_agreement", 20261015, 10); });

  criterion(8, "R-functional properties", 2.0, [] { return suite_outcome("r_functional", 20261015, 100); });

  criterion(9, "linear KL-GAN versus MLE and GMM", 30.0, [] {
    const auto prob = mismatch();
    const auto fg = fit_linear_fgan(prob);
    const auto mle = fit_mle(prob);
    const auto gmm = fit_gmm(prob);
    const double oracle = fgan_grid_oracle(1e-4);
    const double obj = fg.objective.to_double();
    const auto dual = restricted_div_dual(builtin("kl"), prob.data, fg.q_star,
                                          DiscriminatorSpec::linear_ball(*prob.phi, 2.0, 1.0));
    const double rel_dual = std::abs(dual.value.to_double() - obj) / std::max(1.0, std::abs(obj));
    const double rel_oracle = std::abs(oracle - obj) / std::max(1.0, std::abs(oracle));
    const double tv_mle = total_variation(fg.q_star, mle.q_star);
    const double tv_gmm = total_variation(fg.q_star, gmm.q_star);
    const bool ok = fg.status == SolveStatus::Converged && rel_dual <= 1e-3 && rel_oracle <= 1e-3 &&
                    tv_mle >= 1e-3 && tv_gmm >= 1e-3;
    return Outcome{ok, "objective " + g(obj) + ", grid oracle " + g(oracle) + ", dual recompute rel " +
                           g(rel_dual) + ", TV to MLE " + g(tv_mle) + ", TV to GMM " + g(tv_gmm)};
  });

  criterion(10, "deterministic reports", 5.0, [] {
    const auto dir = std::filesystem::temp_directory_path() / "rfgan_acceptance";
    std::filesystem::create_directories(dir);
    const std::vector<std::function<CommandOutput()>> commands = {
        [] { return cmd_check_generator("kl"); },
        [] { return cmd_divergence(instance("two_point_kl.json"), "P", "Q", "variational"); },
        [] { return cmd_primal(instance("two_point_kl.json")); },
        [] { return cmd_dual(instance("penalized_hellinger.json")); },
        [] { return cmd_gap(instance("two_point_kl.json")); },
        [] { return cmd_fit(instance("mismatch.json"), "fgan"); },
        [] { return cmd_verify_suite("duality", 5, 8); },
    };
    std::size_t same = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const auto a = (dir / ("a" + std::to_string(i) + ".json")).string();
      const auto b = (dir / ("b" + std::to_string(i) + ".json")).string();
      write_atomic(a, commands[i]().report);
      write_atomic(b, commands[i]().report);
      const auto ta = read_file(a);
      if (!ta.empty() && ta == read_file(b)) ++same;
    }
    std::filesystem::remove_all(dir);
    return Outcome{same == commands.size(),
                   std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical"};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
