#include "rfgan/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/error.hpp"
#include "rfgan/estimators.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/instance.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/verify.hpp"

namespace rfgan {

namespace {

using ojson = nlohmann::ordered_json;

ojson num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return round12(v);
}

ojson num(const ExtReal& v) { return num(v.to_double()); }

template <class Range>
ojson nums(const Range& r) {
  ojson a = ojson::array();
  for (double v : r) a.push_back(num(v));
  return a;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string fmt(const ExtReal& v) { return fmt(v.to_double()); }

template <class Range>
std::string fmt_list(const Range& r) {
  std::string s;
  for (double v : r) s += (s.empty() ? "" : " ") + fmt(v);
  return s.empty() ? "-" : s;
}

class Table {
 public:
  explicit Table(std::string title) : title_(std::move(title)) {}
  void row(const std::string& k, const std::string& v) { rows_.emplace_back(k, v); }
  std::string str() const {
    std::size_t w = 0;
    for (const auto& [k, v] : rows_) w = std::max(w, k.size());
    std::string out = title_ + "\n";
    for (const auto& [k, v] : rows_) out += "  " + k + std::string(w - k.size() + 2, ' ') + v + "\n";
    return out;
  }

 private:
  std::string title_;
  std::vector<std::pair<std::string, std::string>> rows_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

ojson envelope(const std::string& command, ojson config) {
  ojson r;
  r["schema"] = kReportSchema;
  r["command"] = command;
  r["config"] = std::move(config);
  return r;
}

std::string finish(ojson& r, const std::string& status, int exit_code) {
  r["status"] = status;
  r["exit_code"] = exit_code;
  return r.dump(2) + "\n";
}

struct Loaded {
  InstanceFile inst;
  std::uint64_t seed;
  ojson config;
};

Loaded load(const std::string& path, const CommandOptions& opts) {
  Loaded l{load_instance(path), 0, {}};
  l.seed = opts.seed.value_or(l.inst.seed);
  const auto canon = ojson::parse(serialize_instance(l.inst));
  l.config["instance"] = path;
  l.config["seed"] = l.seed;
  l.config["generator"] = canon["generator"];
  l.config["p"] = canon["p"];
  l.config["q"] = canon["q"];
  l.config["discriminator"] = canon["discriminator"];
  l.config["solver"] = canon["solver"];
  return l;
}

ojson solve_json(const SolveReport& s) {
  ojson j;
  j["value"] = num(s.value);
  j["status"] = to_string(s.status);
  j["iterations"] = s.iterations;
  j["residual"] = num(s.residual);
  j["attained"] = s.attained;
  j["capped"] = s.capped;
  if (!s.coefficients.empty()) {
    j["coefficients"] = nums(s.coefficients);
    j["intercept"] = num(s.intercept);
  }
  if (s.discriminator) j["discriminator"] = nums(s.discriminator->values());
  if (s.intermediate) j["intermediate"] = nums(s.intermediate->masses());
  if (!s.theta.empty()) j["theta"] = nums(s.theta);
  if (!s.certificate.empty()) j["certificate"] = nums(s.certificate);
  if (s.gradient_check > 0.0) j["gradient_check"] = num(s.gradient_check);
  return j;
}

void solve_rows(Table& t, const SolveReport& s, const std::string& prefix = "") {
  t.row(prefix + "value", fmt(s.value));
  t.row(prefix + "status", to_string(s.status));
  t.row(prefix + "iterations", std::to_string(s.iterations));
  t.row(prefix + "residual", fmt(s.residual));
  if (!s.coefficients.empty()) {
    t.row(prefix + "coefficients", fmt_list(s.coefficients));
    t.row(prefix + "intercept", fmt(s.intercept));
  }
  if (s.discriminator) t.row(prefix + "discriminator", fmt_list(s.discriminator->values()));
  if (s.intermediate) t.row(prefix + "intermediate", fmt_list(s.intermediate->masses()));
  if (!s.theta.empty()) t.row(prefix + "theta", fmt_list(s.theta));
  if (!s.certificate.empty()) t.row(prefix + "certificate", fmt_list(s.certificate));
}

std::string per_outcome_csv(const OutcomeSpace& space, const std::string& column, std::span<const double> v) {
  std::string csv = "outcome," + column + "\n";
  for (std::size_t i = 0; i < v.size(); ++i) csv += csv_field(space.labels()[i]) + "," + fmt(v[i]) + "\n";
  return csv;
}

int solver_exit(SolveStatus s) { return s == SolveStatus::NotConverged ? kExitNotConverged : kExitOk; }

}  // namespace

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

void write_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::ValidationError, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::ValidationError, "cannot move report into '" + path + "': " + ec.message());
  }
}

std::string error_report(const std::string& command, const std::string& error_code, const std::string& message,
                         int exit_code) {
  ojson r = envelope(command, ojson::object());
  r["error"] = {{"code", error_code}, {"message", message}};
  return finish(r, "error", exit_code);
}

CommandOutput cmd_check_generator(const std::string& name, const CommandOptions&) {
  const FGenerator g = builtin(name);
  const CheckReport rep = check_generator(g);
  ojson r = envelope("check-generator", {{"generator", name}});
  ojson entries = ojson::array();
  Table t("check-generator " + name);
  std::string csv = "check,passed,worst,detail\n";
  for (const auto& e : rep.entries) {
    entries.push_back({{"name", e.name}, {"passed", e.passed}, {"worst", num(e.worst)}, {"detail", e.detail}});
    t.row(e.name, std::string(e.passed ? "pass" : "FAIL") + "  worst " + fmt(e.worst));
    csv += csv_field(e.name) + "," + (e.passed ? "true" : "false") + "," + fmt(e.worst) + "," + csv_field(e.detail) + "\n";
  }
  r["results"] = {{"generator", g.name},
                  {"all_passed", rep.all_passed()},
                  {"strictly_convex", g.strictly_convex},
                  {"fprime_at_infinity", num(g.fprime_at_infinity)},
                  {"entries", entries},
                  {"notes", rep.notes}};
  const bool ok = rep.all_passed();
  t.row("result", ok ? "all checks passed" : "some checks failed");
  const int code = ok ? kExitOk : kExitValidation;
  return {finish(r, ok ? "ok" : "failed", code), t.str(), csv, code};
}

CommandOutput cmd_divergence(const std::string& instance, const std::string& p_name, const std::string& q_name,
                             const std::string& mode, const CommandOptions& opts) {
  if (mode != "closed" && mode != "variational")
    throw Error(ErrorCode::ValidationError, "unknown mode '" + mode + "' (expected closed or variational)");
  Loaded l = load(instance, opts);
  const Dist p = l.inst.dist(p_name);
  const Dist q = l.inst.dist(q_name);
  const FGenerator g = builtin(l.inst.generator);
  const DivergenceValue dv = mode == "closed" ? df_closed(g, p, q) : df_variational_full(g, p, q);

  l.config["p"] = p_name;
  l.config["q"] = q_name;
  l.config["mode"] = mode;
  l.config.erase("discriminator");
  l.config.erase("solver");
  ojson r = envelope("divergence", l.config);
  ojson res;
  res["generator"] = g.name;
  res["mode"] = mode;
  res["value"] = num(dv.value);
  res["capped"] = dv.capped;
  res["absolutely_continuous"] = absolutely_continuous(p, q);
  res["attained_h"] = dv.attained_h ? nums(dv.attained_h->values()) : ojson(nullptr);
  r["results"] = res;
  r["flags"] = {{"capped", dv.capped}, {"attained", dv.attained_h.has_value() && !dv.capped}, {"not_converged", false}};

  Table t("divergence " + g.name + " (" + mode + ")");
  t.row("D_f(" + p_name + " || " + q_name + ")", fmt(dv.value));
  t.row("capped", dv.capped ? "yes" : "no");
  if (dv.attained_h) t.row("attained h", fmt_list(dv.attained_h->values()));
  std::string csv = dv.attained_h ? per_outcome_csv(p.space(), "h", dv.attained_h->values())
                                  : std::string("quantity,value\nvalue,") + fmt(dv.value) + "\n";
  return {finish(r, "ok", kExitOk), t.str(), csv, kExitOk};
}

CommandOutput cmd_primal(const std::string& instance, const CommandOptions& opts) {
  Loaded l = load(instance, opts);
  const FGenerator g = builtin(l.inst.generator);
  const Dist p = l.inst.dist(l.inst.p);
  const Dist q = l.inst.dist(l.inst.q);
  const SolveReport s = regularized_div_primal(g, p, q, l.inst.regularizer(), l.inst.primal_config(l.seed));
  ojson r = envelope("primal", l.config);
  r["results"] = solve_json(s);
  r["flags"] = {{"capped", s.capped}, {"attained", s.attained}, {"not_converged", s.status == SolveStatus::NotConverged}};
  Table t("primal " + g.name);
  solve_rows(t, s);
  std::string csv;
  if (s.discriminator) {
    csv = per_outcome_csv(p.space(), "h", s.discriminator->values());
  } else {
    csv = "coefficient,value\n";
    for (std::size_t j = 0; j < s.coefficients.size(); ++j) csv += "a" + std::to_string(j) + "," + fmt(s.coefficients[j]) + "\n";
    csv += "intercept," + fmt(s.intercept) + "\n";
  }
  const int code = solver_exit(s.status);
  return {finish(r, to_string(s.status), code), t.str(), csv, code};
}

CommandOutput cmd_dual(const std::string& instance, const CommandOptions& opts) {
  Loaded l = load(instance, opts);
  const FGenerator g = builtin(l.inst.generator);
  const Dist p = l.inst.dist(l.inst.p);
  const Dist q = l.inst.dist(l.inst.q);
  const SolveReport s = restricted_div_dual(g, p, q, l.inst.regularizer(), l.inst.dual_config(l.seed));
  ojson r = envelope("dual", l.config);
  r["results"] = solve_json(s);
  r["flags"] = {{"capped", s.capped}, {"attained", s.attained}, {"not_converged", s.status == SolveStatus::NotConverged}};
  Table t("dual " + g.name);
  solve_rows(t, s);
  std::string csv = s.intermediate ? per_outcome_csv(p.space(), "p_prime", s.intermediate->masses())
                                   : std::string("quantity,value\nvalue,") + fmt(s.value) + "\n";
  const int code = solver_exit(s.status);
  return {finish(r, to_string(s.status), code), t.str(), csv, code};
}

CommandOutput cmd_gap(const std::string& instance, const CommandOptions& opts) {
  Loaded l = load(instance, opts);
  const FGenerator g = builtin(l.inst.generator);
  const Dist p = l.inst.dist(l.inst.p);
  const Dist q = l.inst.dist(l.inst.q);
  const GapReport gr =
      duality_gap(g, p, q, l.inst.regularizer(), l.inst.primal_config(l.seed), l.inst.dual_config(l.seed));
  ojson r = envelope("gap", l.config);
  ojson res;
  res["primal_value"] = num(gr.primal.value);
  res["dual_value"] = num(gr.dual.value);
  res["absolute_gap"] = num(gr.absolute_gap);
  res["relative_gap"] = num(gr.relative_gap);
  res["iterate_violation"] = num(gr.iterate_violation);
  res["applicable"] = gr.applicable;
  res["primal"] = solve_json(gr.primal);
  res["dual"] = solve_json(gr.dual);
  r["results"] = res;
  const bool nc = gr.primal.status == SolveStatus::NotConverged || gr.dual.status == SolveStatus::NotConverged;
  r["flags"] = {{"capped", gr.primal.capped || gr.dual.capped},
                {"attained", gr.primal.attained && gr.dual.attained},
                {"not_converged", nc}};

  Table t("duality gap " + g.name);
  t.row("primal value", fmt(gr.primal.value) + "  (" + to_string(gr.primal.status) + ")");
  t.row("dual value", fmt(gr.dual.value) + "  (" + to_string(gr.dual.status) + ")");
  t.row("absolute gap", fmt(gr.absolute_gap));
  t.row("relative gap", fmt(gr.relative_gap));
  t.row("iterate violation", fmt(gr.iterate_violation));
  if (!gr.applicable) t.row("note", "shift invariance fails; the dual bound does not apply");
  std::string csv = "primal_value,dual_value,absolute_gap,relative_gap,iterate_violation\n" + fmt(gr.primal.value) +
                    "," + fmt(gr.dual.value) + "," + fmt(gr.absolute_gap) + "," + fmt(gr.relative_gap) + "," +
                    fmt(gr.iterate_violation) + "\n";
  const int code = nc ? kExitNotConverged : kExitOk;
  return {finish(r, nc ? "not_converged" : "converged", code), t.str(), csv, code};
}

CommandOutput cmd_fit(const std::string& instance, const std::string& estimator, const CommandOptions& opts) {
  Loaded l = load(instance, opts);
  const std::string est = estimator.empty() ? l.inst.estimator : estimator;
  if (est != "mle" && est != "gmm" && est != "fgan")
    throw Error(ErrorCode::ValidationError, "unknown estimator '" + est + "' (expected mle, gmm or fgan)");
  const FitProblem prob = l.inst.fit_problem();
  const FitReport fr = fit(est, prob, l.inst.estimator_config(l.seed));

  l.config["estimator"] = est;
  l.config["data"] = l.inst.data;
  const auto canon = ojson::parse(serialize_instance(l.inst));
  l.config["family"] = canon["family"];
  l.config.erase("p");
  l.config.erase("q");
  ojson r = envelope("fit", l.config);
  ojson res;
  res["estimator"] = fr.estimator;
  res["objective"] = num(fr.objective);
  res["q_star"] = nums(fr.q_star.masses());
  res["theta"] = nums(fr.theta);
  res["status"] = to_string(fr.status);
  res["iterations"] = fr.iterations;
  ojson cross;
  cross["mle"] = fr.cross.mle ? num(*fr.cross.mle) : ojson(nullptr);
  cross["gmm"] = fr.cross.gmm ? num(*fr.cross.gmm) : ojson(nullptr);
  cross["fgan"] = fr.cross.fgan ? num(*fr.cross.fgan) : ojson(nullptr);
  res["cross"] = cross;
  ojson starts = ojson::array();
  for (const auto& s : fr.starts)
    starts.push_back({{"theta0", nums(s.theta0)},
                      {"theta", nums(s.theta)},
                      {"value", num(s.value)},
                      {"iterations", s.iterations},
                      {"capped", s.capped}});
  res["starts"] = starts;
  res["notes"] = fr.notes;
  r["results"] = res;
  const bool nc = fr.status == SolveStatus::NotConverged;
  r["flags"] = {{"capped", false}, {"attained", !nc}, {"not_converged", nc}};

  Table t("fit " + est);
  t.row("objective", fmt(fr.objective));
  t.row("status", to_string(fr.status));
  t.row("q*", fmt_list(fr.q_star.masses()));
  if (!fr.theta.empty()) t.row("theta", fmt_list(fr.theta));
  t.row("KL(data || q*)", fr.cross.mle ? fmt(*fr.cross.mle) : "-");
  t.row("moment distance", fr.cross.gmm ? fmt(*fr.cross.gmm) : "-");
  t.row("restricted divergence", fr.cross.fgan ? fmt(*fr.cross.fgan) : "-");
  for (const auto& n : fr.notes) t.row("note", n);
  std::string csv = "criterion,value\n";
  csv += "mle," + (fr.cross.mle ? fmt(*fr.cross.mle) : "") + "\n";
  csv += "gmm," + (fr.cross.gmm ? fmt(*fr.cross.gmm) : "") + "\n";
  csv += "fgan," + (fr.cross.fgan ? fmt(*fr.cross.fgan) : "") + "\n";
  const int code = nc ? kExitNotConverged : kExitOk;
  return {finish(r, to_string(fr.status), code), t.str(), csv, code};
}

CommandOutput cmd_verify_suite(const std::string& suite, std::uint64_t seed, std::size_t count) {
  const SuiteResult sr = run_suite(suite, seed, count);
  ojson r = envelope("verify-suite", {{"suite", suite}, {"seed", seed}, {"count", count}});
  ojson res;
  res["suite"] = sr.suite;
  res["instance_count"] = sr.instance_count;
  res["pass_count"] = sr.pass_count;
  res["all_passed"] = sr.all_passed();
  res["worst_violation"] = num(sr.worst_violation);
  ojson worst = ojson::object(), tol = ojson::object();
  for (const auto& [k, v] : sr.worst) worst[k] = num(v);
  for (const auto& [k, v] : sr.tolerances) tol[k] = num(v);
  res["worst"] = worst;
  res["tolerances"] = tol;
  ojson records = ojson::array();
  for (const auto& rec : sr.records) {
    ojson values = ojson::object(), checks = ojson::object();
    for (const auto& [k, v] : rec.values) values[k] = num(v);
    for (const auto& [k, v] : rec.checks) checks[k] = num(v);
    records.push_back({{"seed", rec.seed},
                       {"params", rec.params},
                       {"values", values},
                       {"checks", checks},
                       {"passed", rec.passed},
                       {"violation", num(rec.violation)},
                       {"failures", rec.failures}});
  }
  res["records"] = records;
  r["results"] = res;

  Table t("verify-suite " + suite + " (seed " + std::to_string(seed) + ")");
  t.row("passed", std::to_string(sr.pass_count) + " / " + std::to_string(sr.instance_count));
  t.row("worst violation", fmt(sr.worst_violation));
  for (const auto& [k, v] : sr.worst) {
    auto it = sr.tolerances.find(k);
    t.row(k, fmt(v) + (it != sr.tolerances.end() ? "  (tol " + fmt(it->second) + ")" : ""));
  }
  std::string csv = "index,seed,passed,violation";
  for (const auto& [k, v] : sr.tolerances) csv += "," + csv_field(k);
  csv += "\n";
  for (std::size_t i = 0; i < sr.records.size(); ++i) {
    const auto& rec = sr.records[i];
    csv += std::to_string(i) + "," + std::to_string(rec.seed) + "," + (rec.passed ? "true" : "false") + "," +
           fmt(rec.violation);
    for (const auto& [k, v] : sr.tolerances) {
      auto it = rec.checks.find(k);
      csv += "," + (it != rec.checks.end() ? fmt(it->second) : std::string());
    }
    csv += "\n";
  }
  const int code = sr.all_passed() ? kExitOk : kExitValidation;
  return {finish(r, sr.all_passed() ? "ok" : "failed", code), t.str(), csv, code};
}

}  // namespace rfgan
