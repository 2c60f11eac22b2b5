#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rfgan/commands.hpp"
#include "rfgan/divergence.hpp"
#include "rfgan/dual.hpp"
#include "rfgan/error.hpp"
#include "rfgan/estimators.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/primal.hpp"
#include "rfgan/verify.hpp"

namespace py = pybind11;
using namespace rfgan;

namespace {

using Rows = std::vector<std::vector<double>>;

double to_py(const ExtReal& v) { return v.to_double(); }

OutcomeSpace space_of(std::size_t n) { return OutcomeSpace::of_size(n); }

Dist dist(const OutcomeSpace& s, const std::vector<double>& w) { return make_dist(s, w); }

DiscriminatorSpec spec_of(const OutcomeSpace& s, const std::optional<Rows>& features, double norm, double radius) {
  if (!features) return FullSpace{};
  return DiscriminatorSpec::linear_ball(FeatureMap(s, *features), norm, ExtReal::from_double(radius));
}

py::dict solve_dict(const SolveReport& r) {
  py::dict d;
  d["value"] = to_py(r.value);
  d["status"] = to_string(r.status);
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  d["attained"] = r.attained;
  d["capped"] = r.capped;
  d["coefficients"] = r.coefficients;
  d["intercept"] = r.intercept;
  d["discriminator"] = r.discriminator ? py::cast(r.discriminator->values()) : py::none();
  d["intermediate"] = r.intermediate ? py::cast(std::vector<double>(r.intermediate->masses().begin(),
                                                                    r.intermediate->masses().end()))
                                     : py::none();
  d["theta"] = r.theta;
  d["certificate"] = r.certificate;
  return d;
}

py::dict command_dict(const CommandOutput& o) {
  py::dict d;
  d["report"] = o.report;
  d["table"] = o.table;
  d["csv"] = o.csv;
  d["exit_code"] = o.exit_code;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rfgan, m) {
  m.doc() = "Restricted f-divergences on finite outcome spaces";

  // Owned by the module for the life of the interpreter.
  static py::handle error_type = py::exception<Error>(m, "Error", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error_type.ptr(), py::make_tuple(e.what(), to_string(e.code())).ptr());
    }
  });

  m.def("generators", &builtin_names);

  m.def("check_generator", [](const std::string& name) {
    const auto rep = check_generator(builtin(name));
    py::dict d;
    d["generator"] = rep.generator;
    d["passed"] = rep.all_passed();
    py::list entries;
    for (const auto& e : rep.entries)
      entries.append(py::dict(py::arg("name") = e.name, py::arg("passed") = e.passed, py::arg("worst") = e.worst,
                              py::arg("detail") = e.detail));
    d["entries"] = entries;
    d["notes"] = rep.notes;
    return d;
  }, py::arg("name"));

  m.def("divergence", [](const std::string& g, const std::vector<double>& p, const std::vector<double>& q,
                         const std::string& mode) {
    const auto s = space_of(p.size());
    if (mode == "closed") return to_py(df_closed(builtin(g), dist(s, p), dist(s, q)).value);
    if (mode == "variational") return to_py(df_variational_full(builtin(g), dist(s, p), dist(s, q)).value);
    throw Error(ErrorCode::ValidationError, "mode must be closed or variational");
  }, py::arg("generator"), py::arg("p"), py::arg("q"), py::arg("mode") = "closed");

  m.def("primal", [](const std::string& g, const std::vector<double>& p, const std::vector<double>& q,
                     const std::optional<Rows>& features, double norm, double radius) {
    const auto s = space_of(p.size());
    return solve_dict(restricted_div_primal(builtin(g), dist(s, p), dist(s, q), spec_of(s, features, norm, radius)));
  }, py::arg("generator"), py::arg("p"), py::arg("q"), py::arg("features") = py::none(), py::arg("norm") = 2.0,
        py::arg("radius") = 1.0);

  m.def("dual", [](const std::string& g, const std::vector<double>& p, const std::vector<double>& q,
                   const std::optional<Rows>& features, double norm, double radius) {
    const auto s = space_of(p.size());
    return solve_dict(restricted_div_dual(builtin(g), dist(s, p), dist(s, q), spec_of(s, features, norm, radius)));
  }, py::arg("generator"), py::arg("p"), py::arg("q"), py::arg("features") = py::none(), py::arg("norm") = 2.0,
        py::arg("radius") = 1.0);

  m.def("gap", [](const std::string& g, const std::vector<double>& p, const std::vector<double>& q,
                  const std::optional<Rows>& features, double norm, double radius) {
    const auto s = space_of(p.size());
    const auto gr = duality_gap(builtin(g), dist(s, p), dist(s, q), spec_of(s, features, norm, radius));
    py::dict d;
    d["primal"] = solve_dict(gr.primal);
    d["dual"] = solve_dict(gr.dual);
    d["absolute_gap"] = to_py(gr.absolute_gap);
    d["relative_gap"] = to_py(gr.relative_gap);
    d["iterate_violation"] = gr.iterate_violation;
    d["applicable"] = gr.applicable;
    return d;
  }, py::arg("generator"), py::arg("p"), py::arg("q"), py::arg("features") = py::none(), py::arg("norm") = 2.0,
        py::arg("radius") = 1.0);

  m.def("moment_projection", [](const std::vector<double>& p, const std::vector<double>& q, const Rows& features,
                                const std::string& g) {
    const auto s = space_of(p.size());
    return solve_dict(moment_projection(builtin(g), dist(s, p), dist(s, q), FeatureMap(s, features)));
  }, py::arg("p"), py::arg("q"), py::arg("features"), py::arg("generator") = "kl");

  m.def("fit", [](const std::string& estimator, const std::vector<double>& data, const std::optional<Rows>& phi,
                  const std::optional<std::vector<double>>& base, const std::optional<Rows>& psi,
                  const std::string& g, double radius, std::uint64_t seed) {
    const auto s = space_of(data.size());
    std::optional<GeneratorFamily> family;
    if (base) {
      if (!psi) throw Error(ErrorCode::ValidationError, "an exponential family needs psi");
      family = GeneratorFamily(ExpFamily{dist(s, *base), FeatureMap(s, *psi)});
    } else {
      family = GeneratorFamily(FullSimplex{s});
    }
    std::optional<FeatureMap> fm;
    if (phi) fm = FeatureMap(s, *phi);
    const FitProblem prob{*family, dist(s, data), fm, g, ExtReal::from_double(radius)};
    EstimatorConfig cfg;
    cfg.seed = seed;
    const auto fr = fit(estimator, prob, cfg);
    py::dict d;
    d["estimator"] = fr.estimator;
    d["objective"] = to_py(fr.objective);
    d["q_star"] = std::vector<double>(fr.q_star.masses().begin(), fr.q_star.masses().end());
    d["theta"] = fr.theta;
    d["status"] = to_string(fr.status);
    d["iterations"] = fr.iterations;
    py::dict cross;
    cross["mle"] = fr.cross.mle ? py::cast(to_py(*fr.cross.mle)) : py::none();
    cross["gmm"] = fr.cross.gmm ? py::cast(*fr.cross.gmm) : py::none();
    cross["fgan"] = fr.cross.fgan ? py::cast(to_py(*fr.cross.fgan)) : py::none();
    d["cross"] = cross;
    d["notes"] = fr.notes;
    return d;
  }, py::arg("estimator"), py::arg("data"), py::arg("phi") = py::none(), py::arg("base") = py::none(),
        py::arg("psi") = py::none(), py::arg("generator") = "kl", py::arg("radius") = 1.0, py::arg("seed") = 0);

  m.def("suites", &suite_names);

  m.def("run_suite", [](const std::string& name, std::uint64_t seed, std::size_t count) {
    SuiteResult sr;
    {
      py::gil_scoped_release release;
      sr = run_suite(name, seed, count);
    }
    py::dict d;
    d["suite"] = sr.suite;
    d["instance_count"] = sr.instance_count;
    d["pass_count"] = sr.pass_count;
    d["all_passed"] = sr.all_passed();
    d["worst_violation"] = sr.worst_violation;
    d["worst"] = sr.worst;
    d["tolerances"] = sr.tolerances;
    return d;
  }, py::arg("name"), py::arg("seed") = 0, py::arg("count") = 10);

  // Report-producing commands; each returns report, table, csv, exit_code.
  auto with_seed = [](std::optional<std::uint64_t> seed) {
    CommandOptions o;
    o.seed = seed;
    return o;
  };
  m.def("cmd_check_generator", [](const std::string& name) { return command_dict(cmd_check_generator(name)); },
        py::arg("name"));
  m.def("cmd_divergence", [=](const std::string& inst, const std::string& p, const std::string& q,
                              const std::string& mode, std::optional<std::uint64_t> seed) {
    return command_dict(cmd_divergence(inst, p, q, mode, with_seed(seed)));
  }, py::arg("instance"), py::arg("p"), py::arg("q"), py::arg("mode") = "closed", py::arg("seed") = py::none());
  m.def("cmd_primal", [=](const std::string& inst, std::optional<std::uint64_t> seed) {
    return command_dict(cmd_primal(inst, with_seed(seed)));
  }, py::arg("instance"), py::arg("seed") = py::none());
  m.def("cmd_dual", [=](const std::string& inst, std::optional<std::uint64_t> seed) {
    return command_dict(cmd_dual(inst, with_seed(seed)));
  }, py::arg("instance"), py::arg("seed") = py::none());
  m.def("cmd_gap", [=](const std::string& inst, std::optional<std::uint64_t> seed) {
    return command_dict(cmd_gap(inst, with_seed(seed)));
  }, py::arg("instance"), py::arg("seed") = py::none());
  m.def("cmd_fit", [=](const std::string& inst, const std::string& estimator, std::optional<std::uint64_t> seed) {
    return command_dict(cmd_fit(inst, estimator, with_seed(seed)));
  }, py::arg("instance"), py::arg("estimator") = "", py::arg("seed") = py::none());
  m.def("cmd_verify_suite", [](const std::string& suite, std::uint64_t seed, std::size_t count) {
    return command_dict(cmd_verify_suite(suite, seed, count));
  }, py::arg("suite"), py::arg("seed") = 0, py::arg("count") = 10);
}
