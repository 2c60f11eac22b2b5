#include "rfgan/instance.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rfgan/error.hpp"
#include "rfgan/fgen.hpp"

namespace rfgan {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorCode::ParseError, source_ + ": " + (path.empty() ? "/" : path) + ": " + what);
  }

  const json& field(const json& obj, const std::string& path, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!allowed.contains(k)) fail(path + "/" + k, "unknown field");
  }

  // Numbers may also be written as decimal strings; "inf" / "-inf" only
  // where infinities are allowed.
  double number(const json& v, const std::string& path, bool allow_inf = false) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (allow_inf && (s == "inf" || s == "+inf")) return kInf;
      if (allow_inf && s == "-inf") return -kInf;
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == s.size() && used > 0 && std::isfinite(d)) return d;
    }
    fail(path, allow_inf ? "expected a number or \"inf\"" : "expected a finite number");
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  int integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

  std::uint64_t seed(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    fail(path, "expected a nonnegative integer");
  }

  std::vector<double> vector(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "/" + std::to_string(i)));
    return out;
  }

 private:
  std::string source_;
};

json number_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

void read_settings(const Reader& r, const json& s, const std::string& path, InstanceFile& inst) {
  r.only_keys(s, path, {"primal", "dual", "fit"});
  if (auto it = s.find("primal"); it != s.end()) {
    const std::string pp = path + "/primal";
    r.only_keys(*it, pp, {"max_iters", "step_init", "tol"});
    if (it->contains("max_iters")) inst.primal.max_iters = r.integer((*it)["max_iters"], pp + "/max_iters");
    if (it->contains("step_init")) inst.primal.step_init = r.number((*it)["step_init"], pp + "/step_init");
    if (it->contains("tol")) inst.primal.tol = r.number((*it)["tol"], pp + "/tol");
  }
  if (auto it = s.find("dual"); it != s.end()) {
    const std::string pp = path + "/dual";
    r.only_keys(*it, pp, {"max_iters", "tol", "smoothing_eps", "step0"});
    if (it->contains("max_iters")) inst.dual.max_iters = r.integer((*it)["max_iters"], pp + "/max_iters");
    if (it->contains("tol")) inst.dual.tol = r.number((*it)["tol"], pp + "/tol");
    if (it->contains("smoothing_eps"))
      inst.dual.smoothing_eps = r.number((*it)["smoothing_eps"], pp + "/smoothing_eps");
    if (it->contains("step0")) inst.dual.step0 = r.number((*it)["step0"], pp + "/step0");
  }
  if (auto it = s.find("fit"); it != s.end()) {
    const std::string pp = path + "/fit";
    r.only_keys(*it, pp, {"starts", "max_iters", "tol", "value_tol", "fd_step", "inner_tol", "envelope_gradient"});
    auto& f = inst.fit;
    if (it->contains("starts")) f.starts = r.integer((*it)["starts"], pp + "/starts");
    if (it->contains("max_iters")) f.max_iters = r.integer((*it)["max_iters"], pp + "/max_iters");
    if (it->contains("tol")) f.tol = r.number((*it)["tol"], pp + "/tol");
    if (it->contains("value_tol")) f.value_tol = r.number((*it)["value_tol"], pp + "/value_tol");
    if (it->contains("fd_step")) f.fd_step = r.number((*it)["fd_step"], pp + "/fd_step");
    if (it->contains("inner_tol")) f.inner_tol = r.number((*it)["inner_tol"], pp + "/inner_tol");
    if (it->contains("envelope_gradient")) {
      const auto& v = (*it)["envelope_gradient"];
      if (!v.is_boolean()) r.fail(pp + "/envelope_gradient", "expected true or false");
      f.envelope_gradient = v.get<bool>();
    }
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

InstanceFile parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t col = 1;
    for (std::size_t i = byte; i > 0 && text[i - 1] != '\n'; --i) ++col;
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_of(text, byte)) + ":" + std::to_string(col) +
                                           ": malformed JSON (" + e.what() + ")");
  }
  const Reader r(source);
  r.only_keys(doc, "", {"space", "distributions", "features", "generator", "p", "q", "discriminator", "family", "data",
                        "estimator", "solver", "seed"});
  InstanceFile inst;

  const auto& space = r.field(doc, "", "space");
  if (!space.is_array()) r.fail("/space", "expected an array of labels");
  for (std::size_t i = 0; i < space.size(); ++i) inst.labels.push_back(r.string(space[i], "/space/" + std::to_string(i)));

  const auto& dists = r.field(doc, "", "distributions");
  if (!dists.is_object()) r.fail("/distributions", "expected an object of weight vectors");
  for (const auto& [name, w] : dists.items()) inst.distributions[name] = r.vector(w, "/distributions/" + name);

  if (auto it = doc.find("features"); it != doc.end()) {
    if (!it->is_object()) r.fail("/features", "expected an object of matrices");
    for (const auto& [name, m] : it->items()) {
      const std::string path = "/features/" + name;
      if (!m.is_array()) r.fail(path, "expected an array of rows");
      auto& rows = inst.features[name];
      for (std::size_t j = 0; j < m.size(); ++j) rows.push_back(r.vector(m[j], path + "/" + std::to_string(j)));
    }
  }

  if (doc.contains("generator")) inst.generator = r.string(doc["generator"], "/generator");
  if (doc.contains("p")) inst.p = r.string(doc["p"], "/p");
  if (doc.contains("q")) inst.q = r.string(doc["q"], "/q");
  if (doc.contains("data")) inst.data = r.string(doc["data"], "/data");
  if (doc.contains("estimator")) inst.estimator = r.string(doc["estimator"], "/estimator");
  if (doc.contains("seed")) inst.seed = r.seed(doc["seed"], "/seed");

  if (auto it = doc.find("discriminator"); it != doc.end()) {
    const std::string path = "/discriminator";
    if (!it->is_object()) r.fail(path, "expected an object");
    const auto type = r.string(r.field(*it, path, "type"), path + "/type");
    auto& d = inst.discriminator;
    if (type == "full_space") {
      r.only_keys(*it, path, {"type"});
      d.kind = DiscriminatorEntry::Kind::FullSpace;
    } else if (type == "linear_ball") {
      r.only_keys(*it, path, {"type", "features", "norm", "radius"});
      d.kind = DiscriminatorEntry::Kind::LinearBall;
      d.features = r.string(r.field(*it, path, "features"), path + "/features");
      if (it->contains("norm")) d.norm = r.number((*it)["norm"], path + "/norm", true);
      if (it->contains("radius")) d.radius = ExtReal::from_double(r.number((*it)["radius"], path + "/radius", true));
    } else if (type == "quadratic_penalty") {
      r.only_keys(*it, path, {"type", "features", "weight"});
      d.kind = DiscriminatorEntry::Kind::QuadraticPenalty;
      d.features = r.string(r.field(*it, path, "features"), path + "/features");
      if (it->contains("weight")) d.weight = r.number((*it)["weight"], path + "/weight");
    } else {
      r.fail(path + "/type", "unknown discriminator '" + type + "' (expected full_space, linear_ball or quadratic_penalty)");
    }
  }

  if (auto it = doc.find("family"); it != doc.end()) {
    const std::string path = "/family";
    if (!it->is_object()) r.fail(path, "expected an object");
    const auto type = r.string(r.field(*it, path, "type"), path + "/type");
    FamilyEntry f;
    if (type == "full_simplex") {
      r.only_keys(*it, path, {"type"});
    } else if (type == "exp_family") {
      r.only_keys(*it, path, {"type", "base", "features"});
      f.kind = FamilyEntry::Kind::ExpFamily;
      f.base = r.string(r.field(*it, path, "base"), path + "/base");
      f.features = r.string(r.field(*it, path, "features"), path + "/features");
    } else {
      r.fail(path + "/type", "unknown family '" + type + "' (expected full_simplex or exp_family)");
    }
    inst.family = f;
  }

  if (auto it = doc.find("solver"); it != doc.end()) read_settings(r, *it, "/solver", inst);

  try {
    validate_instance(inst);
  } catch (const Error& e) {
    throw Error(e.code() == ErrorCode::ValidationError ? ErrorCode::ParseError : e.code(),
                source + ": " + std::string(e.what()).substr(std::string(to_string(e.code())).size() + 2));
  }
  return inst;
}

void validate_instance(const InstanceFile& inst) {
  auto fail = [](const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ValidationError, path + ": " + what);
  };
  const std::size_t n = inst.labels.size();
  if (n == 0) fail("/space", "needs at least one outcome");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i)
    if (!seen.insert(inst.labels[i]).second) fail("/space/" + std::to_string(i), "duplicate label '" + inst.labels[i] + "'");

  for (const auto& [name, w] : inst.distributions) {
    const std::string path = "/distributions/" + name;
    if (w.size() != n) fail(path, "has " + std::to_string(w.size()) + " weights for " + std::to_string(n) + " outcomes");
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] < 0.0) fail(path + "/" + std::to_string(i), "negative weight");
      total += w[i];
    }
    if (!(total > 0.0)) fail(path, "all weights are zero");
  }
  for (const auto& [name, rows] : inst.features) {
    const std::string path = "/features/" + name;
    if (rows.empty()) fail(path, "needs at least one feature row");
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[j].size() != n)
        fail(path + "/" + std::to_string(j),
             "has " + std::to_string(rows[j].size()) + " entries for " + std::to_string(n) + " outcomes");
  }

  auto need_dist = [&](const std::string& name, const std::string& path) {
    if (!inst.distributions.contains(name)) fail(path, "no distribution named '" + name + "'");
  };
  auto need_features = [&](const std::string& name, const std::string& path) {
    if (!inst.features.contains(name)) fail(path, "no feature map named '" + name + "'");
  };
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), inst.generator) == names.end())
    fail("/generator", "unknown generator '" + inst.generator + "'");
  if (inst.distributions.contains(inst.p) || inst.p != "P") need_dist(inst.p, "/p");
  if (inst.distributions.contains(inst.q) || inst.q != "Q") need_dist(inst.q, "/q");

  const auto& d = inst.discriminator;
  if (d.kind != DiscriminatorEntry::Kind::FullSpace) need_features(d.features, "/discriminator/features");
  if (d.kind == DiscriminatorEntry::Kind::LinearBall) {
    if (!(d.norm >= 1.0)) fail("/discriminator/norm", "must be at least 1");
    if (!(d.radius >= ExtReal(0.0))) fail("/discriminator/radius", "must be nonnegative");
  }
  if (d.kind == DiscriminatorEntry::Kind::QuadraticPenalty && !(d.weight > 0.0))
    fail("/discriminator/weight", "must be positive");

  if (inst.family && inst.family->kind == FamilyEntry::Kind::ExpFamily) {
    need_dist(inst.family->base, "/family/base");
    need_features(inst.family->features, "/family/features");
  }
  if (!inst.data.empty()) need_dist(inst.data, "/data");
  if (inst.estimator != "mle" && inst.estimator != "gmm" && inst.estimator != "fgan")
    fail("/estimator", "unknown estimator '" + inst.estimator + "' (expected mle, gmm or fgan)");

  if (inst.primal.max_iters <= 0) fail("/solver/primal/max_iters", "must be positive");
  if (!(inst.primal.tol > 0.0)) fail("/solver/primal/tol", "must be positive");
  if (!(inst.primal.step_init > 0.0)) fail("/solver/primal/step_init", "must be positive");
  if (inst.dual.max_iters <= 0) fail("/solver/dual/max_iters", "must be positive");
  if (!(inst.dual.tol > 0.0)) fail("/solver/dual/tol", "must be positive");
  if (!(inst.dual.smoothing_eps >= 0.0 && inst.dual.smoothing_eps <= 1e-3))
    fail("/solver/dual/smoothing_eps", "must lie in [0, 1e-3]");
  if (!(inst.dual.step0 > 0.0)) fail("/solver/dual/step0", "must be positive");
  if (inst.fit.starts <= 0) fail("/solver/fit/starts", "must be positive");
  if (inst.fit.max_iters <= 0) fail("/solver/fit/max_iters", "must be positive");
  if (!(inst.fit.fd_step > 0.0)) fail("/solver/fit/fd_step", "must be positive");
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

std::string serialize_instance(const InstanceFile& inst) {
  ojson doc;
  doc["space"] = inst.labels;
  ojson dists = ojson::object();
  for (const auto& [name, w] : inst.distributions) dists[name] = w;
  doc["distributions"] = dists;
  ojson feats = ojson::object();
  for (const auto& [name, rows] : inst.features) feats[name] = rows;
  doc["features"] = feats;
  doc["generator"] = inst.generator;
  doc["p"] = inst.p;
  doc["q"] = inst.q;

  ojson d;
  const auto& disc = inst.discriminator;
  switch (disc.kind) {
    case DiscriminatorEntry::Kind::FullSpace:
      d["type"] = "full_space";
      break;
    case DiscriminatorEntry::Kind::LinearBall:
      d["type"] = "linear_ball";
      d["features"] = disc.features;
      d["norm"] = number_json(disc.norm);
      d["radius"] = number_json(disc.radius.to_double());
      break;
    case DiscriminatorEntry::Kind::QuadraticPenalty:
      d["type"] = "quadratic_penalty";
      d["features"] = disc.features;
      d["weight"] = disc.weight;
      break;
  }
  doc["discriminator"] = d;
  if (inst.family) {
    ojson f;
    if (inst.family->kind == FamilyEntry::Kind::FullSimplex) {
      f["type"] = "full_simplex";
    } else {
      f["type"] = "exp_family";
      f["base"] = inst.family->base;
      f["features"] = inst.family->features;
    }
    doc["family"] = f;
  }
  if (!inst.data.empty()) doc["data"] = inst.data;
  doc["estimator"] = inst.estimator;

  ojson solver;
  solver["primal"] = {{"max_iters", inst.primal.max_iters}, {"step_init", inst.primal.step_init}, {"tol", inst.primal.tol}};
  solver["dual"] = {{"max_iters", inst.dual.max_iters},
                    {"tol", inst.dual.tol},
                    {"smoothing_eps", inst.dual.smoothing_eps},
                    {"step0", inst.dual.step0}};
  solver["fit"] = {{"starts", inst.fit.starts},
                   {"max_iters", inst.fit.max_iters},
                   {"tol", inst.fit.tol},
                   {"value_tol", inst.fit.value_tol},
                   {"fd_step", inst.fit.fd_step},
                   {"inner_tol", inst.fit.inner_tol},
                   {"envelope_gradient", inst.fit.envelope_gradient}};
  doc["solver"] = solver;
  doc["seed"] = inst.seed;
  return doc.dump(2) + "\n";
}

OutcomeSpace InstanceFile::space() const { return OutcomeSpace(labels); }

Dist InstanceFile::dist(const std::string& name) const {
  auto it = distributions.find(name);
  if (it == distributions.end()) throw Error(ErrorCode::ValidationError, "no distribution named '" + name + "'");
  return make_dist(space(), it->second);
}

FeatureMap InstanceFile::feature_map(const std::string& name) const {
  auto it = features.find(name);
  if (it == features.end()) throw Error(ErrorCode::ValidationError, "no feature map named '" + name + "'");
  return FeatureMap(space(), it->second);
}

RegularizerSpec InstanceFile::regularizer() const {
  if (discriminator.kind == DiscriminatorEntry::Kind::QuadraticPenalty)
    return QuadraticCoefficientPenalty{feature_map(discriminator.features), discriminator.weight};
  return IndicatorOf{discriminator_spec()};
}

DiscriminatorSpec InstanceFile::discriminator_spec() const {
  switch (discriminator.kind) {
    case DiscriminatorEntry::Kind::FullSpace:
      return FullSpace{};
    case DiscriminatorEntry::Kind::LinearBall:
      return DiscriminatorSpec::linear_ball(feature_map(discriminator.features), discriminator.norm,
                                            discriminator.radius);
    case DiscriminatorEntry::Kind::QuadraticPenalty:
      break;
  }
  throw Error(ErrorCode::ValidationError, "/discriminator: quadratic_penalty is a regularizer, not a class");
}

GeneratorFamily InstanceFile::generator_family() const {
  if (!family) throw Error(ErrorCode::ValidationError, "/family: missing");
  if (family->kind == FamilyEntry::Kind::FullSimplex) return FullSimplex{space()};
  return ExpFamily{dist(family->base), feature_map(family->features)};
}

FitProblem InstanceFile::fit_problem() const {
  if (data.empty()) throw Error(ErrorCode::ValidationError, "/data: missing");
  std::optional<FeatureMap> phi;
  if (discriminator.kind != DiscriminatorEntry::Kind::FullSpace) phi = feature_map(discriminator.features);
  const ExtReal radius =
      discriminator.kind == DiscriminatorEntry::Kind::LinearBall ? discriminator.radius : ExtReal::pos_inf();
  return FitProblem{generator_family(), dist(data), phi, generator, radius};
}

PrimalConfig InstanceFile::primal_config(std::uint64_t s) const {
  PrimalConfig c;
  c.max_iters = primal.max_iters;
  c.step_init = primal.step_init;
  c.tol = primal.tol;
  c.seed = s;
  return c;
}

DualConfig InstanceFile::dual_config(std::uint64_t s) const {
  DualConfig c;
  c.max_iters = dual.max_iters;
  c.tol = dual.tol;
  c.smoothing_eps = dual.smoothing_eps;
  c.step0 = dual.step0;
  c.seed = s;
  return c;
}

EstimatorConfig InstanceFile::estimator_config(std::uint64_t s) const {
  EstimatorConfig c;
  c.seed = s;
  c.starts = fit.starts;
  c.max_iters = fit.max_iters;
  c.tol = fit.tol;
  c.value_tol = fit.value_tol;
  c.fd_step = fit.fd_step;
  c.inner_tol = fit.inner_tol;
  c.envelope_gradient = fit.envelope_gradient;
  return c;
}

}  // namespace rfgan
