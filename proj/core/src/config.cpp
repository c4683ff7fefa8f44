#include "weyl/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "weyl/errors.hpp"
#include "weyl/spectra.hpp"

namespace weyl {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(path + "." + key, "unknown field");
  }
}

const json& required(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

double optional_number(const json& obj, const char* key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, path + "." + key);
}

Geometry parse_geometry(const json& g, const std::string& path) {
  only_keys(g, path, {"kind", "extent", "lower"});
  const std::string kind_name = text(required(g, "kind", path), path + ".kind");
  GeometryKind kind;
  try {
    kind = geometry_kind_from_string(kind_name);
  } catch (const ConfigError& e) {
    fail(path + ".kind", e.what());
  }
  std::vector<double> extent;
  std::vector<double> lower;
  if (g.contains("extent")) extent = numbers(g["extent"], path + ".extent");
  if (g.contains("lower")) lower = numbers(g["lower"], path + ".lower");
  auto need = [&](std::size_t n) {
    if (extent.size() != n) fail(path + ".extent", "expected " + std::to_string(n) + " value(s)");
    if (!lower.empty() && lower.size() != n) fail(path + ".lower", "expected " + std::to_string(n) + " value(s)");
  };
  try {
    switch (kind) {
      case GeometryKind::Line1D:
        if (!extent.empty() || !lower.empty()) fail(path, "Line1D takes no extent");
        return Geometry::line();
      case GeometryKind::Plane2D:
        if (!extent.empty() || !lower.empty()) fail(path, "Plane2D takes no extent");
        return Geometry::plane();
      case GeometryKind::Circle:
        need(1);
        if (!lower.empty()) fail(path + ".lower", "Circle is centered at 0");
        return Geometry::circle(extent[0]);
      case GeometryKind::Torus2D:
        need(2);
        if (!lower.empty()) fail(path + ".lower", "Torus2D is centered at 0");
        return Geometry::torus(extent[0], extent[1]);
      case GeometryKind::Interval:
        need(1);
        return Geometry::interval(extent[0], lower.empty() ? 0.0 : lower[0]);
      case GeometryKind::Rectangle:
        need(2);
        return Geometry::rectangle(extent[0], extent[1], lower.empty() ? 0.0 : lower[0],
                                   lower.empty() ? 0.0 : lower[1]);
    }
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    fail(path + ".extent", what);
  }
  fail(path + ".kind", "unsupported");
}

Potential parse_potential(const json& p, const std::string& path, int dim) {
  if (!p.is_object()) fail(path, "expected an object");
  const std::string form = text(required(p, "form", path), path + ".form");
  try {
    if (form == "Harmonic") {
      only_keys(p, path, {"form", "stiffness"});
      const auto k = numbers(required(p, "stiffness", path), path + ".stiffness");
      if (static_cast<int>(k.size()) != dim) fail(path + ".stiffness", "expected one value per axis");
      return Potential::harmonic(k);
    }
    if (form == "Polynomial") {
      only_keys(p, path, {"form", "coefficients"});
      const json& c = required(p, "coefficients", path);
      if (!c.is_array() || static_cast<int>(c.size()) != dim) {
        fail(path + ".coefficients", "expected one coefficient list per axis");
      }
      std::vector<std::vector<double>> coeffs;
      for (std::size_t a = 0; a < c.size(); ++a) {
        coeffs.push_back(numbers(c[a], path + ".coefficients[" + std::to_string(a) + "]"));
      }
      return Potential::polynomial(coeffs);
    }
    if (form == "Constant") {
      only_keys(p, path, {"form", "level"});
      return Potential::constant(dim, number(required(p, "level", path), path + ".level"));
    }
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    fail(path, what);
  }
  if (form == "Patched") fail(path + ".form", "Patched potentials are built by pair.mode = compactify");
  fail(path + ".form", "unknown potential form '" + form + "'");
}

SweepConfig parse_experiment(const json& e, const std::string& path, std::uint64_t seed) {
  only_keys(e, path,
            {"name", "model", "pair", "lambda", "hbar_grid", "checks", "grid", "tolerance", "epsilon", "mc_samples",
             "jobs", "strict"});
  SweepConfig c;
  c.seed = seed;
  c.name = text(required(e, "name", path), path + ".name");

  const json& m = required(e, "model", path);
  only_keys(m, path + ".model", {"geometry", "potential"});
  c.model.geometry = parse_geometry(required(m, "geometry", path + ".model"), path + ".model.geometry");
  c.model.potential =
      parse_potential(required(m, "potential", path + ".model"), path + ".model.potential", c.model.geometry.dim);

  if (e.contains("pair")) {
    const json& p = e["pair"];
    only_keys(p, path + ".pair", {"mode", "margin"});
    const std::string mode = text(required(p, "mode", path + ".pair"), path + ".pair.mode");
    if (mode == "compactify") {
      c.pair.mode = PairMode::Compactify;
    } else if (mode == "identical") {
      c.pair.mode = PairMode::Identical;
    } else if (mode == "none") {
      c.pair.mode = PairMode::None;
    } else {
      fail(path + ".pair.mode", "unknown pair mode '" + mode + "'");
    }
    c.pair.margin = optional_number(p, "margin", path + ".pair", c.pair.margin);
  }

  c.lambda = number(required(e, "lambda", path), path + ".lambda");
  c.hbar_grid = numbers(required(e, "hbar_grid", path), path + ".hbar_grid");

  const json& checks = required(e, "checks", path);
  if (!checks.is_array()) fail(path + ".checks", "expected an array of check names");
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string where = path + ".checks[" + std::to_string(i) + "]";
    try {
      const Check k = check_from_string(text(checks[i], where));
      if (c.has(k)) fail(where, "duplicate check");
      c.checks.push_back(k);
    } catch (const ConfigError& err) {
      const std::string what = err.what();
      if (what.rfind(where, 0) == 0) throw;
      fail(where, what);
    }
  }

  if (e.contains("grid")) {
    const json& g = e["grid"];
    const std::string gp = path + ".grid";
    only_keys(g, gp,
              {"resolution_factor", "safety_factor", "decay_action", "max_unknowns", "crossing_window",
               "max_refinements"});
    c.grid.resolution_factor = optional_number(g, "resolution_factor", gp, c.grid.resolution_factor);
    c.grid.safety_factor = optional_number(g, "safety_factor", gp, c.grid.safety_factor);
    c.grid.decay_action = optional_number(g, "decay_action", gp, c.grid.decay_action);
    if (g.contains("max_unknowns")) c.grid.max_unknowns = unsigned_integer(g["max_unknowns"], gp + ".max_unknowns");
    c.crossing_window = optional_number(g, "crossing_window", gp, c.crossing_window);
    if (g.contains("max_refinements")) {
      c.max_refinements = static_cast<int>(unsigned_integer(g["max_refinements"], gp + ".max_refinements"));
    }
  }
  c.tolerance = optional_number(e, "tolerance", path, c.tolerance);
  c.epsilon = optional_number(e, "epsilon", path, c.epsilon);
  if (e.contains("mc_samples")) c.mc_samples = unsigned_integer(e["mc_samples"], path + ".mc_samples");
  if (e.contains("jobs")) c.jobs = static_cast<unsigned>(unsigned_integer(e["jobs"], path + ".jobs"));
  if (e.contains("strict")) {
    if (!e["strict"].is_boolean()) fail(path + ".strict", "expected true or false");
    c.strict = e["strict"].get<bool>();
  }

  try {
    c.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(path + ": " + err.what());
  }
  return c;
}

ordered potential_json(const Potential& p) {
  ordered j;
  j["form"] = to_string(p.form());
  switch (p.form()) {
    case PotentialForm::Harmonic: j["stiffness"] = p.stiffness(); break;
    case PotentialForm::Polynomial: j["coefficients"] = p.coefficients(); break;
    case PotentialForm::Constant: j["level"] = p.level(); break;
    case PotentialForm::Patched:
      j["base"] = potential_json(p.base());
      j["mu_out"] = p.mu_out();
      j["lambda_ref"] = p.lambda_ref();
      j["ramp_width"] = p.ramp_width();
      break;
  }
  return j;
}

}  // namespace

ExperimentFile parse_experiment_file(const std::string& text_in) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  only_keys(doc, "config", {"$schema", "schema_version", "output_dir", "seed", "experiments"});
  ExperimentFile f;
  const json& v = required(doc, "schema_version", "config");
  if (!v.is_number_integer()) fail("schema_version", "expected an integer");
  f.schema_version = v.get<int>();
  if (f.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(f.schema_version) + " (supported: " +
                               std::to_string(kSchemaVersion) + ")");
  }
  if (doc.contains("output_dir")) f.output_dir = text(doc["output_dir"], "output_dir");
  if (doc.contains("seed")) f.seed = unsigned_integer(doc["seed"], "seed");
  const json& ex = required(doc, "experiments", "config");
  if (!ex.is_array() || ex.empty()) fail("experiments", "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const std::string path = "experiments[" + std::to_string(i) + "]";
    f.experiments.push_back(parse_experiment(ex[i], path, f.seed));
    if (!names.insert(f.experiments.back().name).second) {
      fail(path + ".name", "duplicate experiment name '" + f.experiments.back().name + "'");
    }
  }
  return f;
}

ExperimentFile load_experiment_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_experiment_file(os.str());
}

std::string canonical_json(const SweepConfig& c) {
  ordered j;
  j["name"] = c.name;
  ordered geometry;
  geometry["kind"] = to_string(c.model.geometry.kind);
  geometry["extent"] = std::vector<double>(c.model.geometry.extent.begin(),
                                           c.model.geometry.extent.begin() + c.model.geometry.dim);
  geometry["lower"] = std::vector<double>(c.model.geometry.lower.begin(),
                                          c.model.geometry.lower.begin() + c.model.geometry.dim);
  j["model"]["geometry"] = geometry;
  j["model"]["potential"] = potential_json(c.model.potential);
  j["pair"]["mode"] = to_string(c.pair.mode);
  j["pair"]["margin"] = c.pair.margin;
  j["lambda"] = c.lambda;
  j["hbar_grid"] = c.hbar_grid;
  j["checks"] = ordered::array();
  for (Check k : c.checks) j["checks"].push_back(to_string(k));
  j["grid"]["resolution_factor"] = c.grid.resolution_factor;
  j["grid"]["safety_factor"] = c.grid.safety_factor;
  j["grid"]["decay_action"] = c.grid.decay_action;
  j["grid"]["max_unknowns"] = c.grid.max_unknowns;
  j["grid"]["crossing_window"] = c.crossing_window;
  j["grid"]["max_refinements"] = c.max_refinements;
  j["tolerance"] = c.tolerance;
  j["epsilon"] = c.epsilon;
  j["mc_samples"] = c.mc_samples;
  j["seed"] = c.seed;
  return j.dump();
}

std::string config_fingerprint(const SweepConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string resolved_defaults(const ExperimentFile& file) {
  std::ostringstream os;
  os << "schema_version " << file.schema_version << "\n";
  os << "output_dir " << file.output_dir << "\n";
  os << "seed " << file.seed << "\n";
  os << "counting: eigenvalues < lambda - sigma, sigma = 1e-9 * max(1, |lambda|); pivot breakdown below "
     << kPivotTolerance << " * ||A|| doubles sigma up to " << kMaxShiftRetries << " times\n";
  os << "partition constant: c = 1.1 * max(sup(|dphi|^2 + |dpsi|^2), 2 sup|dphi|^2, 2 sup|dpsi|^2)\n";
  for (const auto& e : file.experiments) {
    os << "experiment " << e.name << ": " << to_string(e.model.geometry.kind) << ", "
       << e.model.potential.describe() << ", pair " << to_string(e.pair.mode);
    if (e.pair.mode != PairMode::None) os << " (margin " << e.pair.margin << ")";
    os << "\n  lambda " << e.lambda << ", hbar_grid [";
    for (std::size_t i = 0; i < e.hbar_grid.size(); ++i) os << (i ? ", " : "") << e.hbar_grid[i];
    os << "]\n  checks";
    for (Check k : e.checks) os << " " << to_string(k);
    os << "\n  grid: h <= hbar / (" << e.grid.resolution_factor << " * sqrt(lambda_max)); truncation V >= "
       << e.grid.safety_factor << " * lambda_max plus decay action " << e.grid.decay_action
       << "; max unknowns " << e.grid.max_unknowns << "\n";
    os << "  near-crossing window " << e.crossing_window << " sigma; up to " << e.max_refinements
       << " refinements at 1.5x resolution\n";
    os << "  tolerance " << e.tolerance << ", epsilon "
       << (e.epsilon > 0.0 ? std::to_string(e.epsilon) : std::string("0.05 * volume")) << ", mc_samples "
       << e.mc_samples << ", jobs " << e.jobs << (e.strict ? ", strict" : "") << "\n";
  }
  return os.str();
}

}  // namespace weyl
