#include "modelkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace modelkit {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) fail(what + " must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(what + " must be finite");
  return v;
}

int positive_int(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0 || j.get<long long>() > 1 << 24)
    fail(what + " must be a non-negative integer");
  return j.get<int>();
}

std::uint64_t seed_value(const json& j, const std::string& what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(what + " must be an unsigned integer");
  return j.get<std::uint64_t>();
}

ScenarioKind parse_kind(const std::string& s) {
  if (s == "random") return ScenarioKind::Random;
  if (s == "interval") return ScenarioKind::Interval;
  if (s == "star") return ScenarioKind::Star;
  fail("unknown scenario kind \"" + s + "\"");
}

BcSpec parse_bc(const json& j) {
  BcSpec b;
  if (j.is_string()) {
    b.preset = j.get<std::string>();
  } else if (j.is_object()) {
    if (j.contains("alpha") || j.contains("beta")) {
      b.preset = "matrix";
      b.alpha = parse_matrix(require(j, "alpha", "boundary condition"));
      b.beta = parse_matrix(require(j, "beta", "boundary condition"));
    } else {
      const json& p = require(j, "preset", "boundary condition");
      if (!p.is_string()) fail("boundary condition preset must be a string");
      b.preset = p.get<std::string>();
      if (j.contains("eps")) b.eps = number(j["eps"], "dirichlet_eps eps");
      if (j.contains("seed")) b.seed = seed_value(j["seed"], "hermitian_random seed");
    }
  } else {
    fail("boundary condition must be a preset name or an object");
  }
  static const std::vector<std::string> presets = {"dissipative", "adjoint", "neumann", "dirichlet_eps",
                                                   "hermitian_random", "matrix"};
  if (std::find(presets.begin(), presets.end(), b.preset) == presets.end())
    fail("unknown boundary condition preset \"" + b.preset + "\"");
  if (b.preset == "dirichlet_eps" && !(b.eps > 0.0)) fail("dirichlet_eps needs eps > 0");
  return b;
}

ZGrid parse_grid(const json& j) {
  const json& re = require(j, "re", "z grid");
  const json& im = require(j, "im", "z grid");
  if (!re.is_array() || re.size() != 2 || !im.is_array() || im.size() != 2)
    fail("z grid \"re\" and \"im\" must be [lo, hi] pairs");
  ZGrid g;
  g.re0 = number(re[0], "z grid re");
  g.re1 = number(re[1], "z grid re");
  g.im0 = number(im[0], "z grid im");
  g.im1 = number(im[1], "z grid im");
  g.n_re = positive_int(require(j, "n_re", "z grid"), "z grid n_re");
  g.n_im = j.contains("n_im") ? positive_int(j["n_im"], "z grid n_im") : 1;
  if (g.n_re < 1 || g.n_im < 1) fail("z grid is empty");
  if (g.re1 < g.re0 || g.im1 < g.im0) fail("z grid bounds are reversed");
  return g;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

cplx parse_complex(const json& j) {
  if (j.is_number()) return {number(j, "complex entry"), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], "complex re"), number(j[1], "complex im")};
  fail("complex value must be a number or [re, im]");
}

Matrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) fail("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) fail("matrix rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail("matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_complex(row[c]);
  }
  return m;
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

std::string BcSpec::label() const {
  if (preset == "dirichlet_eps") return "dirichlet_eps(" + format_double(eps) + ")";
  if (preset == "hermitian_random") return "hermitian_random(" + std::to_string(seed) + ")";
  return preset;
}

BoundaryCondition BcSpec::build(int dim_e) const {
  if (preset == "dissipative") return dissipative_bc(dim_e);
  if (preset == "adjoint") return adjoint_bc(dim_e);
  if (preset == "neumann") return neumann_bc(dim_e);
  if (preset == "dirichlet_eps") return dirichlet_eps_bc(dim_e, eps);
  if (preset == "hermitian_random") return hermitian_random_bc(dim_e, seed);
  if (alpha.rows() != dim_e || alpha.cols() != dim_e || beta.rows() != dim_e || beta.cols() != dim_e)
    fail("boundary matrices must be " + std::to_string(dim_e) + "x" + std::to_string(dim_e));
  try {
    return BoundaryCondition(alpha, beta, label());
  } catch (const Error& e) {
    fail(std::string("boundary condition rejected: ") + e.what());
  }
}

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "both") return OutputFormat::Both;
  fail("format must be json, csv or both");
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "triple",        "m_function",  "m_difference", "herglotz", "gamma_trace",     "green",
      "krein",         "trace_formula", "theta_cross", "charfunc", "model_resolvent", "toeplitz",
      "triangular",    "dilation",    "hardy",        "model_map"};
  return names;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("top level must be an object");
  ExperimentConfig cfg;
  cfg.echo = doc;

  const json& sc = require(doc, "scenario", "top level");
  const json& kind = require(sc, "kind", "scenario");
  if (!kind.is_string()) fail("scenario kind must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "matrices") {
    cfg.a0 = parse_matrix(require(sc, "a0", "scenario"));
    cfg.pi = parse_matrix(require(sc, "pi", "scenario"));
    cfg.lambda = parse_matrix(require(sc, "lambda", "scenario"));
    cfg.scenario_label = sc.contains("label") && sc["label"].is_string() ? sc["label"].get<std::string>() : "matrices";
  } else {
    cfg.scenario.kind = parse_kind(k);
    if (sc.contains("seed")) cfg.scenario.seed = seed_value(sc["seed"], "scenario seed");
    if (sc.contains("dim_h")) cfg.scenario.dim_h = positive_int(sc["dim_h"], "scenario dim_h");
    if (sc.contains("dim_e")) cfg.scenario.dim_e = positive_int(sc["dim_e"], "scenario dim_e");
    if (sc.contains("n")) cfg.scenario.n = positive_int(sc["n"], "scenario n");
    if (sc.contains("shift")) cfg.scenario.shift = number(sc["shift"], "scenario shift");
    if (sc.contains("lengths")) {
      if (!sc["lengths"].is_array()) fail("scenario lengths must be an array");
      for (const auto& l : sc["lengths"]) cfg.scenario.lengths.push_back(number(l, "edge length"));
    }
  }

  if (doc.contains("boundary_conditions")) {
    if (!doc["boundary_conditions"].is_array()) fail("boundary_conditions must be an array");
    for (const auto& b : doc["boundary_conditions"]) cfg.bcs.push_back(parse_bc(b));
  }

  if (doc.contains("checks")) {
    if (!doc["checks"].is_array()) fail("checks must be an array");
    for (const auto& c : doc["checks"]) {
      if (!c.is_string()) fail("check names must be strings");
      const std::string name = c.get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) fail("unknown check \"" + name + "\"");
      if (std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end())
        fail("check \"" + name + "\" listed twice");
      cfg.checks.push_back(name);
    }
  }

  if (doc.contains("z_points")) {
    if (!doc["z_points"].is_array()) fail("z_points must be an array");
    for (const auto& z : doc["z_points"]) {
      ZPoint zp;
      if (z.is_object()) {
        zp.a0_index = positive_int(require(z, "a0_eigenvalue", "z point"), "a0_eigenvalue index");
      } else {
        zp.value = parse_complex(z);
      }
      cfg.z_points.push_back(zp);
    }
  }

  if (doc.contains("z_grids")) {
    if (!doc["z_grids"].is_array()) fail("z_grids must be an array");
    for (const auto& g : doc["z_grids"]) cfg.z_grids.push_back(parse_grid(g));
  }

  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) fail("tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        fail("tolerance for unknown check \"" + it.key() + "\"");
      if (it.key() == "triple") fail("the triple checks have fixed tolerances");
      double v = number(it.value(), "tolerance");
      if (v < 0.0) fail("tolerances must be non-negative");
      cfg.tolerances[it.key()] = v;
    }
  }

  if (doc.contains("strict")) {
    if (!doc["strict"].is_boolean()) fail("strict must be a boolean");
    cfg.strict = doc["strict"].get<bool>();
  }
  if (doc.contains("seed")) cfg.seed = seed_value(doc["seed"], "seed");

  if (doc.contains("output")) {
    const json& o = doc["output"];
    if (!o.is_object()) fail("output must be an object");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) fail("output dir must be a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("name")) {
      if (!o["name"].is_string() || o["name"].get<std::string>().empty()) fail("output name must be a string");
      cfg.out_name = o["name"].get<std::string>();
      if (cfg.out_name.find('/') != std::string::npos) fail("output name must not contain '/'");
    }
    if (o.contains("format")) {
      if (!o["format"].is_string()) fail("output format must be a string");
      cfg.format = parse_format(o["format"].get<std::string>());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(path + ": " + e.what());
  }
  return parse_config(doc);
}

std::vector<cplx> resolve_z_points(const ExperimentConfig& cfg, const TripleDescriptor& t) {
  RealVector d = t.a0_eigenvalues();
  std::sort(d.data(), d.data() + d.size());
  std::vector<cplx> out;
  for (const auto& z : cfg.z_points) {
    if (z.a0_index < 0) {
      out.push_back(z.value);
    } else {
      if (z.a0_index >= d.size()) fail("a0_eigenvalue index " + std::to_string(z.a0_index) + " out of range");
      out.push_back(d(z.a0_index));
    }
  }
  return out;
}

void apply_seed_override(ExperimentConfig& cfg, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end) fail("MODELKIT_SEED must be an unsigned integer");
  cfg.seed = v;
  cfg.scenario.seed = v;
}

TripleDescriptor build_triple(const ExperimentConfig& cfg) {
  auto checked = [&](TripleDescriptor t) {
    ValidationReport v = validate_triple(t);
    if (!v.ok()) {
      std::string msg = "scenario fails validation:";
      for (const auto& item : v.items)
        if (!item.pass) msg += " " + item.name + " (defect " + format_double(item.defect) + ")";
      fail(msg);
    }
    for (const auto& b : cfg.bcs) b.build(t.dim_e());
    resolve_z_points(cfg, t);
    return t;
  };
  try {
    if (cfg.a0) {
      if (cfg.a0->rows() != cfg.a0->cols() || cfg.pi->rows() != cfg.a0->rows() ||
          cfg.lambda->rows() != cfg.pi->cols() || cfg.lambda->cols() != cfg.pi->cols())
        fail("scenario matrices have inconsistent shapes");
      return checked(TripleDescriptor(*cfg.a0, *cfg.pi, *cfg.lambda, cfg.scenario_label));
    }
    return checked(build_scenario(cfg.scenario));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(std::string("scenario rejected: ") + e.what());
  }
}

}  // namespace modelkit
