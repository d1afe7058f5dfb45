#include "modelkit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "modelkit/charmodel.hpp"
#include "modelkit/dilation.hpp"
#include "modelkit/model.hpp"

namespace modelkit {

namespace {

constexpr const char* kVersion = "1.0.0";

using Clock = std::chrono::steady_clock;

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol = {
      {"m_function", 1e-10},  {"m_difference", 1e-10}, {"herglotz", 1e-10},      {"gamma_trace", 1e-12},
      {"green", 1e-10},       {"krein", 1e-10},        {"trace_formula", 1e-8},  {"theta_cross", 1e-10},
      {"charfunc", 1e-10},    {"model_resolvent", 1e-8}, {"toeplitz", 1e-8},     {"triangular", 1e-8},
      {"dilation", 1e-10},    {"hardy", 5e-3},         {"model_map", 1e-5}};
  return tol;
}

// Discretization error of the interval M-function against the continuum formula.
constexpr double kIntervalMTol = 1e-3;

std::string z_text(const std::optional<cplx>& z) {
  if (!z) return "-";
  std::ostringstream os;
  os.precision(17);
  os << z->real() << "," << z->imag();
  return os.str();
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

cplx upper(cplx z) { return z.imag() >= 0.0 ? z : std::conj(z); }

struct Context {
  const ExperimentConfig& cfg;
  const TripleDescriptor& t;
  std::string scenario;
  std::vector<BoundaryCondition> bcs;
  std::vector<std::string> bc_labels;
  std::vector<cplx> zs;
  bool interval = false;

  double tol(const std::string& suite) const {
    auto it = cfg.tolerances.find(suite);
    if (it != cfg.tolerances.end()) return it->second;
    if (suite == "m_function" && interval) return kIntervalMTol;
    return default_tolerances().at(suite);
  }

  // Next non-real sample after z, or z itself.
  cplx partner(size_t i) const {
    for (size_t k = 1; k < zs.size(); ++k) {
      cplx w = zs[(i + k) % zs.size()];
      if (w.imag() != 0.0 && w != zs[i]) return w;
    }
    return zs[i];
  }
};

const std::vector<double>& sample_ks() {
  static const std::vector<double> ks = [] {
    std::vector<double> k(12);
    for (int j = 0; j < 12; ++j) k[j] = -8.0 + 16.0 * j / 11.0;
    return k;
  }();
  return ks;
}

struct Task {
  std::string check, suite, bc;
  std::optional<cplx> z;
  std::function<double(std::mt19937_64&)> defect;
};

CheckRecord execute(const Context& ctx, const Task& task) {
  CheckRecord r;
  r.check = task.check;
  r.scenario = ctx.scenario;
  r.bc = task.bc;
  r.z = task.z;
  r.tol = ctx.tol(task.suite);
  const std::string key = ctx.scenario + "|" + task.check + "|" + task.bc + "|" + z_text(task.z) + "|" +
                          std::to_string(ctx.cfg.seed);
  const std::uint64_t digest = fnv1a64(key);
  r.inputs_digest = hex64(digest);
  std::mt19937_64 rng(digest);
  const auto start = Clock::now();
  try {
    r.defect = task.defect(rng);
    r.status = r.defect <= r.tol ? RecordStatus::Pass : RecordStatus::Fail;
  } catch (const std::exception& e) {
    r.defect = NAN;
    r.status = RecordStatus::Error;
    r.message = e.what();
  }
  r.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void add_triple_records(const Context& ctx, std::vector<CheckRecord>& out) {
  ValidationReport v = validate_triple(ctx.t);
  for (const auto& item : v.items) {
    CheckRecord r;
    r.check = "triple." + item.name;
    r.scenario = ctx.scenario;
    r.bc = "-";
    r.defect = item.defect;
    r.tol = item.tolerance;
    r.status = item.pass ? RecordStatus::Pass : RecordStatus::Fail;
    r.inputs_digest = hex64(fnv1a64(ctx.scenario + "|" + r.check));
    out.push_back(r);
  }
}

std::vector<Task> build_tasks(const Context& ctx, const std::string& suite) {
  const TripleDescriptor& t = ctx.t;
  // captured by value: the closures outlive this frame
  const int dh = t.dim_h(), de = t.dim_e();
  std::vector<Task> tasks;
  auto per_z = [&](const std::string& check, bool need_offaxis, auto make) {
    for (size_t i = 0; i < ctx.zs.size(); ++i) {
      const cplx z = ctx.zs[i];
      if (need_offaxis && z.imag() == 0.0) continue;
      tasks.push_back({check, suite, "-", z, make(i, z)});
    }
  };
  auto per_bc_z = [&](const std::string& check, auto make) {
    for (size_t b = 0; b < ctx.bcs.size(); ++b)
      for (size_t i = 0; i < ctx.zs.size(); ++i) {
        const cplx z = ctx.zs[i];
        if (z.imag() == 0.0) continue;
        tasks.push_back({check, suite, ctx.bc_labels[b], z, make(ctx.bcs[b], i, z)});
      }
  };
  const std::vector<double>& ks = sample_ks();

  if (suite == "m_function") {
    per_z("m_function", false, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64&) {
        Matrix m = m_function(t, z);
        if (ctx.interval) {
          Matrix e = exact_interval_m(z);
          return (m - e).norm() / std::max(1.0, e.norm());
        }
        return (m_function(t, std::conj(z)) - m.adjoint()).norm() / std::max(1.0, m.norm());
      };
    });
  } else if (suite == "m_difference") {
    per_z("m_difference", true, [&](size_t i, cplx z) {
      const cplx w = ctx.partner(i);
      return [&t, &ctx, &ks, dh, de, z, w](std::mt19937_64&) {
        Matrix mz = m_function(t, z), mw = m_function(t, w);
        Matrix rhs = (z - std::conj(w)) * gamma_matrix(t, w).adjoint() * gamma_matrix(t, z);
        return (mz - mw.adjoint() - rhs).norm() / std::max(1.0, mz.norm() + mw.norm());
      };
    });
  } else if (suite == "herglotz") {
    per_z("herglotz", true, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64&) {
        const cplx zu = upper(z);
        HerglotzReport h = herglotz_defect(t, zu);
        return std::max(h.defect / std::max(1.0, m_function(t, zu).norm()), std::max(0.0, -h.min_eigenvalue));
      };
    });
  } else if (suite == "gamma_trace") {
    per_z("gamma_trace", false, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64& rng) {
        Vector phi = random_vector(rng, de);
        DecomposedVector d = gamma(t, z, phi);
        const double trace = (trace0(d) - phi).norm() / phi.norm();
        const double kernel = (a_apply(t, d) - z * assemble(t, d)).norm() / std::max(1.0, d.f.norm());
        return std::max(trace, kernel);
      };
    });
  } else if (suite == "green") {
    per_z("green", true, [&](size_t i, cplx z) {
      const cplx w = ctx.partner(i);
      return [&t, &ctx, &ks, dh, de, z, w](std::mt19937_64& rng) {
        DecomposedVector du = gamma(t, z, random_vector(rng, de));
        DecomposedVector dv = gamma(t, w, random_vector(rng, de));
        du.f += random_vector(rng, dh);
        dv.f += random_vector(rng, dh);
        return green_defect(t, du, dv) / green_scale(t, du, dv);
      };
    });
  } else if (suite == "krein") {
    per_bc_z("krein.equation", [&](const BoundaryCondition& bc, size_t, cplx z) {
      return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64& rng) {
        Vector h = random_vector(rng, dh);
        DecomposedVector u = krein_resolvent(t, bc, z, h);
        return (a_apply(t, u) - z * assemble(t, u) - h).norm() / h.norm();
      };
    });
    per_bc_z("krein.boundary_condition", [&](const BoundaryCondition& bc, size_t, cplx z) {
      return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64& rng) {
        Vector h = random_vector(rng, dh);
        DecomposedVector u = krein_resolvent(t, bc, z, h);
        Vector res = bc.alpha() * trace0(u) + bc.beta() * trace1(t, u);
        return res.norm() / std::max(1.0, (bc.alpha() * trace0(u)).norm() + (bc.beta() * trace1(t, u)).norm());
      };
    });
    per_bc_z("krein.resolvent_identity", [&](const BoundaryCondition& bc, size_t i, cplx z) {
      const cplx w = ctx.partner(i);
      return [&t, &ctx, &bc, &ks, dh, de, z, w](std::mt19937_64&) {
        if (w == z) return 0.0;
        Matrix rz = resolvent_matrix(t, bc, z), rw = resolvent_matrix(t, bc, w);
        return (rz - rw - (z - w) * rz * rw).norm() / std::max(1.0, rz.norm() + rw.norm());
      };
    });
  } else if (suite == "trace_formula") {
    per_bc_z("trace_formula", [&](const BoundaryCondition& bc, size_t, cplx z) {
      return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64& rng) {
        Vector h = random_vector(rng, dh);
        return trace_formula_defect(t, bc, z, h) / h.norm();
      };
    });
  } else if (suite == "theta_cross") {
    per_bc_z("theta_cross",
             [&](const BoundaryCondition& bc, size_t, cplx z) {
               return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64&) { return theta_cross_defect(t, bc, z); };
             });
  } else if (suite == "charfunc") {
    per_z("charfunc.contraction", true, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64&) {
        return std::max(0.0, singular_values(char_function(t, upper(z)).s).maxCoeff() - 1.0);
      };
    });
    per_z("charfunc.forms", true, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64&) { return char_function(t, upper(z)).form_agreement; };
    });
    per_z("charfunc.adjoint", true, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64&) {
        const cplx zu = upper(z);
        return (char_adjoint(t, std::conj(zu)) - char_function(t, zu).s.adjoint()).norm();
      };
    });
  } else if (suite == "model_resolvent") {
    per_bc_z("model_resolvent", [&](const BoundaryCondition& bc, size_t, cplx z) {
      return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64& rng) {
        Vector h = random_vector(rng, dh);
        return model_resolvent_defect(t, bc, z, h, ks, z.imag() < 0.0 ? ModelSide::Plus : ModelSide::Minus);
      };
    });
  } else if (suite == "toeplitz") {
    per_z("toeplitz", true, [&](size_t, cplx z) {
      return [&t, &ctx, &ks, dh, de, z](std::mt19937_64& rng) { return toeplitz_check(t, upper(z), random_vector(rng, dh), ks); };
    });
  } else if (suite == "triangular") {
    per_bc_z("triangular", [&](const BoundaryCondition& bc, size_t, cplx z) {
      return [&t, &ctx, &bc, &ks, dh, de, z](std::mt19937_64& rng) { return triangular_check(t, bc, z, random_vector(rng, dh), ks); };
    });
  } else if (suite == "dilation") {
    for (cplx z : ctx.zs) {
      if (std::abs(z.imag()) < kMinChannelImag) continue;
      tasks.push_back({"dilation", suite, "-", z, [&t, &ctx, &ks, dh, de, z](std::mt19937_64& rng) {
                         Vector h = random_vector(rng, dh);
                         return dilation_property_defect(t, z.imag() < 0.0 ? z : std::conj(z), h) / h.norm();
                       }});
    }
  } else if (suite == "hardy") {
    tasks.push_back({"hardy", suite, "-", std::nullopt, [&t, dh](std::mt19937_64& rng) {
                       Vector h = random_vector(rng, dh);
                       HardyBoundReport r = hardy_bound_check(t, h, {1.0, 0.1, 0.01}, 200.0);
                       return std::max(0.0, r.sup / r.bound - 1.0);
                     }});
  } else if (suite == "model_map") {
    auto draw = [de](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.4, 2.0);
      ModelParams p{cplx(re(rng), im(rng)), cplx(re(rng), -im(rng)), random_vector(rng, de), random_vector(rng, de)};
      auto gm = make_grid(HalfLine::Negative, 40.0, 400), gp = make_grid(HalfLine::Positive, 40.0, 400);
      Vector a = random_vector(rng, de), b = random_vector(rng, de);
      GridFunction vm = sample(gm, de, [&](double x) -> Vector { return std::exp(x) * (a + x * b); });
      GridFunction vp = sample(gp, de, [&](double x) -> Vector { return std::exp(-1.5 * x) * std::cos(x) * b; });
      return std::make_tuple(p, vm, vp);
    };
    tasks.push_back({"model_map.weight_identity", suite, "-", std::nullopt, [&t, &ks, draw](std::mt19937_64& rng) {
                       auto [p, vm, vp] = draw(rng);
                       return weight_identity_defect(t, p, vm, vp, ks);
                     }});
    tasks.push_back({"model_map.isometry", suite, "-", std::nullopt, [&t, &ks, draw](std::mt19937_64& rng) {
                       auto [p, vm, vp] = draw(rng);
                       const double direct = dilation_norm(g_element(t, p, vm, vp));
                       const double model = std::sqrt(model_inner_exact(t, phi_map(t, p, vm, vp),
                                                                        phi_map(t, p, vm, vp)).real());
                       return std::abs(model - direct) / direct;
                     }});
    tasks.push_back({"model_map.pk_idempotence", suite, "-", std::nullopt, [&t, &ks, draw](std::mt19937_64& rng) {
                       auto [p, vm, vp] = draw(rng);
                       ModelElement e = phi_map(t, p, vm, vp);
                       ModelElement once = pk_project(t, e), twice = pk_project(t, once);
                       ModelElement diff = twice - once;
                       const cplx n = model_inner_exact(t, diff, diff);
                       return std::sqrt(std::abs(n)) / std::max(1.0, std::sqrt(std::abs(model_inner_exact(t, once, once))));
                     }});
  }
  return tasks;
}

template <class F>
void parallel_for(size_t n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const size_t count = std::min<size_t>(static_cast<size_t>(threads), n);
  for (size_t w = 0; w < count; ++w)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

Context make_context(const ExperimentConfig& cfg, const TripleDescriptor& t) {
  Context ctx{cfg, t, cfg.a0 ? cfg.scenario_label : t.label(), {}, {}, resolve_z_points(cfg, t),
              !cfg.a0 && cfg.scenario.kind == ScenarioKind::Interval};
  for (const auto& b : cfg.bcs) {
    ctx.bcs.push_back(b.build(t.dim_e()));
    ctx.bc_labels.push_back(b.label());
  }
  return ctx;
}

json base_metadata(const ExperimentConfig& cfg, const RunOptions& opts, const char* command) {
  json m;
  m["tool"] = "modelkit";
  m["version"] = kVersion;
  m["command"] = command;
  m["threads"] = opts.threads;
  m["strict"] = opts.strict || cfg.strict;
  m["config"] = cfg.echo;
  m["inputs_digest"] = hex64(fnv1a64(cfg.echo.dump()));
  m["compiler"] = __VERSION__;
  m["seed"] = cfg.seed;
  const char* env = std::getenv("MODELKIT_SEED");
  m["seed_override"] = env ? json(cfg.seed) : json(nullptr);
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["started_utc"] = buf;
  return m;
}

}  // namespace

Report run_checks(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  TripleDescriptor t = build_triple(cfg);
  Context ctx = make_context(cfg, t);

  Report report;
  std::vector<Task> tasks;
  for (const auto& suite : cfg.checks) {
    if (suite == "triple") {
      // evaluated inline so the record order follows the config
      std::vector<CheckRecord> items;
      add_triple_records(ctx, items);
      tasks.push_back({"__triple__", suite, "-", std::nullopt, {}});
      report.records.insert(report.records.end(), items.begin(), items.end());
      continue;
    }
    auto more = build_tasks(ctx, suite);
    tasks.insert(tasks.end(), more.begin(), more.end());
  }
  // Records: triple items first in place, the rest computed in parallel and kept in task order.
  std::vector<CheckRecord> computed(tasks.size());
  parallel_for(tasks.size(), opts.threads, [&](size_t i) {
    if (tasks[i].check != "__triple__") computed[i] = execute(ctx, tasks[i]);
  });
  std::vector<CheckRecord> ordered;
  size_t triple_pos = 0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].check == "__triple__") {
      for (; triple_pos < report.records.size(); ++triple_pos) ordered.push_back(report.records[triple_pos]);
    } else {
      ordered.push_back(computed[i]);
    }
  }
  report.records = std::move(ordered);

  report.metadata = base_metadata(cfg, opts, "run");
  json runtimes = json::array();
  for (const auto& r : report.records) runtimes.push_back(r.runtime_s);
  report.metadata["runtimes_s"] = runtimes;
  report.metadata["total_runtime_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

Report run_scan(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  TripleDescriptor t = build_triple(cfg);
  Context ctx = make_context(cfg, t);
  Report report;
  json scans = json::array();
  json runtimes = json::array();
  for (size_t b = 0; b < ctx.bcs.size(); ++b)
    for (const ZGrid& g : cfg.z_grids) {
      json entry;
      entry["bc"] = ctx.bc_labels[b];
      entry["grid"] = {{"re", {g.re0, g.re1}}, {"im", {g.im0, g.im1}}, {"n_re", g.n_re}, {"n_im", g.n_im}};
      const auto t0 = Clock::now();
      try {
        ScanResult s = spectrum_scan(t, ctx.bcs[b], g);
        json cands = json::array();
        for (const auto& c : s.candidates) cands.push_back({{"z", complex_to_json(c.z)}, {"minsv", c.minsv}});
        json samples = json::array();
        for (const auto& p : s.samples)
          samples.push_back({{"z", complex_to_json(p.z)},
                             {"minsv", p.minsv},
                             {"in_qb", p.in_qb},
                             {"regular", p.regular}});
        entry["candidates"] = cands;
        entry["samples"] = samples;
        entry["median_minsv"] = s.median_minsv;
      } catch (const std::exception& e) {
        CheckRecord r;
        r.check = "scan";
        r.scenario = ctx.scenario;
        r.bc = ctx.bc_labels[b];
        r.defect = NAN;
        r.status = RecordStatus::Error;
        r.message = e.what();
        report.records.push_back(r);
        entry["error"] = e.what();
      }
      runtimes.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      scans.push_back(entry);
    }
  report.extra["scan"] = scans;
  report.metadata = base_metadata(cfg, opts, "scan");
  report.metadata["runtimes_s"] = runtimes;
  report.metadata["total_runtime_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

int exit_code_for(const Report& r, bool strict) {
  if (strict && r.errors() > 0) return kExitBreakdown;
  if (r.failed() > 0) return kExitCheckFailed;
  return kExitOk;
}

namespace {

std::string shortest(double v) {
  char buf[40];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void write_outputs(const Report& r, const ExperimentConfig& cfg, const RunOptions& opts, bool scan) {
  namespace fs = std::filesystem;
  const fs::path dir = opts.out_dir.value_or(cfg.out_dir);
  fs::create_directories(dir);
  const OutputFormat fmt = opts.format.value_or(cfg.format);
  const std::string base = (dir / cfg.out_name).string();
  if (fmt != OutputFormat::Csv) write_atomic(base + ".json", report_json_text(r));
  if (scan) {
    std::string samples = "bc,z_re,z_im,minsv,in_qb,regular\n", cands = "bc,z_re,z_im,minsv\n";
    for (const auto& e : r.extra["scan"]) {
      if (!e.contains("samples")) continue;
      const std::string bc = e["bc"].get<std::string>();
      for (const auto& s : e["samples"])
        samples += bc + "," + shortest(s["z"][0].get<double>()) + "," + shortest(s["z"][1].get<double>()) + "," +
                   shortest(s["minsv"].get<double>()) + "," + (s["in_qb"].get<bool>() ? "true" : "false") + "," +
                   (s["regular"].get<bool>() ? "true" : "false") + "\n";
      for (const auto& c : e["candidates"])
        cands += bc + "," + shortest(c["z"][0].get<double>()) + "," + shortest(c["z"][1].get<double>()) + "," +
                 shortest(c["minsv"].get<double>()) + "\n";
    }
    write_atomic(base + "_samples.csv", samples);
    write_atomic(base + "_candidates.csv", cands);
  } else if (fmt != OutputFormat::Json) {
    write_atomic(base + ".csv", report_csv(r));
  }
}

void print_summary(const Report& r, std::ostream& out) {
  for (const auto& c : r.records)
    if (!c.pass())
      out << (c.status == RecordStatus::Error ? "ERROR " : "FAIL  ") << c.check << " [" << c.bc << "] "
          << (c.z ? "z=" + shortest(c.z->real()) + (c.z->imag() < 0 ? "" : "+") + shortest(c.z->imag()) + "i " : "")
          << "defect=" << c.defect << " tol=" << c.tol << (c.message.empty() ? "" : " : " + c.message) << "\n";
  out << r.records.size() << " records, " << r.failed() << " failed, " << r.errors() << " errors\n";
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"modelkit: verified numerics for boundary triples, dilations and functional models"};
  app.require_subcommand(1);
  std::string config_path, out_dir, format;
  int threads = 1;
  bool strict = false;
  auto add_common = [&](CLI::App* sub, bool outputs) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    if (outputs) {
      sub->add_option("--out", out_dir, "output directory");
      sub->add_option("--format", format, "json, csv or both");
      sub->add_option("--threads", threads, "worker threads");
      sub->add_flag("--strict", strict, "numerical breakdown exits with code 3");
    }
  };
  CLI::App* run = app.add_subcommand("run", "run the configured check suites");
  CLI::App* scan = app.add_subcommand("scan", "sample sigma_min(B + M(z)) over the configured z grids");
  CLI::App* validate = app.add_subcommand("validate", "parse the config and validate the scenario");
  add_common(run, true);
  add_common(scan, true);
  add_common(validate, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "modelkit: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (const char* env = std::getenv("MODELKIT_SEED")) apply_seed_override(cfg, env);
    RunOptions opts;
    opts.threads = threads;
    opts.strict = strict;
    if (threads < 1) throw ConfigError("config: --threads must be at least 1");
    if (!format.empty()) opts.format = parse_format(format);
    if (!out_dir.empty()) opts.out_dir = out_dir;
    const bool is_strict = strict || cfg.strict;

    if (validate->parsed()) {
      TripleDescriptor t = build_triple(cfg);
      for (const auto& item : validate_triple(t).items)
        out << (item.pass ? "ok    " : "FAIL  ") << item.name << " defect=" << item.defect << "\n";
      out << t.label() << ": dimH=" << t.dim_h() << " dimE=" << t.dim_e() << ", " << cfg.bcs.size()
          << " boundary conditions, " << cfg.checks.size() << " checks\n";
      return kExitOk;
    }
    if (run->parsed()) {
      if (cfg.checks.empty()) throw ConfigError("config: run needs a non-empty \"checks\" list");
      Report r = run_checks(cfg, opts);
      write_outputs(r, cfg, opts, false);
      print_summary(r, out);
      return exit_code_for(r, is_strict);
    }
    if (cfg.z_grids.empty()) throw ConfigError("config: scan needs at least one z grid");
    if (cfg.bcs.empty()) throw ConfigError("config: scan needs at least one boundary condition");
    Report r = run_scan(cfg, opts);
    write_outputs(r, cfg, opts, true);
    for (const auto& e : r.extra["scan"])
      out << e["bc"].get<std::string>() << ": "
          << (e.contains("candidates") ? std::to_string(e["candidates"].size()) + " candidates" : "error") << "\n";
    return exit_code_for(r, is_strict);
  } catch (const ConfigError& e) {
    err << "modelkit: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "modelkit: " << e.what() << "\n";
    return strict ? kExitBreakdown : kExitCheckFailed;
  }
}

}  // namespace modelkit
