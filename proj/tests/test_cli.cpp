#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "modelkit/config.hpp"
#include "modelkit/report.hpp"
#include "modelkit/runner.hpp"

using namespace modelkit;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MODELKIT_CLI;
const std::string kConfigs = MODELKIT_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("modelkit_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " \"" + kCli + "\" " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json without_metadata(const fs::path& p) {
  json j = json::parse(slurp(p));
  j.erase("metadata");
  return j;
}

json base_config() {
  return json::parse(R"({
    "scenario": {"kind": "random", "seed": 9, "dim_h": 8, "dim_e": 2},
    "boundary_conditions": ["dissipative", "neumann"],
    "checks": ["triple", "m_function", "herglotz", "krein", "charfunc", "toeplitz"],
    "z_points": [[1.0, 1.0], [-0.5, -2.0]],
    "seed": 4
  })");
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

}  // namespace

TEST_CASE("complex and matrix parsing") {
  CHECK(parse_complex(json(2.5)) == cplx(2.5, 0.0));
  CHECK(parse_complex(json::parse("[1, -2]")) == cplx(1.0, -2.0));
  CHECK_THROWS_AS(parse_complex(json::parse("[1, 2, 3]")), ConfigError);
  CHECK_THROWS_AS(parse_complex(json("x")), ConfigError);
  Matrix m = parse_matrix(json::parse("[[[1, 0], 2], [0, [0, 1]]]"));
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 1) == cplx(2.0, 0.0));
  CHECK(m(1, 1) == cplx(0.0, 1.0));
  CHECK_THROWS_AS(parse_matrix(json::parse("[[1, 2], [3]]")), ConfigError);
  CHECK(matrix_to_json(m).dump() == "[[[1.0,0.0],[2.0,0.0]],[[0.0,0.0],[0.0,1.0]]]");
  CHECK(complex_to_json(cplx(0.5, -1.0)).dump() == "[0.5,-1.0]");
}

TEST_CASE("config validation") {
  auto cfg = parse_config(base_config());
  CHECK(cfg.bcs.size() == 2);
  CHECK(cfg.z_points.size() == 2);
  CHECK(build_triple(cfg).dim_e() == 2);

  json j = base_config();
  j.erase("scenario");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base_config();
  j["checks"].push_back("no_such_suite");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base_config();
  j["boundary_conditions"].push_back("robin");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base_config();
  j["boundary_conditions"] = json::parse(R"([{"alpha": [[1]], "beta": [[1]]}])");
  CHECK_THROWS_AS(build_triple(parse_config(j)), ConfigError);  // 1x1 against dimE = 2
  j = base_config();
  j["z_grids"] = json::parse(R"([{"re": [0, 1], "im": [0, 0], "n_re": 0}])");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = base_config();
  j["scenario"] = json::parse(R"({"kind": "random", "dim_h": 4, "dim_e": 6})");
  CHECK_THROWS_AS(build_triple(parse_config(j)), ConfigError);

  auto nh = load_config(kConfigs + "/nonhermitian_lambda.json");
  try {
    build_triple(nh);
    FAIL("non-Hermitian Lambda accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("lambda_hermitian") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/modelkit.json"), ConfigError);
}

TEST_CASE("seed override") {
  auto cfg = parse_config(base_config());
  apply_seed_override(cfg, "42");
  CHECK(cfg.seed == 42u);
  CHECK(cfg.scenario.seed == 42u);
  CHECK_THROWS_AS(apply_seed_override(cfg, "4x"), ConfigError);
  CHECK_THROWS_AS(apply_seed_override(cfg, ""), ConfigError);
}

TEST_CASE("digest and CSV") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");

  Report r;
  CheckRecord a;
  a.check = "m_function";
  a.scenario = "random(seed=1,dimH=8,dimE=2)";
  a.bc = "-";
  a.z = cplx(1.0, -0.5);
  a.defect = 0.25;
  a.tol = 1e-8;
  a.status = RecordStatus::Fail;
  r.records.push_back(a);
  std::string csv = report_csv(r);
  CHECK(csv.rfind("check,scenario,bc,z,defect,tol,pass\n", 0) == 0);
  CHECK(csv.find("m_function,\"random(seed=1,dimH=8,dimE=2)\",-,1-0.5i,0.25,1e-08,false\n") != std::string::npos);

  json j = report_to_json(r);
  CHECK(j["records"][0]["z"].dump() == "[1.0,-0.5]");
  CHECK(j["summary"]["failed"] == 1);
  // sorted keys
  std::string text = report_stable_text(r);
  CHECK(text.find("\"bc\"") < text.find("\"check\""));
  CHECK(text.find("metadata") == std::string::npos);
}

TEST_CASE("records are independent of the thread count") {
  auto cfg = parse_config(base_config());
  RunOptions one, four;
  four.threads = 4;
  Report a = run_checks(cfg, one), b = run_checks(cfg, four);
  CHECK(a.records.size() >= 12);
  CHECK(report_stable_text(a) == report_stable_text(b));
  CHECK(exit_code_for(a, false) == kExitOk);
}

TEST_CASE("atomic writes leave no temporary") {
  auto dir = scratch("atomic");
  write_atomic((dir / "x.txt").string(), "one");
  write_atomic((dir / "x.txt").string(), "two");
  CHECK(slurp(dir / "x.txt") == "two");
  CHECK(!fs::exists(dir / "x.txt.tmp"));
}

TEST_CASE("golden interval run") {
  auto d1 = scratch("golden1"), d2 = scratch("golden2");
  CHECK(run_cli("run --config " + kConfigs + "/interval.json --out " + d1.string()) == 0);
  CHECK(run_cli("run --config " + kConfigs + "/interval.json --out " + d2.string() + " --threads 3") == 0);
  REQUIRE(fs::exists(d1 / "interval.json"));
  REQUIRE(fs::exists(d1 / "interval.csv"));
  json j = json::parse(slurp(d1 / "interval.json"));
  CHECK(j["records"].size() >= 12);
  CHECK(j["summary"]["failed"] == 0);
  CHECK(j.contains("metadata"));
  CHECK(j["metadata"].contains("config"));
  CHECK(j["metadata"]["runtimes_s"].size() == j["records"].size());
  CHECK(without_metadata(d1 / "interval.json").dump() == without_metadata(d2 / "interval.json").dump());
  CHECK(slurp(d1 / "interval.csv") == slurp(d2 / "interval.csv"));

  std::string csv = slurp(d1 / "interval.csv");
  CHECK(csv.rfind("check,scenario,bc,z,defect,tol,pass\n", 0) == 0);
  auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == static_cast<long>(j["records"].size()) + 1);
}

TEST_CASE("exit codes") {
  auto dir = scratch("exit");
  const std::string out = " --out " + dir.string();
  CHECK(run_cli("run --config " + kConfigs + "/nonhermitian_lambda.json" + out) == 2);
  CHECK(run_cli("run --config /nonexistent.json" + out) == 2);
  CHECK(run_cli("run" + out) == 2);
  CHECK(run_cli("frobnicate --config " + kConfigs + "/interval.json" + out) == 2);
  CHECK(run_cli("validate --config " + kConfigs + "/interval.json") == 0);
  CHECK(run_cli("validate --config " + kConfigs + "/nonhermitian_lambda.json") == 2);

  {
    std::ofstream bad(dir / "broken.json");
    bad << "{\"scenario\": ";
  }
  CHECK(run_cli("run --config " + (dir / "broken.json").string() + out) == 2);

  // z on the spectrum of A0: error records, breakdown only when strict
  CHECK(run_cli("run --config " + kConfigs + "/m_on_spectrum.json" + out) == 0);
  json j = json::parse(slurp(dir / "m_on_spectrum.json"));
  int errors = 0;
  for (const auto& r : j["records"]) errors += r["status"] == "error";
  CHECK(errors == 2);
  CHECK(j["records"].size() == 3);
  CHECK(run_cli("run --strict --config " + kConfigs + "/m_on_spectrum.json" + out) == 3);

  json tight = json::parse(slurp(kConfigs + "/interval.json"));
  tight["tolerances"] = json::parse(R"({"m_function": 1e-14})");
  write_json(dir / "tight.json", tight);
  CHECK(run_cli("run --config " + (dir / "tight.json").string() + out) == 1);

  CHECK(run_cli("scan --config " + kConfigs + "/empty_scan.json" + out) == 2);
  CHECK(run_cli("run --config " + kConfigs + "/interval.json --format xml" + out) == 2);
  CHECK(run_cli("run --config " + kConfigs + "/interval.json" + out, "MODELKIT_SEED=abc") == 2);
}

TEST_CASE("seed override changes draws but stays deterministic") {
  auto d1 = scratch("seed1"), d2 = scratch("seed2"), d3 = scratch("seed3");
  json cfg = base_config();
  cfg["output"] = json::parse(R"({"name": "r", "format": "json"})");
  write_json(d1 / "cfg.json", cfg);
  const std::string c = "run --config " + (d1 / "cfg.json").string();
  CHECK(run_cli(c + " --out " + d1.string(), "MODELKIT_SEED=5") == 0);
  CHECK(run_cli(c + " --out " + d2.string(), "MODELKIT_SEED=5") == 0);
  CHECK(run_cli(c + " --out " + d3.string(), "MODELKIT_SEED=6") == 0);
  CHECK(without_metadata(d1 / "r.json").dump() == without_metadata(d2 / "r.json").dump());
  CHECK(without_metadata(d1 / "r.json").dump() != without_metadata(d3 / "r.json").dump());
  json j = json::parse(slurp(d1 / "r.json"));
  CHECK(j["metadata"]["seed_override"] == 5);
}

TEST_CASE("scan output") {
  auto dir = scratch("scan");
  CHECK(run_cli("scan --config " + kConfigs + "/scan_dissipative.json --out " + dir.string()) == 0);
  REQUIRE(fs::exists(dir / "scan_dissipative_samples.csv"));
  REQUIRE(fs::exists(dir / "scan_dissipative_candidates.csv"));
  std::string samples = slurp(dir / "scan_dissipative_samples.csv");
  CHECK(samples.rfind("bc,z_re,z_im,minsv,in_qb,regular\n", 0) == 0);
  CHECK(std::count(samples.begin(), samples.end(), '\n') == 41 * 12 + 1);
  std::string cands = slurp(dir / "scan_dissipative_candidates.csv");
  CHECK(std::count(cands.begin(), cands.end(), '\n') == 1);
  json j = json::parse(slurp(dir / "scan_dissipative.json"));
  CHECK(j["scan"][0]["candidates"].empty());
}
