#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "modelkit/errors.hpp"
#include "modelkit/extensions.hpp"
#include "modelkit/scenarios.hpp"

namespace modelkit {

using json = nlohmann::json;

// Unreadable, malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Named preset or explicit (alpha, beta).
struct BcSpec {
  std::string preset;  // dissipative | adjoint | neumann | dirichlet_eps | hermitian_random | matrix
  double eps = 1e-6;
  std::uint64_t seed = 0;
  Matrix alpha, beta;

  std::string label() const;
  BoundaryCondition build(int dim_e) const;
};

// A literal z, or the j-th eigenvalue of A0 in ascending order.
struct ZPoint {
  cplx value;
  int a0_index = -1;
};

enum class OutputFormat { Json, Csv, Both };

struct ExperimentConfig {
  ScenarioSpec scenario;
  // kind "matrices": A0, Pi, Lambda given verbatim
  std::optional<Matrix> a0, pi, lambda;
  std::string scenario_label;

  std::vector<BcSpec> bcs;
  std::vector<std::string> checks;
  std::vector<ZPoint> z_points;
  std::vector<ZGrid> z_grids;
  std::map<std::string, double> tolerances;
  bool strict = false;
  std::uint64_t seed = 1;  // draws of test vectors

  std::string out_dir = ".";
  std::string out_name = "report";
  OutputFormat format = OutputFormat::Json;

  json echo;  // the parsed document, echoed into reports
};

// Complex scalar from x or [re, im]; matrix from row-major nested arrays of those.
cplx parse_complex(const json& j);
Matrix parse_matrix(const json& j);
json complex_to_json(cplx z);
json matrix_to_json(const Matrix& m);

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

// MODELKIT_SEED: a decimal unsigned integer replacing the scenario seed and the draw seed.
void apply_seed_override(ExperimentConfig& cfg, const std::string& value);

// Builds the triple and rejects data that fails validate_triple.
TripleDescriptor build_triple(const ExperimentConfig& cfg);

std::vector<cplx> resolve_z_points(const ExperimentConfig& cfg, const TripleDescriptor& t);

OutputFormat parse_format(const std::string& s);

// Suites understood by the runner.
const std::vector<std::string>& known_checks();

}  // namespace modelkit
