#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modelkit/triple.hpp"

namespace modelkit {

enum class ScenarioKind { Random, Interval, Star };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Random;
  std::uint64_t seed = 0;
  int dim_h = 16;   // random
  int dim_e = 2;    // random
  int n = 64;       // interval cells / star cells per unit length
  std::vector<double> lengths;  // star
  double shift = 0.0;  // added to A0
};

TripleDescriptor build_random_triple(std::uint64_t seed, int dim_h, int dim_e);

// Cell-centred Dirichlet Laplacian on [0, 1] with n cells; E = C^2 (values at 0 and 1).
TripleDescriptor build_interval_laplacian(int n);

// (sqrt z / sin sqrt z) [[-cos sqrt z, 1], [1, -cos sqrt z]]
Matrix exact_interval_m(cplx z);

// Star graph, Dirichlet data at the outer vertices, Kirchhoff at the centre.
// cells_per_unit sets the mesh: edge e gets max(4, round(n * l_e)) cells.
TripleDescriptor build_star_graph(std::span<const double> lengths, int cells_per_unit = 64);

TripleDescriptor build_scenario(const ScenarioSpec& spec);

// Frequencies next to each eigenvalue of A0, suited to the rank probe.
std::vector<cplx> probe_points(const TripleDescriptor& t);

}  // namespace modelkit
