#include "modelkit/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace modelkit {

namespace {

constexpr int kSimplicityAttempts = 8;

Matrix gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = n01(rng);
      double im = n01(rng);
      m(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return m;
}

Matrix haar_unitary(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

TripleDescriptor draw_random(std::mt19937_64& rng, int dim_h, int dim_e, const std::string& label) {
  std::uniform_real_distribution<double> mag(0.5, 10.0);
  std::bernoulli_distribution sign(0.5);
  Matrix q = haar_unitary(rng, dim_h);
  RealVector d(dim_h);
  for (int i = 0; i < dim_h; ++i) {
    double m = mag(rng);
    d(i) = sign(rng) ? m : -m;
  }
  Matrix pi;
  do {
    pi = gaussian(rng, dim_h, dim_e);
    for (int j = 0; j < dim_e; ++j) pi.col(j).normalize();
  } while (singular_ratio(pi) <= 1e-6);
  Matrix x = gaussian(rng, dim_e, dim_e);
  Matrix lambda = 0.5 * (x + x.adjoint());

  Matrix a0 = q * d.cast<cplx>().asDiagonal() * q.adjoint();
  a0 = 0.5 * (a0 + a0.adjoint());
  return TripleDescriptor(a0, pi, lambda, label, SpectralData{q, d});
}

// Eigenpairs of the cell-centred Dirichlet matrix h^-2 tridiag(-1, 2, -1)
// with corner entries 3: sin(k pi x_i), x_i = (i - 1/2) h.
SpectralData interval_spectrum(int n) {
  const double h = 1.0 / n;
  const double pi = std::numbers::pi;
  Eigen::MatrixXd v(n, n);
  RealVector d(n);
  for (int k = 1; k <= n; ++k) {
    double s = std::sin(0.5 * k * pi * h);
    d(k - 1) = 4.0 * s * s / (h * h);
    double norm = k == n ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 1; i <= n; ++i) v(i - 1, k - 1) = norm * std::sin(k * pi * (i - 0.5) * h);
  }
  return {v.cast<cplx>(), d};
}

}  // namespace

TripleDescriptor build_random_triple(std::uint64_t seed, int dim_h, int dim_e) {
  if (dim_e < 1 || dim_h < dim_e || dim_h > 256)
    throw DomainError("build_random_triple: need 1 <= dimE <= dimH <= 256");
  std::mt19937_64 rng(seed);
  std::string label = "random(seed=" + std::to_string(seed) + ",dimH=" + std::to_string(dim_h) +
                      ",dimE=" + std::to_string(dim_e) + ")";
  for (int attempt = 0;; ++attempt) {
    TripleDescriptor t = draw_random(rng, dim_h, dim_e, label);
    auto zs = probe_points(t);
    if (simplicity_probe(t, zs) == dim_h || attempt + 1 == kSimplicityAttempts) return t;
  }
}

TripleDescriptor build_interval_laplacian(int n) {
  if (n < 8) throw DomainError("build_interval_laplacian: need n >= 8");
  const double h = 1.0 / n;
  Matrix a0 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a0(i, i) = (i == 0 || i == n - 1 ? 3.0 : 2.0) / (h * h);
    if (i > 0) a0(i, i - 1) = -1.0 / (h * h);
    if (i + 1 < n) a0(i, i + 1) = -1.0 / (h * h);
  }
  SpectralData spec = interval_spectrum(n);

  // Harmonic lift: A0^{-1} applied to the ghost-cell boundary couplings.
  // H carries sqrt(h)-scaled nodal values so the Euclidean norm is the L2 norm.
  Matrix coupling = Matrix::Zero(n, 2);
  coupling(0, 0) = 2.0 / (h * h) * std::sqrt(h);
  coupling(n - 1, 1) = 2.0 / (h * h) * std::sqrt(h);
  Matrix a0inv = spec.vectors * spec.values.cwiseInverse().cast<cplx>().asDiagonal() * spec.vectors.adjoint();
  Matrix pi = a0inv * coupling;

  Matrix lambda(2, 2);
  lambda << -1.0, 1.0, 1.0, -1.0;
  return TripleDescriptor(a0, pi, lambda, "interval(n=" + std::to_string(n) + ")", std::move(spec));
}

Matrix exact_interval_m(cplx z) {
  cplx diag, off;
  if (std::abs(z) < 1e-8) {
    diag = -(1.0 - z / 3.0);
    off = 1.0 + z / 6.0;
  } else {
    cplx s = std::sqrt(z);
    cplx sn = std::sin(s);
    if (std::abs(sn) < 1e-14) throw SingularFrequency("exact_interval_m: z is a Dirichlet eigenvalue", z, 0.0);
    diag = -s * std::cos(s) / sn;
    off = s / sn;
  }
  Matrix m(2, 2);
  m << diag, off, off, diag;
  return m;
}

TripleDescriptor build_star_graph(std::span<const double> lengths, int cells_per_unit) {
  const int d = static_cast<int>(lengths.size());
  if (d < 2) throw DomainError("build_star_graph: need at least two edges");
  for (double l : lengths)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("build_star_graph: lengths must be positive");

  std::vector<int> cells(d), offset(d + 1, 0);
  std::vector<double> h(d);
  for (int e = 0; e < d; ++e) {
    cells[e] = std::max(4, static_cast<int>(std::lround(cells_per_unit * lengths[e])));
    h[e] = lengths[e] / cells[e];
    offset[e + 1] = offset[e] + cells[e];
  }
  const int n = offset[d];

  // Stiffness in flux form; cell 0 of each edge touches its outer vertex, the
  // last cell touches the centre, whose value is eliminated (Kirchhoff).
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd mass(n);
  double wsum = 0.0;
  for (int e = 0; e < d; ++e) wsum += 2.0 / h[e];
  for (int e = 0; e < d; ++e) {
    for (int i = 0; i < cells[e]; ++i) {
      int r = offset[e] + i;
      mass(r) = h[e];
      if (i + 1 < cells[e]) {
        s(r, r) += 1.0 / h[e];
        s(r + 1, r + 1) += 1.0 / h[e];
        s(r, r + 1) -= 1.0 / h[e];
        s(r + 1, r) -= 1.0 / h[e];
      }
    }
    s(offset[e], offset[e]) += 2.0 / h[e];
  }
  for (int e = 0; e < d; ++e) {
    int re = offset[e + 1] - 1;
    double we = 2.0 / h[e];
    s(re, re) += we;
    for (int f = 0; f < d; ++f) s(re, offset[f + 1] - 1) -= we * (2.0 / h[f]) / wsum;
  }
  Eigen::VectorXd rs = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a0 = rs.asDiagonal() * s * rs.asDiagonal();
  a0 = 0.5 * (a0 + a0.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a0);
  SpectralData spec{es.eigenvectors().cast<cplx>(), es.eigenvalues()};

  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(n, d);
  for (int e = 0; e < d; ++e) coupling(offset[e], e) = 2.0 / h[e] * rs(offset[e]);
  Matrix a0inv = spec.vectors * spec.values.cwiseInverse().cast<cplx>().asDiagonal() * spec.vectors.adjoint();
  Matrix pi = a0inv * coupling.cast<cplx>();

  // Harmonic functions are linear on edges with centre value the
  // 1/l-weighted mean; Gamma_1 = u'(0) on each edge.
  double inv_sum = 0.0;
  for (double l : lengths) inv_sum += 1.0 / l;
  Matrix lambda(d, d);
  for (int e = 0; e < d; ++e)
    for (int f = 0; f < d; ++f)
      lambda(e, f) = ((1.0 / lengths[f]) / inv_sum - (e == f ? 1.0 : 0.0)) / lengths[e];
  lambda = 0.5 * (lambda + lambda.adjoint());

  std::string label = "star(d=" + std::to_string(d) + ",n=" + std::to_string(cells_per_unit) + ")";
  return TripleDescriptor(a0.cast<cplx>(), pi, lambda, label, std::move(spec));
}

TripleDescriptor build_scenario(const ScenarioSpec& spec) {
  auto shifted = [&](TripleDescriptor t) {
    if (spec.shift == 0.0) return t;
    SpectralData s = t.spectral();
    s.values.array() += spec.shift;
    if (s.values.cwiseAbs().minCoeff() < 1e-10 * s.values.cwiseAbs().maxCoeff())
      throw DomainError("build_scenario: shift puts 0 in the spectrum of A0");
    Matrix a0 = t.a0() + spec.shift * identity(t.dim_h());
    return TripleDescriptor(a0, t.pi(), t.lambda(), t.label() + "+shift", std::move(s));
  };
  switch (spec.kind) {
    case ScenarioKind::Random:
      return shifted(build_random_triple(spec.seed, spec.dim_h, spec.dim_e));
    case ScenarioKind::Interval:
      return shifted(build_interval_laplacian(spec.n));
    case ScenarioKind::Star:
      return shifted(build_star_graph(spec.lengths, spec.n));
  }
  throw DomainError("build_scenario: unknown kind");
}

std::vector<cplx> probe_points(const TripleDescriptor& t) {
  RealVector d = t.a0_eigenvalues();
  std::vector<double> sorted(d.data(), d.data() + d.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<cplx> zs;
  for (size_t i = 0; i < sorted.size(); ++i) {
    double gap = INFINITY;
    if (i > 0) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    if (i + 1 < sorted.size()) gap = std::min(gap, sorted[i + 1] - sorted[i]);
    if (!std::isfinite(gap) || gap <= 0.0) gap = std::max(1.0, std::abs(sorted[i]));
    zs.push_back(cplx(sorted[i], 0.25 * gap));
  }
  return zs;
}

}  // namespace modelkit
