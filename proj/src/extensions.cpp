#include "modelkit/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace modelkit {

namespace {

constexpr double kQbThreshold = 1e-10;
constexpr double kCandidateFactor = 1e-6;

[[noreturn]] void throw_boundary(cplx z, double minsv) {
  std::ostringstream os;
  os << "B + M(z) is singular at z = " << z << " (smallest singular value " << minsv << ")";
  throw SingularBoundaryOperator(os.str(), z, minsv);
}

Matrix checked_boundary_inverse(const Matrix& k, cplx z) {
  RealVector s = singular_values(k);
  double minsv = s(s.size() - 1);
  if (!(minsv > kQbThreshold * s(0))) throw_boundary(z, minsv);
  return solve_unchecked(k, identity(k.rows()));
}

}  // namespace

BoundaryCondition::BoundaryCondition(Matrix alpha, Matrix beta, std::string label)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), label_(std::move(label)) {
  if (alpha_.rows() != alpha_.cols() || beta_.rows() != beta_.cols() || alpha_.rows() != beta_.rows())
    throw DimensionError("BoundaryCondition: alpha and beta must be square of equal size");
  if (!all_finite(alpha_) || !all_finite(beta_)) throw DomainError("BoundaryCondition: non-finite entries");
  if (!(singular_ratio(beta_) > 1e-10)) throw DomainError("BoundaryCondition: beta is not invertible");
  b_ = solve(beta_, alpha_);
  double scale = std::max({1.0, max_abs(alpha_), max_abs(beta_) * max_abs(b_)});
  if (!all_finite(b_) || max_abs(beta_ * b_ - alpha_) > 1e-12 * scale)
    throw DomainError("BoundaryCondition: could not form beta^{-1} alpha");
}

BoundaryCondition BoundaryCondition::from_b(const Matrix& b, std::string label) {
  return BoundaryCondition(b, identity(b.rows()), std::move(label));
}

bool BoundaryCondition::hermitian() const { return hermitize_check(b_).pass; }

BoundaryCondition dissipative_bc(int dim_e) { return BoundaryCondition::from_b(-kI * identity(dim_e), "dissipative"); }
BoundaryCondition adjoint_bc(int dim_e) { return BoundaryCondition::from_b(kI * identity(dim_e), "adjoint"); }
BoundaryCondition neumann_bc(int dim_e) { return BoundaryCondition::from_b(Matrix::Zero(dim_e, dim_e), "neumann"); }

BoundaryCondition dirichlet_eps_bc(int dim_e, double eps) {
  if (!(eps > 0.0)) throw DomainError("dirichlet_eps: eps must be positive");
  return BoundaryCondition(identity(dim_e), eps * identity(dim_e), "dirichlet_eps");
}

BoundaryCondition hermitian_random_bc(int dim_e, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix x(dim_e, dim_e);
  for (int j = 0; j < dim_e; ++j)
    for (int i = 0; i < dim_e; ++i) {
      double re = n01(rng);
      double im = n01(rng);
      x(i, j) = cplx(re, im);
    }
  return BoundaryCondition::from_b(0.5 * (x + x.adjoint()), "hermitian_random");
}

ResolventSample resolvent_sample(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  ResolventSample r;
  r.z = z;
  try {
    Matrix k = bc.b() + m_function(t, z);
    RealVector s = singular_values(k);
    r.minsv = s(s.size() - 1);
    r.in_qb = r.minsv > kQbThreshold * s(0);
  } catch (const SingularFrequency&) {
    r.regular = false;
    r.minsv = NAN;
    r.in_qb = false;
  }
  return r;
}

Matrix q_function(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  if (bc.dim_e() != t.dim_e()) throw DimensionError("q_function: boundary condition has wrong size");
  return -checked_boundary_inverse(bc.b() + m_function(t, z), z);
}

namespace {

// Columns of h at once; returns (f, phi) blocks.
std::pair<Matrix, Matrix> krein_block(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z,
                                      const Matrix& h) {
  Matrix q = q_function(t, bc, z);
  Matrix phi = q * t.pi_resolvent(z, h);
  Matrix f = t.shifted_solve(z, h) + z * t.shifted_solve(z, t.pi() * phi);
  return {f, phi};
}

}  // namespace

DecomposedVector krein_resolvent(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z,
                                 const Vector& h) {
  if (h.size() != t.dim_h()) throw DimensionError("krein_resolvent: h has wrong length");
  auto [f, phi] = krein_block(t, bc, z, h);
  return {f.col(0), phi.col(0)};
}

DecomposedVector l_resolvent(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (!(z.imag() < 0.0)) throw DomainError("l_resolvent: requires Im z < 0");
  return krein_resolvent(t, dissipative_bc(t.dim_e()), z, h);
}

DecomposedVector lstar_resolvent(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (!(z.imag() > 0.0)) throw DomainError("lstar_resolvent: requires Im z > 0");
  return krein_resolvent(t, adjoint_bc(t.dim_e()), z, h);
}

Matrix resolvent_matrix(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  auto [f, phi] = krein_block(t, bc, z, identity(t.dim_h()));
  return t.a0_inv() * f + t.pi() * phi;
}

DecomposedVector solve_bvp(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& f,
                           const Vector& phi) {
  if (f.size() != t.dim_h() || phi.size() != t.dim_e()) throw DimensionError("solve_bvp: wrong sizes");
  Matrix k = bc.alpha() + bc.beta() * m_function(t, z);
  Vector rhs = phi - bc.beta() * gamma_adjoint_apply(t, z, f);
  Vector psi = checked_boundary_inverse(k, z) * rhs;
  Vector ff = t.shifted_solve(z, f + z * (t.pi() * psi));
  return {ff, psi};
}

Matrix reconstruct_generator(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  Matrix r = resolvent_matrix(t, bc, z);
  Matrix rinv;
  try {
    rinv = inverse(r);
  } catch (const SingularMatrix& e) {
    throw SingularMatrix("reconstruct_generator: resolvent matrix is singular", e.ratio());
  }
  return z * identity(t.dim_h()) + rinv;
}

cplx ZGrid::point(int i, int j) const {
  double x = n_re == 1 ? re0 : re0 + (re1 - re0) * i / (n_re - 1);
  double y = n_im == 1 ? im0 : im0 + (im1 - im0) * j / (n_im - 1);
  return {x, y};
}

namespace {

// Golden-section minimization of g on [a, b].
template <class G>
std::pair<double, double> golden(G&& g, double a, double b, int iters = 120) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < iters && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  return gc < gd ? std::pair{c, gc} : std::pair{d, gd};
}

}  // namespace

ScanResult spectrum_scan(const TripleDescriptor& t, const BoundaryCondition& bc, const ZGrid& grid) {
  if (grid.n_re < 1 || grid.n_im < 1) throw DomainError("spectrum_scan: empty grid");
  ScanResult out;
  out.samples.reserve(grid.size());
  for (int j = 0; j < grid.n_im; ++j)
    for (int i = 0; i < grid.n_re; ++i) out.samples.push_back(resolvent_sample(t, bc, grid.point(i, j)));

  std::vector<double> vals;
  for (const auto& s : out.samples)
    if (s.regular) vals.push_back(s.minsv);
  if (vals.empty()) return out;
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  out.median_minsv = vals[vals.size() / 2];
  const double threshold = kCandidateFactor * out.median_minsv;

  auto value = [&](cplx z) {
    ResolventSample s = resolvent_sample(t, bc, z);
    return s.regular ? s.minsv : INFINITY;
  };
  auto at = [&](int i, int j) -> const ResolventSample& { return out.samples[j * grid.n_re + i]; };

  RealVector poles = t.a0_eigenvalues();
  const double dx = grid.n_re > 1 ? (grid.re1 - grid.re0) / (grid.n_re - 1) : 0.0;
  const double dy = grid.n_im > 1 ? (grid.im1 - grid.im0) / (grid.n_im - 1) : 0.0;

  for (int j = 0; j < grid.n_im; ++j) {
    for (int i = 0; i < grid.n_re; ++i) {
      const ResolventSample& s = at(i, j);
      if (!s.regular) continue;
      bool is_min = true;
      for (int dj = -1; dj <= 1 && is_min; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj) continue;
          int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= grid.n_re || jj >= grid.n_im) continue;
          const ResolventSample& o = at(ii, jj);
          if (o.regular && o.minsv < s.minsv) {
            is_min = false;
            break;
          }
        }
      if (!is_min) continue;

      // Refine inside the grid box: real part by golden section (split at poles
      // of M on the real axis), then the imaginary part, alternating.
      cplx z = s.z;
      double best = s.minsv;
      for (int round = 0; round < (dy > 0 ? 4 : 1); ++round) {
        if (dx > 0) {
          double lo = std::max(grid.re0, z.real() - dx), hi = std::min(grid.re1, z.real() + dx);
          std::vector<double> cuts = {lo};
          if (std::abs(z.imag()) < 1e-12)
            for (Eigen::Index k = 0; k < poles.size(); ++k)
              if (poles(k) > lo && poles(k) < hi) cuts.push_back(poles(k));
          cuts.push_back(hi);
          std::sort(cuts.begin(), cuts.end());
          for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            double a = cuts[c], b = cuts[c + 1];
            double margin = 1e-13 * std::max(1.0, std::abs(b));
            if (c > 0) a += margin;
            if (c + 2 < cuts.size()) b -= margin;
            if (b <= a) continue;
            double y = z.imag();
            auto [x, v] = golden([&](double xx) { return value({xx, y}); }, a, b);
            if (v < best) {
              best = v;
              z = {x, y};
            }
          }
        }
        if (dy > 0) {
          double x = z.real();
          auto [y, v] = golden([&](double yy) { return value({x, yy}); }, std::max(grid.im0, z.imag() - dy),
                              std::min(grid.im1, z.imag() + dy));
          if (v < best) {
            best = v;
            z = {x, y};
          }
        }
      }
      if (best < threshold) {
        bool dup = false;
        for (auto& c : out.candidates) {
          if (std::abs(c.z - z) <= std::max(dx, dy)) {
            dup = true;
            if (best < c.minsv) c = resolvent_sample(t, bc, z);
          }
        }
        if (!dup) out.candidates.push_back(resolvent_sample(t, bc, z));
      }
    }
  }
  return out;
}

}  // namespace modelkit
