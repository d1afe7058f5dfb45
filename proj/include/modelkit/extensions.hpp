#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modelkit/triple.hpp"

namespace modelkit {

// (alpha, beta) with invertible beta; B = beta^{-1} alpha.
class BoundaryCondition {
 public:
  BoundaryCondition(Matrix alpha, Matrix beta, std::string label = "custom");
  static BoundaryCondition from_b(const Matrix& b, std::string label = "custom");

  const Matrix& alpha() const { return alpha_; }
  const Matrix& beta() const { return beta_; }
  const Matrix& b() const { return b_; }
  const std::string& label() const { return label_; }
  int dim_e() const { return static_cast<int>(b_.rows()); }
  bool hermitian() const;

 private:
  Matrix alpha_, beta_, b_;
  std::string label_;
};

BoundaryCondition dissipative_bc(int dim_e);        // B = -iI, the operator L
BoundaryCondition adjoint_bc(int dim_e);            // B = +iI, the operator L*
BoundaryCondition neumann_bc(int dim_e);            // B = 0
BoundaryCondition dirichlet_eps_bc(int dim_e, double eps);  // (I, eps I)
BoundaryCondition hermitian_random_bc(int dim_e, std::uint64_t seed);

struct ResolventSample {
  cplx z;
  double minsv = 0.0;
  bool in_qb = false;
  bool regular = true;  // false when z hit spectrum(A0)
};

// Smallest singular value of B + M(z) and the membership test for Q_B.
ResolventSample resolvent_sample(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);

// -(B + M(z))^{-1}
Matrix q_function(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);

DecomposedVector krein_resolvent(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z,
                                 const Vector& h);
DecomposedVector l_resolvent(const TripleDescriptor& t, cplx z, const Vector& h);
DecomposedVector lstar_resolvent(const TripleDescriptor& t, cplx z, const Vector& h);

// Assembled resolvent matrix of A_B at z.
Matrix resolvent_matrix(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);

// (A - z) u = f, (alpha Gamma_0 + beta Gamma_1) u = phi
DecomposedVector solve_bvp(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& f,
                           const Vector& phi);

// zI + R(z)^{-1}
Matrix reconstruct_generator(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);

// Rectangle [re0, re1] x [im0, im1] sampled with n_re x n_im points (endpoints
// included); n_im = 1 gives a horizontal line at im0.
struct ZGrid {
  double re0 = 0, re1 = 0, im0 = 0, im1 = 0;
  int n_re = 0, n_im = 1;
  cplx point(int i, int j) const;
  int size() const { return n_re * n_im; }
};

struct ScanResult {
  std::vector<ResolventSample> samples;  // row-major in (im, re)
  std::vector<ResolventSample> candidates;
  double median_minsv = 0.0;
};

ScanResult spectrum_scan(const TripleDescriptor& t, const BoundaryCondition& bc, const ZGrid& grid);

}  // namespace modelkit
