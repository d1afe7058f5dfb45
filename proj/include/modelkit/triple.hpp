#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modelkit/linalg.hpp"

namespace modelkit {

// A0 = V diag(values) V*, V unitary.
struct SpectralData {
  Matrix vectors;
  RealVector values;
};

// Finite (A0, Pi, Lambda) data.  A0inv is stored next to A0; when A0 passes its
// Hermitian check the shifted solves (I - z A0inv)^{-1} go through the
// eigendecomposition, otherwise through LU.
class TripleDescriptor {
 public:
  TripleDescriptor(Matrix a0, Matrix pi, Matrix lambda, std::string label);
  TripleDescriptor(Matrix a0, Matrix pi, Matrix lambda, std::string label, SpectralData spectral);

  int dim_h() const { return static_cast<int>(a0_.rows()); }
  int dim_e() const { return static_cast<int>(pi_.cols()); }
  const Matrix& a0() const { return a0_; }
  const Matrix& a0_inv() const { return a0_inv_; }
  const Matrix& pi() const { return pi_; }
  const Matrix& lambda() const { return lambda_; }
  const std::string& label() const { return label_; }
  bool has_spectral() const { return spectral_.has_value(); }
  const SpectralData& spectral() const { return *spectral_; }

  // Eigenvalues of A0 (from the decomposition, or by a Hermitian solve).
  RealVector a0_eigenvalues() const;

  // (I - z A0inv)^{-1} rhs.  Throws SingularFrequency near spectrum(A0).
  Matrix shifted_solve(cplx z, const Matrix& rhs) const;
  // Same through LU regardless of the decomposition (cross-check path).
  Matrix shifted_solve_lu(cplx z, const Matrix& rhs) const;

  // Pi* (I - z A0inv)^{-1} Pi, without forming the H-sized solve when possible.
  Matrix pi_resolvent_pi(cplx z) const;
  // Pi* (I - z A0inv)^{-1} h
  Matrix pi_resolvent(cplx z, const Matrix& h) const;

 private:
  void check_shapes() const;
  Eigen::VectorXcd shift_factors(cplx z) const;

  Matrix a0_, a0_inv_, pi_, lambda_;
  std::string label_;
  std::optional<SpectralData> spectral_;
  Matrix coupling_;  // V* Pi
};

struct DecomposedVector {
  Vector f;
  Vector phi;

  DecomposedVector operator+(const DecomposedVector& o) const { return {f + o.f, phi + o.phi}; }
  DecomposedVector operator-(const DecomposedVector& o) const { return {f - o.f, phi - o.phi}; }
  DecomposedVector operator*(cplx s) const { return {f * s, phi * s}; }
};

struct CheckItem {
  std::string name;
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckItem> items;
  bool ok() const;
  const CheckItem* find(const std::string& name) const;
};

ValidationReport validate_triple(const TripleDescriptor& t);

Vector assemble(const TripleDescriptor& t, const DecomposedVector& d);

DecomposedVector gamma(const TripleDescriptor& t, cplx z, const Vector& phi);
// Assembled solution operator G(z) = (I - z A0inv)^{-1} Pi, dimH x dimE.
Matrix gamma_matrix(const TripleDescriptor& t, cplx z);
// G(conj z)* h = Pi* (I - z A0inv)^{-1} h
Vector gamma_adjoint_apply(const TripleDescriptor& t, cplx z, const Vector& h);

Vector a_apply(const TripleDescriptor& t, const DecomposedVector& d);
Matrix m_function(const TripleDescriptor& t, cplx z);
Vector trace0(const DecomposedVector& d);
Vector trace1(const TripleDescriptor& t, const DecomposedVector& d);

double green_defect(const TripleDescriptor& t, const DecomposedVector& du, const DecomposedVector& dv);
// Scale used for the relative Green tolerance: sum of the four term moduli.
double green_scale(const TripleDescriptor& t, const DecomposedVector& du, const DecomposedVector& dv);

struct HerglotzReport {
  double defect = 0.0;
  double min_eigenvalue = 0.0;
};
HerglotzReport herglotz_defect(const TripleDescriptor& t, cplx z);

int simplicity_probe(const TripleDescriptor& t, std::span<const cplx> zs);

}  // namespace modelkit
