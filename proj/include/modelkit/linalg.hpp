#pragma once

#include <Eigen/Dense>
#include <complex>

#include "modelkit/errors.hpp"

namespace modelkit {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

struct HermitianCheck {
  double defect = 0.0;
  bool pass = false;
};

// max|A - A*| against 1e-12 * max|A| (absolute when A = 0).
HermitianCheck hermitize_check(const Matrix& a, double rel_tol = 1e-12);

double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

RealVector singular_values(const Matrix& a);

// Smallest over largest singular value; 0 for the zero matrix.
double singular_ratio(const Matrix& a);

// Solves a x = b by full-pivot LU with two steps of iterative refinement.
// Throws SingularMatrix if sigma_min < tol * sigma_max.
Matrix solve(const Matrix& a, const Matrix& b, double tol = 1e-12);
Matrix inverse(const Matrix& a, double tol = 1e-12);

// Same, but the caller already knows the singular values are fine.
Matrix solve_unchecked(const Matrix& a, const Matrix& b);

Matrix identity(Eigen::Index n);

// Numerical rank: singular values above tol * max.
int numerical_rank(const Matrix& a, double tol = 1e-10);

// Largest eigenvalue of a Hermitian matrix (after symmetrization).
double max_hermitian_eigenvalue(const Matrix& a);
double min_hermitian_eigenvalue(const Matrix& a);

inline cplx inner(const Vector& u, const Vector& v) { return v.dot(u); }

}  // namespace modelkit
