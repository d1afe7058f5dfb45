#include "modelkit/linalg.hpp"

#include <cmath>
#include <sstream>

namespace modelkit {

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

HermitianCheck hermitize_check(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) throw DimensionError("hermitize_check: matrix is not square");
  HermitianCheck r;
  r.defect = max_abs(a - a.adjoint());
  double scale = max_abs(a);
  r.pass = r.defect <= rel_tol * (scale > 0 ? scale : 1.0);
  return r;
}

RealVector singular_values(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

double singular_ratio(const Matrix& a) {
  RealVector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

Matrix solve_unchecked(const Matrix& a, const Matrix& b) {
  Eigen::FullPivLU<Matrix> lu(a);
  Matrix x = lu.solve(b);
  for (int it = 0; it < 2; ++it) x += lu.solve(b - a * x);
  return x;
}

Matrix solve(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != a.cols()) throw DimensionError("solve: matrix is not square");
  if (a.rows() != b.rows()) throw DimensionError("solve: right-hand side has wrong size");
  double ratio = singular_ratio(a);
  if (!(ratio >= tol)) {
    std::ostringstream os;
    os << "solve: singular matrix (sigma_min/sigma_max = " << ratio << ")";
    throw SingularMatrix(os.str(), ratio);
  }
  Matrix x = solve_unchecked(a, b);
  if (!all_finite(x)) throw SingularMatrix("solve: non-finite result", ratio);
  return x;
}

Matrix inverse(const Matrix& a, double tol) {
  return solve(a, identity(a.rows()), tol);
}

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

int numerical_rank(const Matrix& a, double tol) {
  RealVector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

double max_hermitian_eigenvalue(const Matrix& a) {
  Matrix h = 0.5 * (a + a.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

double min_hermitian_eigenvalue(const Matrix& a) {
  Matrix h = 0.5 * (a + a.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace modelkit
