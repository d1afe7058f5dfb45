#include "modelkit/charmodel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>

namespace modelkit {

namespace {

constexpr double kExceptionalRadius = 1e-4;

Matrix plus_i_inverse(const Matrix& m, double sign) {
  Matrix k = m + sign * kI * identity(m.rows());
  try {
    return solve(k, identity(m.rows()));
  } catch (const SingularMatrix& e) {
    throw SingularMatrix(sign > 0 ? "M + iI is singular" : "M - iI is singular", e.ratio());
  }
}

// phi from (I - z A0inv) f - z Pi phi = h, Pi* f + (Lambda + c) phi = e, in the A0
// eigenbasis: modes with |1 - z/d_j| < 1e-2 stay as unknowns, the rest are eliminated.
// The reduced system stays regular at real eigenvalues of A0.
Matrix boundary_solve(const TripleDescriptor& t, cplx z, cplx c, const Matrix& h, const Matrix& e) {
  SpectralData sd = t.has_spectral() ? t.spectral() : [&] {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.a0());
    return SpectralData{es.eigenvectors(), es.eigenvalues()};
  }();
  const Matrix coupling = sd.vectors.adjoint() * t.pi();
  const Matrix hh = sd.vectors.adjoint() * h;
  const int n = t.dim_e();
  std::vector<Eigen::Index> kept;
  Matrix schur = t.lambda() + c * identity(n);
  Matrix rhs_e = e;
  for (Eigen::Index j = 0; j < sd.values.size(); ++j) {
    const cplx s = 1.0 - z / sd.values(j);
    if (std::abs(s) < 1e-2) {
      kept.push_back(j);
      continue;
    }
    schur += (z / s) * coupling.row(j).adjoint() * coupling.row(j);
    rhs_e -= coupling.row(j).adjoint() * hh.row(j) / s;
  }
  const auto m = static_cast<Eigen::Index>(kept.size());
  Matrix k = Matrix::Zero(m + n, m + n);
  Matrix rhs(m + n, h.cols());
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index j = kept[a];
    k(a, a) = 1.0 - z / sd.values(j);
    k.block(a, m, 1, n) = -z * coupling.row(j);
    k.block(m, a, n, 1) = coupling.row(j).adjoint();
    rhs.row(a) = hh.row(j);
  }
  k.bottomRightCorner(n, n) = schur;
  rhs.bottomRows(n) = rhs_e;
  return solve(k, rhs).bottomRows(n);
}

}  // namespace

CharFuncSample char_function_from_m(const Matrix& m, cplx z) {
  const auto n = m.rows();
  Matrix inv = plus_i_inverse(m, 1.0);
  CharFuncSample r;
  r.z = z;
  r.s = identity(n) - 2.0 * kI * inv;
  Matrix product = (m - kI * identity(n)) * inv;
  r.form_agreement = (product - r.s).norm();
  r.contraction_defect = max_hermitian_eigenvalue(r.s.adjoint() * r.s - identity(n));
  return r;
}

CharFuncSample char_function(const TripleDescriptor& t, cplx z) {
  if (z.imag() < 0.0) throw DomainError("char_function: requires Im z >= 0");
  return char_function_from_m(m_function(t, z), z);
}

Matrix char_adjoint_from_m(const Matrix& m) { return identity(m.rows()) + 2.0 * kI * plus_i_inverse(m, -1.0); }

Matrix char_adjoint(const TripleDescriptor& t, cplx z) {
  if (z.imag() > 0.0) throw DomainError("char_adjoint: requires Im z <= 0");
  return char_adjoint_from_m(m_function(t, z));
}

bool near_exceptional(const TripleDescriptor& t, double k) {
  RealVector d = t.a0_eigenvalues();
  for (Eigen::Index j = 0; j < d.size(); ++j)
    if (std::abs(k - d(j)) < kExceptionalRadius * std::max(1.0, std::abs(d(j)))) return true;
  return false;
}

Matrix char_function_real(const TripleDescriptor& t, double k) {
  if (!near_exceptional(t, k)) return char_function_from_m(m_function(t, k), k).s;
  const int n = t.dim_e();
  return identity(n) - 2.0 * kI * boundary_solve(t, k, kI, Matrix::Zero(t.dim_h(), n), identity(n));
}

Matrix chi(const BoundaryCondition& bc, Sign sign) {
  const double s = sign == Sign::Plus ? 1.0 : -1.0;
  // 1/(2i) = -i/2, applied as an exact scaling
  return (s * bc.b() + kI * identity(bc.dim_e())) * cplx(0.0, -0.5);
}

Matrix theta(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  if (!(z.imag() < 0.0)) throw DomainError("theta: requires Im z < 0");
  q_function(t, bc, z);  // z in Q_B
  Matrix sa = char_adjoint(t, z);
  (void)solve(identity(t.dim_e()) - sa, identity(t.dim_e()));
  return sa * chi(bc, Sign::Plus) + chi(bc, Sign::Minus);
}

Matrix theta_hat(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("theta_hat: requires Im z > 0");
  q_function(t, bc, z);
  Matrix s = char_function(t, z).s;
  (void)solve(identity(t.dim_e()) - s, identity(t.dim_e()));
  return s * chi(bc, Sign::Minus) + chi(bc, Sign::Plus);
}

Matrix theta_inverse(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  if (!(z.imag() < 0.0)) throw DomainError("theta_inverse: requires Im z < 0");
  Matrix q = q_function(t, bc, z);
  Matrix sa = char_adjoint(t, z);
  return 2.0 * kI * q * solve(identity(t.dim_e()) - sa, identity(t.dim_e()));
}

Matrix theta_hat_inverse(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("theta_hat_inverse: requires Im z > 0");
  Matrix q = q_function(t, bc, z);
  Matrix s = char_function(t, z).s;
  return -2.0 * kI * q * solve(identity(t.dim_e()) - s, identity(t.dim_e()));
}

double theta_cross_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z) {
  Matrix p = z.imag() < 0.0 ? theta(t, bc, z) * theta_inverse(t, bc, z)
                            : theta_hat(t, bc, z) * theta_hat_inverse(t, bc, z);
  return (p - identity(t.dim_e())).norm();
}

Matrix theta_real(const TripleDescriptor& t, const BoundaryCondition& bc, double k) {
  Matrix s = char_function_real(t, k);
  return s.adjoint() * chi(bc, Sign::Plus) + chi(bc, Sign::Minus);
}

Matrix theta_hat_real(const TripleDescriptor& t, const BoundaryCondition& bc, double k) {
  Matrix s = char_function_real(t, k);
  return s * chi(bc, Sign::Minus) + chi(bc, Sign::Plus);
}

namespace {

Vector trace_at(const TripleDescriptor& t, cplx z, const Vector& h, double sign) {
  Matrix minv = plus_i_inverse(m_function(t, z), sign);
  return -(minv * gamma_adjoint_apply(t, z, h));
}

}  // namespace

Vector l_trace(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (z.imag() > 0.0) throw DomainError("l_trace: requires Im z <= 0");
  if (z.imag() == 0.0 && near_exceptional(t, z.real()))
    return boundary_solve(t, z, -kI, h, Matrix::Zero(t.dim_e(), 1));
  return trace_at(t, z, h, -1.0);
}

Vector lstar_trace(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (z.imag() < 0.0) throw DomainError("lstar_trace: requires Im z >= 0");
  if (z.imag() == 0.0 && near_exceptional(t, z.real()))
    return boundary_solve(t, z, kI, h, Matrix::Zero(t.dim_e(), 1));
  return trace_at(t, z, h, 1.0);
}

double trace_formula_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& h) {
  if (z.imag() == 0.0) throw DomainError("trace_formula_defect: z must be off the real axis");
  Vector lhs = trace0(krein_resolvent(t, bc, z, h));
  Vector rhs;
  if (z.imag() < 0.0)
    rhs = theta_inverse(t, bc, z) * trace0(l_resolvent(t, z, h));
  else
    rhs = theta_hat_inverse(t, bc, z) * trace0(lstar_resolvent(t, z, h));
  return (lhs - rhs).norm();
}

namespace {

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double gsl_trampoline(double x, void* p) { return (*static_cast<std::function<double(double)>*>(p))(x); }

struct Integral {
  double window = 0.0, tails = 0.0, abserr = 0.0;
};

Integral integrate_line(std::function<double(double)> f, double window, std::vector<double> breaks) {
  quiet_gsl();
  const size_t limit = 20000;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(limit);
  gsl_function gf{&gsl_trampoline, &f};
  Integral total;
  std::vector<double> pts = {-window};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks)
    if (b > -window && b < window) pts.push_back(b);
  pts.push_back(window);
  double v = 0.0, e = 0.0;
  gsl_integration_qagp(&gf, pts.data(), pts.size(), 1e-13, 1e-11, limit, w, &v, &e);
  total.window = v;
  total.abserr += e;
  gsl_integration_qagiu(&gf, window, 1e-13, 1e-10, limit, w, &v, &e);
  total.tails += v;
  total.abserr += e;
  gsl_integration_qagil(&gf, -window, 1e-13, 1e-10, limit, w, &v, &e);
  total.tails += v;
  total.abserr += e;
  gsl_integration_workspace_free(w);
  return total;
}

}  // namespace

HardyBoundReport hardy_bound_check(const TripleDescriptor& t, const Vector& h, const std::vector<double>& eps,
                                   double k_window, bool with_identity) {
  HardyBoundReport rep;
  rep.bound = std::numbers::pi * h.squaredNorm();
  if (h.norm() == 0.0) {
    for (double e : eps) rep.entries.push_back({e, 0.0, 0.0, 0.0, 0.0, 0.0});
    rep.pass = true;
    rep.monotone = true;
    return rep;
  }

  // Peaks of the integrand sit at the real parts of the eigenvalues of L.
  std::vector<double> breaks;
  {
    Matrix lmat = reconstruct_generator(t, dissipative_bc(t.dim_e()), cplx(0.0, -1.0));
    Eigen::ComplexEigenSolver<Matrix> es(lmat, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) breaks.push_back(es.eigenvalues()(i).real());
  }

  for (double e : eps) {
    if (!(e > 0.0)) throw DomainError("hardy_bound_check: eps must be positive");
    auto trace_norm = [&](double k) { return l_trace(t, cplx(k, -e), h).squaredNorm(); };
    HardyEntry entry;
    entry.eps = e;
    Integral in = integrate_line(trace_norm, k_window, breaks);
    entry.window = in.window;
    entry.tails = in.tails;
    entry.integral = in.window + in.tails;
    entry.abserr = in.abserr;
    if (with_identity) {
      auto res_norm = [&](double k) { return assemble(t, l_resolvent(t, cplx(k, -e), h)).squaredNorm(); };
      Integral r = integrate_line(res_norm, k_window, breaks);
      entry.identity_rhs = rep.bound - e * (r.window + r.tails);
    }
    rep.entries.push_back(entry);
  }

  rep.sup = 0.0;
  for (const auto& en : rep.entries) rep.sup = std::max(rep.sup, en.integral);
  rep.pass = rep.sup <= rep.bound * (1.0 + 5e-3);
  std::vector<HardyEntry> sorted = rep.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
  rep.monotone = true;
  for (size_t i = 1; i < sorted.size(); ++i) rep.monotone &= sorted[i].integral >= sorted[i - 1].integral;
  return rep;
}

}  // namespace modelkit
