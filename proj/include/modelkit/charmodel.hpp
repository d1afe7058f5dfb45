#pragma once

#include <vector>

#include "modelkit/extensions.hpp"

namespace modelkit {

struct CharFuncSample {
  cplx z;
  Matrix s;
  double contraction_defect = 0.0;  // largest eigenvalue of S*S - I
  double form_agreement = 0.0;      // |(M - i)(M + i)^{-1} - (I - 2i(M + i)^{-1})|
};

CharFuncSample char_function_from_m(const Matrix& m, cplx z = 0.0);
// Im z >= 0
CharFuncSample char_function(const TripleDescriptor& t, cplx z);

// I + 2i (M - iI)^{-1}, the value S*(conj z) for Im z <= 0.
Matrix char_adjoint_from_m(const Matrix& m);
Matrix char_adjoint(const TripleDescriptor& t, cplx z);

// Boundary value S(k) at real k.  Within relative distance 1e-4 of an eigenvalue
// of A0, where M has a pole, the value comes from the coupled (f, phi) system
// with the resonant modes kept unreduced.
Matrix char_function_real(const TripleDescriptor& t, double k);
bool near_exceptional(const TripleDescriptor& t, double k);

enum class Sign { Plus, Minus };
Matrix chi(const BoundaryCondition& bc, Sign sign);

// Theta_B on the lower half-plane, hatted version on the upper one.
Matrix theta(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);
Matrix theta_hat(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);
// 2i Q_B(z) (I - S*(conj z))^{-1} = (B + M)^{-1}(M - iI) on the lower half-plane and
// -2i Q_B(z) (I - S(z))^{-1} = (B + M)^{-1}(M + iI) on the upper one
Matrix theta_inverse(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);
Matrix theta_hat_inverse(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);
// |Theta * (inverse form) - I|, either half-plane (picks the right factor)
double theta_cross_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z);

// Boundary values on the real axis from the matching half-plane.
Matrix theta_real(const TripleDescriptor& t, const BoundaryCondition& bc, double k);
Matrix theta_hat_real(const TripleDescriptor& t, const BoundaryCondition& bc, double k);

// Gamma_0 (L - z)^{-1} h = -(M(z) - iI)^{-1} G(conj z)* h, Im z <= 0
Vector l_trace(const TripleDescriptor& t, cplx z, const Vector& h);
// Gamma_0 (L* - z)^{-1} h = -(M(z) + iI)^{-1} G(conj z)* h, Im z >= 0
Vector lstar_trace(const TripleDescriptor& t, cplx z, const Vector& h);

double trace_formula_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& h);

struct HardyEntry {
  double eps = 0.0;
  double integral = 0.0;    // window + tails
  double window = 0.0;
  double tails = 0.0;
  double abserr = 0.0;
  double identity_rhs = NAN;  // pi|h|^2 - eps * int |(L - k + i eps)^{-1} h|^2
};

struct HardyBoundReport {
  std::vector<HardyEntry> entries;
  double sup = 0.0;
  double bound = 0.0;  // pi |h|^2
  bool pass = false;
  bool monotone = false;  // integrals increase as eps shrinks (reported only)
};

HardyBoundReport hardy_bound_check(const TripleDescriptor& t, const Vector& h, const std::vector<double>& eps,
                                   double k_window = 200.0, bool with_identity = true);

}  // namespace modelkit
