#pragma once

#include <span>
#include <vector>

#include "modelkit/dilation.hpp"
#include "modelkit/extensions.hpp"
#include "modelkit/hardy.hpp"
#include "modelkit/quadrature.hpp"

namespace modelkit {

// A function on R: Cauchy terms plus Fourier transforms of half-line grid data,
// v^(k) = (2 pi)^{-1/2} int e^{ikx} v(x) dx.
struct ModelComponent {
  StructuredHardyFunction rational;
  std::vector<GridFunction> fourier;

  ModelComponent() = default;
  explicit ModelComponent(int dim_e) : rational(dim_e) {}

  int dim_e() const { return rational.dim_e(); }
  bool structured() const { return fourier.empty(); }
  Vector operator()(double k) const;

  ModelComponent operator+(const ModelComponent& o) const;
  ModelComponent operator*(cplx s) const;
};

// (gtilde, g) in the space with weight [[I, S*], [S, I]].
struct ModelElement {
  ModelComponent gtilde, g;

  ModelElement() = default;
  explicit ModelElement(int dim_e) : gtilde(dim_e), g(dim_e) {}

  int dim_e() const { return gtilde.dim_e(); }
  bool structured() const { return gtilde.structured() && g.structured(); }
  ModelElement operator+(const ModelElement& o) const;
  ModelElement operator-(const ModelElement& o) const;
  ModelElement operator*(cplx s) const;
};

struct ModelParams {
  cplx z_plus, z_minus;
  Vector w_plus, w_minus;
};

void validate_params(const ModelParams& p, int dim_e);

// [[I, S*(k)], [S(k), I]]
Matrix model_weight(const TripleDescriptor& t, double k);
double weight_min_eigenvalue(const TripleDescriptor& t, double k);

// int <W (gt1, g1), (gt2, g2)> dk on a real-line rule; conjugate-linear in e2.
cplx model_inner(const TripleDescriptor& t, const ModelElement& e1, const ModelElement& e2, const RealLineGrid& k);

// Same pairing by residues: every term is closed in the half-plane where its
// non-rational factors are analytic; same-side Fourier pairs use Plancherel on the grid.
cplx model_inner_exact(const TripleDescriptor& t, const ModelElement& e1, const ModelElement& e2);

// F+(v-, v, v+) = -pi^{-1/2} Gamma_0 (L - (k - i0))^{-1} v + S*(k) v-^(k) + v+^(k)
Vector f_plus(const TripleDescriptor& t, const DilationElement& elem, double k);
// F-(v-, v, v+) = -pi^{-1/2} Gamma_0 (L* - (k + i0))^{-1} v + v-^(k) + S(k) v+^(k)
Vector f_minus(const TripleDescriptor& t, const DilationElement& elem, double k);

// v = sqrt2 gamma(z+)(M(z+) + i)^{-1} w+ + sqrt2 gamma(z-)(M(z-) - i)^{-1} w-
DecomposedVector g_vector(const TripleDescriptor& t, const ModelParams& p);

// Recover w+- from v in G(z+, z-); throws DomainError when v is not in G.
ModelParams decompose_in_g(const TripleDescriptor& t, cplx z_plus, cplx z_minus, const Vector& v,
                           double tol = 1e-8);

// (v-, g_vector(p), v+) as a dilation element.
DilationElement g_element(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                          const GridFunction& v_plus);

ModelElement phi_map(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                     const GridFunction& v_plus);

// max_k |W(k) Phi(e)(k) - (F+ e, F- e)(k)|
double weight_identity_defect(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                              const GridFunction& v_plus, std::span<const double> ks);

// max_k |(F+, F-)(R(z) e)(k) - (k - z)^{-1} W(k) Phi(e)(k)| for e = g_element(p, v-, v+).
// Phi is only determined modulo the kernel of W, so the weight is applied to both sides.
double intertwine_defect(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                         const GridFunction& v_plus, cplx z, std::span<const double> ks);

// P_K on rational pairs; Fourier parts are accepted only in D+ (gtilde, data on R+)
// and D- (g, data on R-), where they are projected out.
ModelElement pk_project(const TripleDescriptor& t, const ModelElement& e);

enum class ModelSide { Plus, Minus };

// Plus: lambda in C- and both F+ and F- identities of part (i); Minus: lambda in C+, part (ii).
// Returned relative to max(1, max_k |F(A_B - lambda)^{-1} h|).
double model_resolvent_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx lambda,
                              const Vector& h, std::span<const double> ks, ModelSide side);

// max_k |F-(0, (L* - z)^{-1} h, 0)(k) - (f(k) - f(z)) / (k - z)|, f = F-(0, h, 0), z in C+
double toeplitz_check(const TripleDescriptor& t, cplx z, const Vector& h, std::span<const double> ks);

// Triangular perturbation: F(A_B - z)^{-1} h against
// P f/(. - z) - P Theta(.) Theta(z)^{-1} P' f/(. - z), built with the Cauchy-evaluation rule.
// z in C- uses f = F+ h with (P, P', Theta) = (P-, P+, Theta_B); z in C+ uses F- h and (P+, P-, Theta^_B).
double triangular_check(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& h,
                        std::span<const double> ks);

}  // namespace modelkit
