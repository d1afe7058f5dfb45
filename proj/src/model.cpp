#include "modelkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "modelkit/charmodel.hpp"

namespace modelkit {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);
const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

void require_no_constant(const ModelComponent& c, const char* where) {
  if (c.rational.has_constant()) throw DomainError(std::string(where) + ": constant terms are not in L2");
}

// Fourier transform of grid data continued to complex k.
Vector fourier_at(const GridFunction& v, cplx k) {
  const RealVector& x = v.grid->nodes();
  const RealVector& w = v.grid->weights();
  Vector phase(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) phase(j) = w(j) * std::exp(kI * k * x(j));
  return v.values * phase / kSqrt2Pi;
}

// Continuation of k -> conj(v^(k)) as a row vector.
Eigen::RowVectorXcd fourier_conj_at(const GridFunction& v, cplx k) {
  const RealVector& x = v.grid->nodes();
  const RealVector& w = v.grid->weights();
  Vector phase(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) phase(j) = w(j) * std::exp(-kI * k * x(j));
  return (v.values.conjugate() * phase).transpose() / kSqrt2Pi;
}

struct Atom {
  const CauchyTerm* term = nullptr;
  const GridFunction* data = nullptr;
  bool rational() const { return term != nullptr; }
  bool on_positive() const { return data->grid->side() == HalfLine::Positive; }
};

std::vector<Atom> atoms(const ModelComponent& c) {
  std::vector<Atom> out;
  for (const auto& t : c.rational.terms())
    if (t.residue.squaredNorm() > 0.0) out.push_back({&t, nullptr});
  for (const auto& f : c.fourier) out.push_back({nullptr, &f});
  return out;
}

enum class Op { Identity, S, SAdjoint };

Matrix op_at(const TripleDescriptor& t, Op op, cplx z) {
  switch (op) {
    case Op::Identity: return identity(t.dim_e());
    case Op::S: return char_function(t, z).s;
    case Op::SAdjoint: return char_adjoint(t, z);
  }
  return {};
}

// M'(z) = Pi* (I - z A0inv)^{-2} Pi
Matrix m_prime(const TripleDescriptor& t, cplx z) { return t.pi_resolvent(z, gamma_matrix(t, z)); }

Matrix op_derivative(const TripleDescriptor& t, Op op, cplx z) {
  if (op == Op::Identity) return Matrix::Zero(t.dim_e(), t.dim_e());
  const Matrix id = identity(t.dim_e());
  const Matrix r = solve(m_function(t, z) + (op == Op::S ? kI : -kI) * id, id);
  const Matrix d = r * m_prime(t, z) * r;
  return op == Op::S ? Matrix(2.0 * kI * d) : Matrix(-2.0 * kI * d);
}

Vector x_at(const Atom& x, cplx z) {
  if (x.rational()) return x.term->residue / (z - x.term->pole);
  return fourier_at(*x.data, z);
}

Eigen::RowVectorXcd ybar_at(const Atom& y, cplx z) {
  if (y.rational()) return y.term->residue.adjoint() / (z - std::conj(y.term->pole));
  return fourier_conj_at(*y.data, z);
}

// int y(k)* X(k) x(k) dk
cplx pair_atoms(const TripleDescriptor& t, const Atom& y, Op op, const Atom& x) {
  bool up = op == Op::S, down = op == Op::SAdjoint;
  if (!x.rational()) (x.on_positive() ? up : down) = true;
  if (!y.rational()) (y.on_positive() ? down : up) = true;
  if (up && down) {
    if (op == Op::Identity && !x.rational() && !y.rational()) return quad_inner(*x.data, *y.data);
    throw DomainError("model_inner_exact: term has no closed form in the structured class");
  }
  const bool x_pole = x.rational(), y_pole = y.rational();
  const cplx p = x_pole ? x.term->pole : cplx(0.0);
  const cplx qbar = y_pole ? std::conj(y.term->pole) : cplx(0.0);
  if (!up && !down) {
    // Both rational against the identity: either contour works.
    if ((p.imag() > 0.0) == (qbar.imag() > 0.0)) return 0.0;
    up = true;
  }
  auto inside = [&](cplx z) { return up ? z.imag() > 0.0 : z.imag() < 0.0; };
  const cplx two_pi_i = 2.0 * std::numbers::pi * kI;
  const double sign = up ? 1.0 : -1.0;
  if (x_pole && y_pole && inside(p) && std::abs(p - qbar) <= 1e-10 * (1.0 + std::abs(p))) {
    // b* X(k) a / (k - p)^2
    return sign * two_pi_i * (y.term->residue.adjoint() * op_derivative(t, op, p) * x.term->residue)(0, 0);
  }
  cplx sum = 0.0;
  if (x_pole && inside(p)) sum += (ybar_at(y, p) * op_at(t, op, p) * x.term->residue)(0, 0);
  if (y_pole && inside(qbar)) sum += (y.term->residue.adjoint() * op_at(t, op, qbar) * x_at(x, qbar))(0, 0);
  return sign * two_pi_i * sum;
}

cplx pair_components(const TripleDescriptor& t, const ModelComponent& y, Op op, const ModelComponent& x) {
  cplx s = 0.0;
  for (const Atom& a : atoms(y))
    for (const Atom& b : atoms(x)) s += pair_atoms(t, a, op, b);
  return s;
}

Vector stack(const Vector& a, const Vector& b) {
  Vector r(a.size() + b.size());
  r << a, b;
  return r;
}

void check_ks(std::span<const double> ks) {
  for (double k : ks)
    if (!std::isfinite(k)) throw DomainError("k samples must be finite reals");
}

}  // namespace

Vector ModelComponent::operator()(double k) const {
  Vector v = rational(cplx(k));
  for (const auto& f : fourier) v += fourier_on_grid(f, k);
  return v;
}

ModelComponent ModelComponent::operator+(const ModelComponent& o) const {
  if (dim_e() != o.dim_e()) throw DimensionError("model component sum: dimE differs");
  ModelComponent r = *this;
  r.rational = rational + o.rational;
  r.fourier.insert(r.fourier.end(), o.fourier.begin(), o.fourier.end());
  return r;
}

ModelComponent ModelComponent::operator*(cplx s) const {
  ModelComponent r = *this;
  r.rational = rational * s;
  for (auto& f : r.fourier) f = f * s;
  return r;
}

ModelElement ModelElement::operator+(const ModelElement& o) const {
  ModelElement r;
  r.gtilde = gtilde + o.gtilde;
  r.g = g + o.g;
  return r;
}

ModelElement ModelElement::operator*(cplx s) const {
  ModelElement r;
  r.gtilde = gtilde * s;
  r.g = g * s;
  return r;
}

ModelElement ModelElement::operator-(const ModelElement& o) const { return *this + o * cplx(-1.0); }

void validate_params(const ModelParams& p, int dim_e) {
  auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(p.z_plus) || !(p.z_plus.imag() > 0.0)) throw DomainError("model params: z_plus must lie in C+");
  if (!finite(p.z_minus) || !(p.z_minus.imag() < 0.0)) throw DomainError("model params: z_minus must lie in C-");
  if (p.w_plus.size() != dim_e || p.w_minus.size() != dim_e) throw DimensionError("model params: w has wrong size");
}

Matrix model_weight(const TripleDescriptor& t, double k) {
  const int n = t.dim_e();
  Matrix s = char_function_real(t, k);
  Matrix w(2 * n, 2 * n);
  w << identity(n), s.adjoint(), s, identity(n);
  return w;
}

double weight_min_eigenvalue(const TripleDescriptor& t, double k) {
  return min_hermitian_eigenvalue(model_weight(t, k));
}

cplx model_inner(const TripleDescriptor& t, const ModelElement& e1, const ModelElement& e2, const RealLineGrid& k) {
  if (e1.dim_e() != t.dim_e() || e2.dim_e() != t.dim_e()) throw DimensionError("model_inner: dimE mismatch");
  cplx s = 0.0;
  for (Eigen::Index j = 0; j < k.nodes.size(); ++j) {
    const double kj = k.nodes(j);
    Vector x = stack(e1.gtilde(kj), e1.g(kj));
    Vector y = stack(e2.gtilde(kj), e2.g(kj));
    s += k.weights(j) * y.dot(model_weight(t, kj) * x);
  }
  return s;
}

cplx model_inner_exact(const TripleDescriptor& t, const ModelElement& e1, const ModelElement& e2) {
  if (e1.dim_e() != t.dim_e() || e2.dim_e() != t.dim_e()) throw DimensionError("model_inner_exact: dimE mismatch");
  for (const ModelComponent* c : {&e1.gtilde, &e1.g, &e2.gtilde, &e2.g}) require_no_constant(*c, "model_inner_exact");
  return pair_components(t, e2.gtilde, Op::Identity, e1.gtilde) +
         pair_components(t, e2.gtilde, Op::SAdjoint, e1.g) + pair_components(t, e2.g, Op::S, e1.gtilde) +
         pair_components(t, e2.g, Op::Identity, e1.g);
}

Vector f_plus(const TripleDescriptor& t, const DilationElement& elem, double k) {
  Vector r = -l_trace(t, cplx(k), elem.u) / kSqrtPi;
  r += char_function_real(t, k).adjoint() * fourier_on_grid(elem.v_minus, k);
  r += fourier_on_grid(elem.v_plus, k);
  return r;
}

Vector f_minus(const TripleDescriptor& t, const DilationElement& elem, double k) {
  Vector r = -lstar_trace(t, cplx(k), elem.u) / kSqrtPi;
  r += fourier_on_grid(elem.v_minus, k);
  r += char_function_real(t, k) * fourier_on_grid(elem.v_plus, k);
  return r;
}

namespace {

Matrix g_basis(const TripleDescriptor& t, cplx zp, cplx zm) {
  const int n = t.dim_e();
  const Matrix id = identity(n);
  const Matrix ap = std::sqrt(2.0) * solve(m_function(t, zp) + kI * id, id);
  const Matrix am = std::sqrt(2.0) * solve(m_function(t, zm) - kI * id, id);
  Matrix b(t.dim_h(), 2 * n);
  for (int j = 0; j < n; ++j) {
    b.col(j) = assemble(t, gamma(t, zp, ap.col(j)));
    b.col(n + j) = assemble(t, gamma(t, zm, am.col(j)));
  }
  return b;
}

}  // namespace

DecomposedVector g_vector(const TripleDescriptor& t, const ModelParams& p) {
  validate_params(p, t.dim_e());
  const Matrix id = identity(t.dim_e());
  const double r2 = std::sqrt(2.0);
  return gamma(t, p.z_plus, r2 * solve(m_function(t, p.z_plus) + kI * id, p.w_plus)) +
         gamma(t, p.z_minus, r2 * solve(m_function(t, p.z_minus) - kI * id, p.w_minus));
}

ModelParams decompose_in_g(const TripleDescriptor& t, cplx z_plus, cplx z_minus, const Vector& v, double tol) {
  const int n = t.dim_e();
  ModelParams p{z_plus, z_minus, Vector::Zero(n), Vector::Zero(n)};
  validate_params(p, n);
  if (v.size() != t.dim_h()) throw DimensionError("decompose_in_g: wrong H dimension");
  Matrix b = g_basis(t, z_plus, z_minus);
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  if (qr.rank() < 2 * n) throw SingularMatrix("decompose_in_g: G summands are dependent", 0.0);
  Vector c = qr.solve(v);
  if ((b * c - v).norm() > tol * std::max(1.0, v.norm())) throw DomainError("decompose_in_g: vector is not in G");
  p.w_plus = c.head(n);
  p.w_minus = c.tail(n);
  return p;
}

DilationElement g_element(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                          const GridFunction& v_plus) {
  DecomposedVector v = g_vector(t, p);
  DilationElement e = make_element(v_minus.grid, v_plus.grid, t.dim_e(), assemble(t, v));
  e.v_minus = v_minus;
  e.v_plus = v_plus;
  e.u_decomposed = v;
  return e;
}

ModelElement phi_map(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                     const GridFunction& v_plus) {
  validate_params(p, t.dim_e());
  if (v_minus.grid->side() != HalfLine::Negative || v_plus.grid->side() != HalfLine::Positive)
    throw GridMismatch("phi_map: channel grids on the wrong half-lines");
  if (v_minus.dim_e() != t.dim_e() || v_plus.dim_e() != t.dim_e()) throw DimensionError("phi_map: dimE mismatch");
  const cplx c = kI / kSqrt2Pi;
  ModelElement e(t.dim_e());
  e.gtilde.fourier.push_back(v_plus);
  // i/(k - z-) [S*(k) - S*(conj z-)] w- = -2 Gamma_0 (L - k)^{-1} gamma(z-)(M(z-) - i)^{-1} w-,
  // so the w- terms enter with the sign opposite to the w+ terms.
  e.gtilde.rational.add_term(p.z_minus, -c * (char_adjoint(t, p.z_minus) * p.w_minus));
  e.gtilde.rational.add_term(p.z_plus, -c * p.w_plus);
  e.g.fourier.push_back(v_minus);
  e.g.rational.add_term(p.z_minus, c * p.w_minus);
  e.g.rational.add_term(p.z_plus, c * (char_function(t, p.z_plus).s * p.w_plus));
  return e;
}

double weight_identity_defect(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                              const GridFunction& v_plus, std::span<const double> ks) {
  check_ks(ks);
  ModelElement e = phi_map(t, p, v_minus, v_plus);
  DilationElement d = g_element(t, p, v_minus, v_plus);
  double worst = 0.0;
  for (double k : ks) {
    Vector lhs = model_weight(t, k) * stack(e.gtilde(k), e.g(k));
    Vector rhs = stack(f_plus(t, d, k), f_minus(t, d, k));
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

double intertwine_defect(const TripleDescriptor& t, const ModelParams& p, const GridFunction& v_minus,
                         const GridFunction& v_plus, cplx z, std::span<const double> ks) {
  check_ks(ks);
  ModelElement e = phi_map(t, p, v_minus, v_plus);
  DilationElement r = dilation_resolvent(t, z, g_element(t, p, v_minus, v_plus));
  double worst = 0.0;
  for (double k : ks) {
    Vector lhs = stack(f_plus(t, r, k), f_minus(t, r, k));
    Vector rhs = model_weight(t, k) * stack(e.gtilde(k), e.g(k)) / (k - z);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

ModelElement pk_project(const TripleDescriptor& t, const ModelElement& e) {
  require_no_constant(e.gtilde, "pk_project");
  require_no_constant(e.g, "pk_project");
  for (const auto& f : e.gtilde.fourier)
    if (f.grid->side() != HalfLine::Positive) throw DomainError("pk_project: gtilde data outside D+");
  for (const auto& f : e.g.fourier)
    if (f.grid->side() != HalfLine::Negative) throw DomainError("pk_project: g data outside D-");

  ModelElement r(e.dim_e());
  // gtilde - P+(gtilde + S* g): P+ keeps poles in C-, and P+[S* b/(. - q)] = S*(q) b/(. - q) there.
  for (const auto& term : e.gtilde.rational.terms())
    if (term.pole.imag() > 0.0) r.gtilde.rational.add_term(term.pole, term.residue);
  for (const auto& term : e.g.rational.terms())
    if (term.pole.imag() < 0.0) r.gtilde.rational.add_term(term.pole, -(char_adjoint(t, term.pole) * term.residue));
  // g - P-(S gtilde + g), mirrored.
  for (const auto& term : e.g.rational.terms())
    if (term.pole.imag() < 0.0) r.g.rational.add_term(term.pole, term.residue);
  for (const auto& term : e.gtilde.rational.terms())
    if (term.pole.imag() > 0.0) r.g.rational.add_term(term.pole, -(char_function(t, term.pole).s * term.residue));
  r.gtilde.rational = r.gtilde.rational.simplified();
  r.g.rational = r.g.rational.simplified();
  return r;
}

double model_resolvent_defect(const TripleDescriptor& t, const BoundaryCondition& bc, cplx lambda,
                              const Vector& h, std::span<const double> ks, ModelSide side) {
  check_ks(ks);
  if (side == ModelSide::Plus && !(lambda.imag() < 0.0))
    throw DomainError("model_resolvent_defect: plus side needs lambda in C-");
  if (side == ModelSide::Minus && !(lambda.imag() > 0.0))
    throw DomainError("model_resolvent_defect: minus side needs lambda in C+");
  const Vector u = assemble(t, krein_resolvent(t, bc, lambda, h));
  Matrix tinv;
  Vector f_lambda;
  if (side == ModelSide::Plus) {
    tinv = theta_inverse(t, bc, lambda);
    f_lambda = -l_trace(t, lambda, h) / kSqrtPi;
  } else {
    tinv = theta_hat_inverse(t, bc, lambda);
    f_lambda = -lstar_trace(t, lambda, h) / kSqrtPi;
  }
  const Vector c = tinv * f_lambda;
  double worst = 0.0, scale = 1.0;
  for (double k : ks) {
    Vector lp = -l_trace(t, cplx(k), u) / kSqrtPi;
    Vector lm = -lstar_trace(t, cplx(k), u) / kSqrtPi;
    Vector rp = (-l_trace(t, cplx(k), h) / kSqrtPi - theta_real(t, bc, k) * c) / (k - lambda);
    Vector rm = (-lstar_trace(t, cplx(k), h) / kSqrtPi - theta_hat_real(t, bc, k) * c) / (k - lambda);
    worst = std::max({worst, (lp - rp).norm(), (lm - rm).norm()});
    scale = std::max({scale, lp.norm(), lm.norm()});
  }
  return worst / scale;
}

double toeplitz_check(const TripleDescriptor& t, cplx z, const Vector& h, std::span<const double> ks) {
  check_ks(ks);
  if (!(z.imag() > 0.0)) throw DomainError("toeplitz_check: z must lie in C+");
  const Vector r = assemble(t, lstar_resolvent(t, z, h));
  const Vector fz = -lstar_trace(t, z, h) / kSqrtPi;
  double worst = 0.0, scale = 1.0;
  for (double k : ks) {
    Vector lhs = -lstar_trace(t, cplx(k), r) / kSqrtPi;
    Vector rhs = (-lstar_trace(t, cplx(k), h) / kSqrtPi - fz) / (k - z);
    worst = std::max(worst, (lhs - rhs).norm());
    scale = std::max(scale, lhs.norm());
  }
  return worst / scale;
}

double triangular_check(const TripleDescriptor& t, const BoundaryCondition& bc, cplx z, const Vector& h,
                        std::span<const double> ks) {
  check_ks(ks);
  if (z.imag() == 0.0) throw DomainError("triangular_check: z must be off the real axis");
  const bool upper = z.imag() > 0.0;
  const Vector u = assemble(t, krein_resolvent(t, bc, z, h));
  auto trace = [&](cplx k, const Vector& v) -> Vector {
    return upper ? Vector(-lstar_trace(t, k, v) / kSqrtPi) : Vector(-l_trace(t, k, v) / kSqrtPi);
  };
  const Vector fz = trace(z, h);
  const Matrix th_z = upper ? theta_hat(t, bc, z) : theta(t, bc, z);
  const Vector c = solve(th_z, fz);
  double worst = 0.0, scale = 1.0;
  for (double k : ks) {
    const Matrix th_k = upper ? theta_hat_real(t, bc, k) : theta_real(t, bc, k);
    // P f/(. - z) = (f - f(z))/(. - z); P' f/(. - z) = f(z)/(. - z); P[Theta c/(. - z)] = (Theta - Theta(z)) c/(. - z)
    Vector model = (trace(k, h) - fz) / (k - z) - (th_k - th_z) * c / (k - z);
    Vector lhs = trace(k, u);
    worst = std::max(worst, (lhs - model).norm());
    scale = std::max(scale, lhs.norm());
  }
  return worst / scale;
}

}  // namespace modelkit
