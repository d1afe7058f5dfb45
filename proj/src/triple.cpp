#include "modelkit/triple.hpp"

#include <sstream>

namespace modelkit {

namespace {

SpectralData decompose(const Matrix& a0) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a0 + a0.adjoint()));
  return {es.eigenvectors(), es.eigenvalues()};
}

Matrix spectral_inverse(const SpectralData& s) {
  return s.vectors * s.values.cwiseInverse().cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

[[noreturn]] void throw_singular(cplx z, double ratio) {
  std::ostringstream os;
  os << "z = " << z << " is at the spectrum of A0 (ratio " << ratio << ")";
  throw SingularFrequency(os.str(), z, ratio);
}

}  // namespace

TripleDescriptor::TripleDescriptor(Matrix a0, Matrix pi, Matrix lambda, std::string label)
    : a0_(std::move(a0)), pi_(std::move(pi)), lambda_(std::move(lambda)), label_(std::move(label)) {
  check_shapes();
  if (hermitize_check(a0_).pass) {
    spectral_ = decompose(a0_);
    if (spectral_->values.cwiseAbs().minCoeff() > 0.0) {
      a0_inv_ = spectral_inverse(*spectral_);
    } else {
      spectral_.reset();
    }
  }
  if (!spectral_) {
    Eigen::FullPivLU<Matrix> lu(a0_);
    a0_inv_ = lu.isInvertible() ? Matrix(lu.inverse())
                                : Matrix::Constant(a0_.rows(), a0_.cols(), cplx(NAN, NAN));
  }
  if (spectral_) coupling_ = spectral_->vectors.adjoint() * pi_;
}

TripleDescriptor::TripleDescriptor(Matrix a0, Matrix pi, Matrix lambda, std::string label,
                                   SpectralData spectral)
    : a0_(std::move(a0)), pi_(std::move(pi)), lambda_(std::move(lambda)), label_(std::move(label)),
      spectral_(std::move(spectral)) {
  check_shapes();
  if (spectral_->vectors.rows() != a0_.rows() || spectral_->values.size() != a0_.rows())
    throw DimensionError("TripleDescriptor: spectral data has wrong size");
  a0_inv_ = spectral_inverse(*spectral_);
  coupling_ = spectral_->vectors.adjoint() * pi_;
}

void TripleDescriptor::check_shapes() const {
  if (a0_.rows() == 0 || a0_.rows() != a0_.cols()) throw DimensionError("TripleDescriptor: A0 must be square");
  if (pi_.rows() != a0_.rows() || pi_.cols() == 0) throw DimensionError("TripleDescriptor: Pi has wrong shape");
  if (lambda_.rows() != pi_.cols() || lambda_.cols() != pi_.cols())
    throw DimensionError("TripleDescriptor: Lambda has wrong shape");
}

RealVector TripleDescriptor::a0_eigenvalues() const {
  if (spectral_) return spectral_->values;
  return decompose(a0_).values;
}

Eigen::VectorXcd TripleDescriptor::shift_factors(cplx z) const {
  const RealVector& d = spectral_->values;
  Eigen::VectorXcd g(d.size());
  double lo = INFINITY, hi = 0.0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    cplx f = 1.0 - z / d(k);
    lo = std::min(lo, std::abs(f));
    hi = std::max(hi, std::abs(f));
    g(k) = 1.0 / f;
  }
  if (!(lo >= 1e-12 * hi)) throw_singular(z, hi > 0 ? lo / hi : 0.0);
  return g;
}

Matrix TripleDescriptor::shifted_solve(cplx z, const Matrix& rhs) const {
  if (rhs.rows() != dim_h()) throw DimensionError("shifted_solve: wrong size");
  if (!spectral_) return shifted_solve_lu(z, rhs);
  Eigen::VectorXcd g = shift_factors(z);
  const Matrix& v = spectral_->vectors;
  return v * (g.asDiagonal() * (v.adjoint() * rhs));
}

Matrix TripleDescriptor::shifted_solve_lu(cplx z, const Matrix& rhs) const {
  Matrix a = identity(dim_h()) - z * a0_inv_;
  try {
    return solve(a, rhs);
  } catch (const SingularMatrix& e) {
    throw_singular(z, e.ratio());
  }
}

Matrix TripleDescriptor::pi_resolvent_pi(cplx z) const {
  if (!spectral_) return pi_.adjoint() * shifted_solve_lu(z, pi_);
  Eigen::VectorXcd g = shift_factors(z);
  return coupling_.adjoint() * g.asDiagonal() * coupling_;
}

Matrix TripleDescriptor::pi_resolvent(cplx z, const Matrix& h) const {
  if (!spectral_) return pi_.adjoint() * shifted_solve_lu(z, h);
  Eigen::VectorXcd g = shift_factors(z);
  return coupling_.adjoint() * (g.asDiagonal() * (spectral_->vectors.adjoint() * h));
}

bool ValidationReport::ok() const {
  for (const auto& i : items)
    if (!i.pass) return false;
  return true;
}

const CheckItem* ValidationReport::find(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return &i;
  return nullptr;
}

ValidationReport validate_triple(const TripleDescriptor& t) {
  ValidationReport r;
  auto a0h = hermitize_check(t.a0());
  r.items.push_back({"a0_hermitian", a0h.defect, 1e-12 * std::max(1.0, max_abs(t.a0())), a0h.pass});

  double inv_def = INFINITY;
  if (all_finite(t.a0_inv())) {
    Matrix prod = t.a0() * t.a0_inv() - identity(t.dim_h());
    inv_def = max_abs(prod);
  }
  r.items.push_back({"a0_inverse", inv_def, 1e-10, inv_def <= 1e-10});

  RealVector s = singular_values(t.pi());
  double ratio = s(0) > 0 ? s(s.size() - 1) / s(0) : 0.0;
  r.items.push_back({"pi_kernel", ratio, 1e-10, ratio > 1e-10});

  auto lh = hermitize_check(t.lambda());
  r.items.push_back({"lambda_hermitian", lh.defect, 1e-12 * std::max(1.0, max_abs(t.lambda())), lh.pass});

  bool finite = all_finite(t.a0()) && all_finite(t.pi()) && all_finite(t.lambda());
  r.items.push_back({"finite_entries", finite ? 0.0 : INFINITY, 0.0, finite});
  return r;
}

Vector assemble(const TripleDescriptor& t, const DecomposedVector& d) {
  return t.a0_inv() * d.f + t.pi() * d.phi;
}

DecomposedVector gamma(const TripleDescriptor& t, cplx z, const Vector& phi) {
  if (phi.size() != t.dim_e()) throw DimensionError("gamma: phi has wrong length");
  Vector f = z * t.shifted_solve(z, t.pi() * phi);
  return {f, phi};
}

Matrix gamma_matrix(const TripleDescriptor& t, cplx z) { return t.shifted_solve(z, t.pi()); }

Vector gamma_adjoint_apply(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (h.size() != t.dim_h()) throw DimensionError("gamma_adjoint_apply: h has wrong length");
  return t.pi_resolvent(z, h);
}

Vector a_apply(const TripleDescriptor&, const DecomposedVector& d) { return d.f; }

Matrix m_function(const TripleDescriptor& t, cplx z) {
  return t.lambda() + z * t.pi_resolvent_pi(z);
}

Vector trace0(const DecomposedVector& d) { return d.phi; }

Vector trace1(const TripleDescriptor& t, const DecomposedVector& d) {
  return t.pi().adjoint() * d.f + t.lambda() * d.phi;
}

namespace {

struct GreenTerms {
  cplx au_v, u_av, g1u_g0v, g0u_g1v;
};

GreenTerms green_terms(const TripleDescriptor& t, const DecomposedVector& du, const DecomposedVector& dv) {
  Vector u = assemble(t, du), v = assemble(t, dv);
  return {inner(a_apply(t, du), v), inner(u, a_apply(t, dv)), inner(trace1(t, du), trace0(dv)),
          inner(trace0(du), trace1(t, dv))};
}

}  // namespace

double green_defect(const TripleDescriptor& t, const DecomposedVector& du, const DecomposedVector& dv) {
  GreenTerms g = green_terms(t, du, dv);
  return std::abs(g.au_v - g.u_av - g.g1u_g0v + g.g0u_g1v);
}

double green_scale(const TripleDescriptor& t, const DecomposedVector& du, const DecomposedVector& dv) {
  GreenTerms g = green_terms(t, du, dv);
  return std::abs(g.au_v) + std::abs(g.u_av) + std::abs(g.g1u_g0v) + std::abs(g.g0u_g1v);
}

HerglotzReport herglotz_defect(const TripleDescriptor& t, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("herglotz_defect: requires Im z > 0");
  Matrix m = m_function(t, z);
  Matrix im_m = (m - m.adjoint()) / (2.0 * kI);
  Matrix g = gamma_matrix(t, z);
  HerglotzReport r;
  r.defect = (im_m - z.imag() * g.adjoint() * g).norm();
  r.min_eigenvalue = min_hermitian_eigenvalue(im_m);
  return r;
}

int simplicity_probe(const TripleDescriptor& t, std::span<const cplx> zs) {
  if (zs.empty()) return 0;
  Matrix stacked(t.dim_h(), t.dim_e() * static_cast<Eigen::Index>(zs.size()));
  for (size_t j = 0; j < zs.size(); ++j) stacked.middleCols(j * t.dim_e(), t.dim_e()) = gamma_matrix(t, zs[j]);
  return numerical_rank(stacked, 1e-10);
}

}  // namespace modelkit
