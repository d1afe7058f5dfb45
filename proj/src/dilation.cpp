#include "modelkit/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "modelkit/charmodel.hpp"
#include "modelkit/extensions.hpp"

namespace modelkit {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_channel_z(cplx z, const char* where) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z.imag() == 0.0)
    throw DomainError(std::string(where) + ": z must be finite and off the real axis");
  if (std::abs(z.imag()) < kMinChannelImag)
    throw DomainTooShallow(std::string(where) + ": |Im z| below " + std::to_string(kMinChannelImag));
}

void check_truncation(const QuadratureGrid& g, cplx z) {
  if (std::exp(-std::abs(z.imag()) * g.truncation()) >= 1e-12)
    throw DomainTooShallow("dilation_resolvent: exp(-|Im z| X) >= 1e-12; increase the truncation");
}

// e^{-i z x} e on the grid, with its value at 0.
GridFunction exp_tail(GridPtr g, cplx z, const Vector& e) {
  return sample(g, static_cast<int>(e.size()), [&](double x) -> Vector { return std::exp(-kI * z * x) * e; });
}

}  // namespace

DilationElement make_element(GridPtr minus, GridPtr plus, int dim_e, const Vector& u) {
  if (!minus || !plus || minus->side() != HalfLine::Negative || plus->side() != HalfLine::Positive)
    throw GridMismatch("make_element: need a negative and a positive half-line grid");
  DilationElement e;
  e.v_minus = GridFunction(std::move(minus), dim_e);
  e.v_plus = GridFunction(std::move(plus), dim_e);
  e.u = u;
  return e;
}

DilationElement zero_element(GridPtr minus, GridPtr plus, int dim_e, int dim_h) {
  return make_element(std::move(minus), std::move(plus), dim_e, Vector::Zero(dim_h));
}

cplx dilation_inner(const DilationElement& a, const DilationElement& b) {
  if (a.u.size() != b.u.size()) throw DimensionError("dilation_inner: H dimensions differ");
  return quad_inner(a.v_minus, b.v_minus) + inner(a.u, b.u) + quad_inner(a.v_plus, b.v_plus);
}

double dilation_norm(const DilationElement& a) { return std::sqrt(std::max(0.0, dilation_inner(a, a).real())); }

DilationElement operator+(const DilationElement& a, const DilationElement& b) {
  if (a.u.size() != b.u.size()) throw DimensionError("dilation element sum: H dimensions differ");
  DilationElement r;
  r.v_minus = a.v_minus + b.v_minus;
  r.v_plus = a.v_plus + b.v_plus;
  r.u = a.u + b.u;
  if (a.u_decomposed && b.u_decomposed) r.u_decomposed = *a.u_decomposed + *b.u_decomposed;
  r.in_domain = a.in_domain && b.in_domain;
  return r;
}

DilationElement operator*(const DilationElement& a, cplx s) {
  DilationElement r = a;
  r.v_minus = a.v_minus * s;
  r.v_plus = a.v_plus * s;
  r.u = a.u * s;
  if (a.u_decomposed) r.u_decomposed = *a.u_decomposed * s;
  return r;
}

DilationElement operator-(const DilationElement& a, const DilationElement& b) { return a + b * cplx(-1.0); }

GridFunction halfline_resolvent(HalfLineOp kind, cplx z, const GridFunction& h) {
  check_channel_z(z, "halfline_resolvent");
  const bool positive = kind == HalfLineOp::Plus || kind == HalfLineOp::PlusDirichlet;
  if ((h.grid->side() == HalfLine::Positive) != positive)
    throw DomainError("halfline_resolvent: grid is on the wrong half-line for this operator");
  // rho(d+) = C+, rho(d-) = C-, rho(d+0) = C-, rho(d-0) = C+
  const bool needs_upper = kind == HalfLineOp::Plus || kind == HalfLineOp::MinusDirichlet;
  if ((z.imag() > 0.0) != needs_upper) throw DomainError("halfline_resolvent: z is in the spectrum of the operator");

  const cplx rate = -kI * z;
  if (needs_upper) return volterra_exponential(h, rate, Sweep::Backward) * kI;
  return volterra_exponential(h, rate, Sweep::Forward) * (-kI);
}

DilationElement dilation_resolvent(const TripleDescriptor& t, cplx z, const DilationElement& elem) {
  check_channel_z(z, "dilation_resolvent");
  check_truncation(*elem.v_minus.grid, z);
  check_truncation(*elem.v_plus.grid, z);
  if (elem.u.size() != t.dim_h() || elem.v_minus.dim_e() != t.dim_e() || elem.v_plus.dim_e() != t.dim_e())
    throw DimensionError("dilation_resolvent: element does not match the triple");

  const Matrix m = m_function(t, z);
  const Matrix id = identity(t.dim_e());
  DilationElement out;
  if (z.imag() < 0.0) {
    out.v_minus = halfline_resolvent(HalfLineOp::Minus, z, elem.v_minus);
    const Vector c = out.v_minus.boundary_value_at_0;
    DecomposedVector lr = l_resolvent(t, z, elem.u);
    DecomposedVector f = lr + gamma(t, z, kSqrt2 * solve(m - kI * id, c));
    Vector e = kI * kSqrt2 * trace0(lr) + char_adjoint(t, z) * c;
    out.v_plus = halfline_resolvent(HalfLineOp::PlusDirichlet, z, elem.v_plus) + exp_tail(elem.v_plus.grid, z, e);
    out.u = assemble(t, f);
    out.u_decomposed = f;
  } else {
    out.v_plus = halfline_resolvent(HalfLineOp::Plus, z, elem.v_plus);
    const Vector c = out.v_plus.boundary_value_at_0;
    DecomposedVector lr = lstar_resolvent(t, z, elem.u);
    DecomposedVector f = lr + gamma(t, z, kSqrt2 * solve(m + kI * id, c));
    Vector e = -kI * kSqrt2 * trace0(lr) + char_function(t, z).s * c;
    out.v_minus =
        halfline_resolvent(HalfLineOp::MinusDirichlet, z, elem.v_minus) + exp_tail(elem.v_minus.grid, z, e);
    out.u = assemble(t, f);
    out.u_decomposed = f;
  }
  out.in_domain = true;
  return out;
}

double boundary_matching_defect(const TripleDescriptor& t, const DilationElement& elem) {
  if (!elem.u_decomposed) throw DomainError("boundary_matching_defect: element carries no boundary data");
  const Vector g0 = trace0(*elem.u_decomposed);
  const Vector g1 = trace1(t, *elem.u_decomposed);
  double dm = (g1 - kI * g0 - kSqrt2 * elem.v_minus.boundary_value_at_0).norm();
  double dp = (g1 + kI * g0 - kSqrt2 * elem.v_plus.boundary_value_at_0).norm();
  return std::max(dm, dp);
}

double dilation_property_defect(const TripleDescriptor& t, cplx z, const Vector& h) {
  if (!(z.imag() < 0.0)) throw DomainError("dilation_property_defect: requires Im z < 0");
  if (h.size() != t.dim_h()) throw DimensionError("dilation_property_defect: wrong H dimension");
  // The H channel carries no quadrature; a short grid long enough for the tail check suffices.
  const double x = std::max(40.0, 30.0 / std::abs(z.imag()));
  auto gm = make_grid(HalfLine::Negative, x, 8);
  auto gp = make_grid(HalfLine::Positive, x, 8);
  DilationElement out = dilation_resolvent(t, z, make_element(gm, gp, t.dim_e(), h));
  return (out.u - assemble(t, l_resolvent(t, z, h))).norm();
}

double symmetry_defect(const TripleDescriptor& t, cplx z, const DilationElement& e1, const DilationElement& e2) {
  cplx lhs = dilation_inner(dilation_resolvent(t, z, e1), e2);
  cplx rhs = dilation_inner(e1, dilation_resolvent(t, std::conj(z), e2));
  return std::abs(lhs - rhs);
}

double resolvent_identity_defect(const TripleDescriptor& t, cplx z, cplx w, const DilationElement& e) {
  DilationElement rz = dilation_resolvent(t, z, e);
  DilationElement rw = dilation_resolvent(t, w, e);
  DilationElement rzw = dilation_resolvent(t, z, rw);
  return dilation_norm(rz - rw - rzw * (z - w));
}

double channel_residual(const GridFunction& f, const GridFunction& h, cplx z, double step, double span) {
  if (!f.grid->same_as(*h.grid)) throw GridMismatch("channel_residual: grids differ");
  const QuadratureGrid& g = *f.grid;
  const double width = std::min(span, g.truncation());
  const double a = g.side() == HalfLine::Positive ? 0.0 : -width;
  const int n = static_cast<int>(std::floor(width / step));
  double worst = 0.0;
  for (int j = 2; j <= n - 2; ++j) {
    double x = a + j * step;
    Vector d = (-f.at(x + 2 * step) + 8.0 * f.at(x + step) - 8.0 * f.at(x - step) + f.at(x - 2 * step)) /
               (12.0 * step);
    worst = std::max(worst, (kI * d - z * f.at(x) - h.at(x)).norm());
  }
  return worst;
}

double h_channel_residual(const TripleDescriptor& t, cplx z, const DilationElement& out, const Vector& h) {
  if (!out.u_decomposed) throw DomainError("h_channel_residual: element carries no decomposition");
  const DecomposedVector& d = *out.u_decomposed;
  return (a_apply(t, d) - z * assemble(t, d) - h).norm() / std::max(1.0, h.norm());
}

DilationElement sample_element(const ChannelData& d, GridPtr minus, GridPtr plus, int dim_e) {
  DilationElement e = make_element(minus, plus, dim_e, d.u);
  if (d.minus) e.v_minus = sample(minus, dim_e, d.minus);
  if (d.plus) e.v_plus = sample(plus, dim_e, d.plus);
  return e;
}

RefinementStudy symmetry_refinement(const TripleDescriptor& t, cplx z, const ChannelData& d1,
                                    const ChannelData& d2, const std::vector<int>& nodes, double truncation,
                                    double noise_floor) {
  RefinementStudy r;
  r.nodes = nodes;
  for (int n : nodes) {
    auto gm = make_grid(HalfLine::Negative, truncation, n);
    auto gp = make_grid(HalfLine::Positive, truncation, n);
    r.defects.push_back(symmetry_defect(t, z, sample_element(d1, gm, gp, t.dim_e()),
                                        sample_element(d2, gm, gp, t.dim_e())));
  }
  r.saturated = !r.defects.empty() && r.defects.front() <= noise_floor;
  double resolved = std::numeric_limits<double>::infinity(), bound = 0.0;
  for (std::size_t i = 0; i + 1 < r.defects.size(); ++i) {
    if (r.defects[i] <= noise_floor) break;
    double fine = std::max(r.defects[i + 1], noise_floor);
    double p = std::log(r.defects[i] / fine) / std::log(double(nodes[i + 1]) / nodes[i]);
    r.orders.push_back(p);
    // A pair whose fine level sits on the floor only bounds the rate from below.
    if (r.defects[i + 1] <= noise_floor) {
      bound = p;
      break;
    }
    resolved = std::min(resolved, p);
  }
  r.observed_order = std::isfinite(resolved) ? resolved : bound;
  return r;
}

int independence_rank(const TripleDescriptor& t, cplx z_plus, cplx z_minus) {
  if (!(z_plus.imag() > 0.0) || !(z_minus.imag() < 0.0))
    throw DomainError("independence_rank: need z+ in C+ and z- in C-");
  const int de = t.dim_e();
  const Matrix id = identity(de);
  const Matrix p = solve(m_function(t, z_plus) + kI * id, id);
  const Matrix q = solve(m_function(t, z_minus) - kI * id, id);
  Matrix sys(2 * de, 2 * de);
  for (int j = 0; j < de; ++j) {
    DecomposedVector a = gamma(t, z_plus, p.col(j));
    DecomposedVector b = gamma(t, z_minus, q.col(j));
    sys.block(0, j, de, 1) = trace0(a);
    sys.block(de, j, de, 1) = trace1(t, a);
    sys.block(0, de + j, de, 1) = trace0(b);
    sys.block(de, de + j, de, 1) = trace1(t, b);
  }
  return numerical_rank(sys);
}

}  // namespace modelkit
