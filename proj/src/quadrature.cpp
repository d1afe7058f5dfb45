#include "modelkit/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>

namespace modelkit {

namespace {

void gauss_legendre(int order, RealVector& x, RealVector& w) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(order);
  if (!t) throw Error("gauss_legendre: allocation failed");
  x.resize(order);
  w.resize(order);
  for (int i = 0; i < order; ++i) {
    double xi = 0.0, wi = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, i, &xi, &wi, t);
    x(i) = xi;
    w(i) = wi;
  }
  gsl_integration_glfixed_table_free(t);
}

RealVector lagrange(const RealVector& xs, const RealVector& bary, double x) {
  const Eigen::Index n = xs.size();
  RealVector l(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x == xs(i)) {
      l.setZero();
      l(i) = 1.0;
      return l;
    }
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    l(i) = bary(i) / (x - xs(i));
    sum += l(i);
  }
  return l / sum;
}

}  // namespace

QuadratureGrid::QuadratureGrid(HalfLine side, double truncation, int node_count, int order)
    : side_(side), truncation_(truncation), order_(order) {
  if (!(truncation > 0.0)) throw DomainError("QuadratureGrid: truncation must be positive");
  if (order < 2 || node_count < order || node_count % order != 0)
    throw DomainError("QuadratureGrid: node count must be a positive multiple of the order");
  panels_ = node_count / order;
  gauss_legendre(order, ref_nodes_, ref_weights_);
  bary_.resize(order);
  for (int i = 0; i < order; ++i) {
    double p = 1.0;
    for (int j = 0; j < order; ++j)
      if (j != i) p *= ref_nodes_(i) - ref_nodes_(j);
    bary_(i) = 1.0 / p;
  }
  nodes_.resize(node_count);
  weights_.resize(node_count);
  const double width = panel_width();
  const double a0 = lower();
  for (int m = 0; m < panels_; ++m) {
    double a = a0 + m * width;
    for (int i = 0; i < order; ++i) {
      nodes_(m * order + i) = a + 0.5 * width * (ref_nodes_(i) + 1.0);
      weights_(m * order + i) = 0.5 * width * ref_weights_(i);
    }
  }
}

bool QuadratureGrid::same_as(const QuadratureGrid& o) const {
  return side_ == o.side_ && truncation_ == o.truncation_ && order_ == o.order_ &&
         panels_ == o.panels_;
}

int QuadratureGrid::panel_of(double x) const {
  int m = static_cast<int>(std::floor((x - lower()) / panel_width()));
  return std::clamp(m, 0, panels_ - 1);
}

RealVector QuadratureGrid::lagrange_at(int panel, double x) const {
  double a = lower() + panel * panel_width();
  double xi = 2.0 * (x - a) / panel_width() - 1.0;
  return lagrange(ref_nodes_, bary_, xi);
}

GridPtr make_grid(HalfLine side, double truncation, int node_count, int order) {
  return std::make_shared<const QuadratureGrid>(side, truncation, node_count, order);
}

GridFunction::GridFunction(GridPtr g, int dim_e)
    : grid(std::move(g)),
      values(Matrix::Zero(dim_e, grid->size())),
      boundary_value_at_0(Vector::Zero(dim_e)) {}

Vector GridFunction::at(double x) const {
  int m = grid->panel_of(x);
  RealVector l = grid->lagrange_at(m, x);
  const int p = grid->order();
  return values.middleCols(m * p, p) * l.cast<cplx>();
}

static void check_same(const GridFunction& a, const GridFunction& b) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid))
    throw GridMismatch("grid functions live on different grids");
  if (a.dim_e() != b.dim_e()) throw DimensionError("grid functions have different dimE");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  check_same(*this, o);
  values += o.values;
  boundary_value_at_0 += o.boundary_value_at_0;
  return *this;
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
  GridFunction r = *this;
  r += o;
  return r;
}

GridFunction GridFunction::operator*(cplx s) const {
  GridFunction r = *this;
  r.values *= s;
  r.boundary_value_at_0 *= s;
  return r;
}

cplx quad_inner(const GridFunction& g1, const GridFunction& g2) {
  check_same(g1, g2);
  const RealVector& w = g1.grid->weights();
  cplx s = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) s += w(j) * g2.values.col(j).dot(g1.values.col(j));
  return s;
}

double quad_norm(const GridFunction& g) { return std::sqrt(std::max(0.0, quad_inner(g, g).real())); }

Vector fourier_on_grid(const GridFunction& v, double k) {
  const RealVector& x = v.grid->nodes();
  const RealVector& w = v.grid->weights();
  Eigen::VectorXcd phase(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    phase(j) = w(j) * std::exp(kI * (k * x(j)));
  return v.values * phase / std::sqrt(2.0 * std::numbers::pi);
}

GridFunction volterra_exponential(const GridFunction& h, cplx rate, Sweep sweep) {
  const QuadratureGrid& g = *h.grid;
  const int p = g.order();
  const double width = g.panel_width();
  const RealVector& xi = g.ref_nodes();
  const RealVector& om = g.ref_weights();

  // Partial-panel operator K (p x p): row j integrates the interpolant of the
  // panel data over the part of the panel between node j and the near end.
  Matrix kpart = Matrix::Zero(p, p);
  Vector full(p);
  for (int j = 0; j < p; ++j) {
    double lo = sweep == Sweep::Forward ? -1.0 : xi(j);
    double hi = sweep == Sweep::Forward ? xi(j) : 1.0;
    for (int q = 0; q < p; ++q) {
      double s = lo + 0.5 * (hi - lo) * (xi(q) + 1.0);
      double wq = 0.5 * (hi - lo) * om(q) * 0.5 * width;
      RealVector l = g.lagrange_at(0, g.lower() + 0.5 * width * (s + 1.0));
      cplx ker = std::exp(rate * (0.5 * width * (xi(j) - s)));
      kpart.row(j) += (wq * ker) * l.cast<cplx>().transpose();
    }
    // Whole-panel rule towards the far end used for propagation.
    double dist = sweep == Sweep::Forward ? 1.0 - xi(j) : -1.0 - xi(j);
    full(j) = 0.5 * width * om(j) * std::exp(rate * (0.5 * width * dist));
  }
  const cplx hop = std::exp(rate * (sweep == Sweep::Forward ? width : -width));

  GridFunction out(h.grid, h.dim_e());
  Vector carry = Vector::Zero(h.dim_e());
  const int np = g.panels();
  for (int step = 0; step < np; ++step) {
    int m = sweep == Sweep::Forward ? step : np - 1 - step;
    auto block = h.values.middleCols(m * p, p);
    for (int j = 0; j < p; ++j) {
      double dist = sweep == Sweep::Forward ? xi(j) + 1.0 : xi(j) - 1.0;
      cplx prop = std::exp(rate * (0.5 * width * dist));
      out.values.col(m * p + j) = prop * carry + block * kpart.row(j).transpose();
    }
    carry = hop * carry + block * full;
  }
  bool zero_end_is_far = (g.side() == HalfLine::Negative) == (sweep == Sweep::Forward);
  out.boundary_value_at_0 = zero_end_is_far ? carry : Vector::Zero(h.dim_e());
  return out;
}

RealLineGrid RealLineGrid::tan_mapped(int panels, int order, double scale) {
  RealVector x, w;
  gauss_legendre(order, x, w);
  RealLineGrid r;
  r.nodes.resize(panels * order);
  r.weights.resize(panels * order);
  const double pi = std::numbers::pi;
  const double width = pi / panels;
  for (int m = 0; m < panels; ++m) {
    double a = -0.5 * pi + m * width;
    for (int i = 0; i < order; ++i) {
      double th = a + 0.5 * width * (x(i) + 1.0);
      double c = std::cos(th);
      r.nodes(m * order + i) = scale * std::tan(th);
      r.weights(m * order + i) = scale * 0.5 * width * w(i) / (c * c);
    }
  }
  return r;
}

RealLineGrid RealLineGrid::interval(double a, double b, int panels, int order) {
  RealVector x, w;
  gauss_legendre(order, x, w);
  RealLineGrid r;
  r.nodes.resize(panels * order);
  r.weights.resize(panels * order);
  const double width = (b - a) / panels;
  for (int m = 0; m < panels; ++m) {
    double lo = a + m * width;
    for (int i = 0; i < order; ++i) {
      r.nodes(m * order + i) = lo + 0.5 * width * (x(i) + 1.0);
      r.weights(m * order + i) = 0.5 * width * w(i);
    }
  }
  return r;
}

}  // namespace modelkit
