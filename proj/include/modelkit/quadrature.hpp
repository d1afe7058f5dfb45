#pragma once

#include <memory>
#include <vector>

#include "modelkit/linalg.hpp"

namespace modelkit {

enum class HalfLine { Positive, Negative };

// Composite Gauss-Legendre rule on [0, X] or [-X, 0], equal panels.
class QuadratureGrid {
 public:
  QuadratureGrid(HalfLine side, double truncation, int node_count, int order = 8);

  HalfLine side() const { return side_; }
  double truncation() const { return truncation_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int order() const { return order_; }
  int panels() const { return panels_; }
  double lower() const { return side_ == HalfLine::Positive ? 0.0 : -truncation_; }
  double upper() const { return side_ == HalfLine::Positive ? truncation_ : 0.0; }
  double panel_width() const { return truncation_ / panels_; }

  const RealVector& nodes() const { return nodes_; }
  const RealVector& weights() const { return weights_; }

  // Reference rule on [-1, 1].
  const RealVector& ref_nodes() const { return ref_nodes_; }
  const RealVector& ref_weights() const { return ref_weights_; }

  bool same_as(const QuadratureGrid& other) const;

  // Lagrange weights for interpolating panel data at x (panel chosen by x).
  int panel_of(double x) const;
  RealVector lagrange_at(int panel, double x) const;

 private:
  HalfLine side_;
  double truncation_;
  int order_;
  int panels_;
  RealVector ref_nodes_, ref_weights_, bary_;
  RealVector nodes_, weights_;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

GridPtr make_grid(HalfLine side, double truncation, int node_count, int order = 8);

// E-valued samples on a half-line grid; column j holds the value at node j.
struct GridFunction {
  GridPtr grid;
  Matrix values;             // dimE x nodes
  Vector boundary_value_at_0;

  GridFunction() = default;
  GridFunction(GridPtr g, int dim_e);

  int dim_e() const { return static_cast<int>(values.rows()); }
  Vector at(double x) const;  // panel interpolation

  GridFunction& operator+=(const GridFunction& o);
  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator*(cplx s) const;
};

template <class F>
GridFunction sample(GridPtr grid, int dim_e, F&& f) {
  GridFunction g(grid, dim_e);
  for (int j = 0; j < grid->size(); ++j) g.values.col(j) = f(grid->nodes()(j));
  g.boundary_value_at_0 = f(0.0);
  return g;
}

cplx quad_inner(const GridFunction& g1, const GridFunction& g2);
double quad_norm(const GridFunction& g);

// (2 pi)^{-1/2} sum_j w_j e^{i k x_j} v(x_j)
Vector fourier_on_grid(const GridFunction& v, double k);

// Volterra integrals with exponential kernel e^{r (x - t)}.
// Forward:  F(x) = int_{lower}^{x} e^{r(x-t)} h(t) dt
// Backward: F(x) = int_{x}^{upper} e^{r(x-t)} h(t) dt
// Returns node values; the value at 0 goes to boundary_value_at_0.
enum class Sweep { Forward, Backward };
GridFunction volterra_exponential(const GridFunction& h, cplx rate, Sweep sweep);

// Tan-mapped composite Gauss-Legendre rule on the real line: k = c tan(theta).
struct RealLineGrid {
  RealVector nodes, weights;
  static RealLineGrid tan_mapped(int panels, int order = 16, double scale = 1.0);
  static RealLineGrid interval(double a, double b, int panels, int order = 16);
};

}  // namespace modelkit
