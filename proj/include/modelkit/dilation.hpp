#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "modelkit/quadrature.hpp"
#include "modelkit/triple.hpp"

namespace modelkit {

// Element of L2(R-, E) + H + L2(R+, E).
struct DilationElement {
  GridFunction v_minus;
  Vector u;
  std::optional<DecomposedVector> u_decomposed;
  GridFunction v_plus;
  bool in_domain = false;
};

DilationElement make_element(GridPtr minus, GridPtr plus, int dim_e, const Vector& u);
DilationElement zero_element(GridPtr minus, GridPtr plus, int dim_e, int dim_h);

cplx dilation_inner(const DilationElement& a, const DilationElement& b);
double dilation_norm(const DilationElement& a);
DilationElement operator+(const DilationElement& a, const DilationElement& b);
DilationElement operator-(const DilationElement& a, const DilationElement& b);
DilationElement operator*(const DilationElement& a, cplx s);

enum class HalfLineOp { Plus, Minus, PlusDirichlet, MinusDirichlet };

// Channel operations reject |Im z| below this.
inline constexpr double kMinChannelImag = 0.05;

GridFunction halfline_resolvent(HalfLineOp kind, cplx z, const GridFunction& h);

DilationElement dilation_resolvent(const TripleDescriptor& t, cplx z, const DilationElement& elem);

// max of |Gamma_1 u -+ i Gamma_0 u - sqrt2 v_-+(0)| over both conditions.
double boundary_matching_defect(const TripleDescriptor& t, const DilationElement& elem);

double dilation_property_defect(const TripleDescriptor& t, cplx z, const Vector& h);

double symmetry_defect(const TripleDescriptor& t, cplx z, const DilationElement& e1, const DilationElement& e2);

// |R(z)e - R(w)e - (z - w) R(z) R(w) e|
double resolvent_identity_defect(const TripleDescriptor& t, cplx z, cplx w, const DilationElement& e);

// max |i f' - z f - h| on a uniform interior subgrid, 4th-order central differences.
double channel_residual(const GridFunction& f, const GridFunction& h, cplx z, double step = 0.01,
                        double span = 10.0);

// max |A u - z u - h| for the H channel of a resolvent output.
double h_channel_residual(const TripleDescriptor& t, cplx z, const DilationElement& out, const Vector& h);

// Continuous channel data, sampled on demand.
struct ChannelData {
  std::function<Vector(double)> minus, plus;
  Vector u;
};

DilationElement sample_element(const ChannelData& d, GridPtr minus, GridPtr plus, int dim_e);

struct RefinementStudy {
  std::vector<int> nodes;
  std::vector<double> defects;
  std::vector<double> orders;   // rates between consecutive levels
  double observed_order = 0.0;  // min over pairs resolved above the noise floor, else the floor-limited bound
  bool saturated = false;       // coarsest level already at the noise floor
};

RefinementStudy symmetry_refinement(const TripleDescriptor& t, cplx z, const ChannelData& d1,
                                    const ChannelData& d2, const std::vector<int>& nodes,
                                    double truncation = 40.0, double noise_floor = 1e-13);

// Rank of the 2dimE x 2dimE system obtained by applying Gamma_0 and Gamma_1 to
// gamma(z+)(M(z+)+i)^{-1}e1 + gamma(z-)(M(z-)-i)^{-1}e2.
int independence_rank(const TripleDescriptor& t, cplx z_plus, cplx z_minus);

}  // namespace modelkit
