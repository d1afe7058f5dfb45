#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "modelkit/hardy.hpp"
#include "modelkit/linalg.hpp"
#include "modelkit/quadrature.hpp"

using namespace modelkit;

namespace {

Vector e_vec(int n, int i) {
  Vector v = Vector::Zero(n);
  v(i) = 1.0;
  return v;
}

GridFunction exp_decay(GridPtr g, int dim, int dir, double rate) {
  return sample(g, dim, [&](double x) { return Vector(e_vec(dim, dir) * std::exp(-rate * std::abs(x))); });
}

}  // namespace

TEST_CASE("hermitize_check on small matrices") {
  auto id = hermitize_check(identity(4));
  CHECK(id.defect == 0.0);
  CHECK(id.pass);

  Matrix p(2, 2);
  p << 0.0, kI, -kI, 0.0;
  auto hp = hermitize_check(p);
  CHECK(hp.defect == 0.0);
  CHECK(hp.pass);

  Matrix q(2, 2);
  q << 0.0, kI, kI, 0.0;
  auto hq = hermitize_check(q);
  CHECK(hq.defect == doctest::Approx(2.0));
  CHECK_FALSE(hq.pass);

  CHECK_THROWS_AS(hermitize_check(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("solve rejects singular matrices and refines regular ones") {
  Matrix a(2, 2);
  a << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(solve(a, Vector::Ones(2)), SingularMatrix);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Matrix m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = cplx(n01(rng), n01(rng));
  Vector b = Vector::Ones(6);
  Vector x = solve(m, b);
  CHECK((m * x - b).norm() < 1e-13);
}

TEST_CASE("riesz projections select poles by half-plane") {
  Vector c(2);
  c << 1.0, cplx(0.0, 2.0);

  StructuredHardyFunction f(2);
  f.add_term({1.0, -1.0}, c);
  CHECK(riesz_project(f, HardyHalf::Plus).terms().size() == 1);
  CHECK(riesz_project(f, HardyHalf::Minus).terms().empty());

  StructuredHardyFunction g(2);
  g.add_term({2.0, 3.0}, c);
  CHECK(riesz_project(g, HardyHalf::Plus).terms().empty());
  CHECK(riesz_project(g, HardyHalf::Minus).terms().size() == 1);

  StructuredHardyFunction h(2);
  h.add_term({1.0, -1.0}, c);
  h.add_term({1.0, 1.0}, 3.0 * c);
  auto pp = riesz_project(h, HardyHalf::Plus);
  auto pm = riesz_project(h, HardyHalf::Minus);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10; ++i) {
    double k = u(rng);
    CHECK((pp(k) + pm(k) - h(k)).norm() == 0.0);
  }

  // P+ P+ = P+ and P+ P- = 0
  auto ppp = riesz_project(pp, HardyHalf::Plus);
  CHECK(ppp.terms().size() == pp.terms().size());
  CHECK(riesz_project(pm, HardyHalf::Plus).terms().empty());

  CHECK_THROWS_AS(f.add_term(3.0, c), DomainError);

  StructuredHardyFunction withc = h;
  withc.set_constant(c);
  CHECK_THROWS_AS(riesz_project(withc, HardyHalf::Plus), DomainError);
  CHECK(riesz_project(withc, HardyHalf::Plus, true).terms().size() == 1);
}

TEST_CASE("quadrature grid invariants") {
  auto g = make_grid(HalfLine::Positive, 40.0, 400);
  CHECK(g->weights().sum() == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(g->nodes()(0) > 0.0);
  CHECK(g->nodes()(399) < 40.0);
  for (int j = 1; j < 400; ++j) CHECK(g->nodes()(j) > g->nodes()(j - 1));

  auto n = make_grid(HalfLine::Negative, 40.0, 400);
  CHECK(n->nodes()(0) > -40.0);
  CHECK(n->nodes()(399) < 0.0);
  CHECK_THROWS_AS(make_grid(HalfLine::Positive, 40.0, 401), DomainError);
}

TEST_CASE("quad_inner examples") {
  auto g = make_grid(HalfLine::Positive, 40.0, 400);
  auto f = exp_decay(g, 2, 0, 1.0);
  CHECK(std::abs(quad_inner(f, f) - 0.5) < 1e-10);

  GridFunction zero(g, 2);
  CHECK(quad_inner(zero, zero) == cplx(0.0));
  CHECK(quad_norm(zero) == 0.0);

  auto e1 = sample(g, 2, [](double) { return Vector(e_vec(2, 0)); });
  auto e2 = sample(g, 2, [](double) { return Vector(e_vec(2, 1)); });
  CHECK(std::abs(quad_inner(e1, e2)) == 0.0);

  auto u = sample(g, 2, [](double x) {
    Vector v(2);
    v << std::exp(cplx(-x, 0.3 * x)), cplx(0.0, 1.0) * std::exp(-2.0 * x);
    return v;
  });
  auto w = sample(g, 2, [](double x) {
    Vector v(2);
    v << x * std::exp(-x), std::exp(cplx(-0.5 * x, -x));
    return v;
  });
  CHECK(std::abs(quad_inner(u, w) - std::conj(quad_inner(w, u))) < 1e-14);

  auto other = make_grid(HalfLine::Positive, 40.0, 800);
  CHECK_THROWS_AS(quad_inner(f, exp_decay(other, 2, 0, 1.0)), GridMismatch);
}

TEST_CASE("composite rule converges at fourth order or better") {
  // ||e^{-x}||^2 on a grid too coarse to be exact
  double prev_err = -1.0;
  for (int n : {16, 32, 64}) {
    auto g = make_grid(HalfLine::Positive, 40.0, n, 4);
    auto f = exp_decay(g, 1, 0, 1.0);
    double err = std::abs(quad_inner(f, f).real() - 0.5);
    if (prev_err > 0.0 && err > 1e-15) CHECK(std::log2(prev_err / err) >= 4.0);
    prev_err = err;
  }
}

TEST_CASE("fourier_on_grid of a decaying exponential") {
  auto g = make_grid(HalfLine::Positive, 40.0, 800);
  const cplx z(0.0, -1.0);
  Vector e(2);
  e << 1.0, cplx(0.5, -0.5);
  auto v = sample(g, 2, [&](double x) { return Vector(std::exp(-kI * z * x) * e); });
  for (double k : {-3.0, -0.4, 0.0, 1.7, 5.0}) {
    Vector expect = kI * e / (k - z) / std::sqrt(2.0 * std::numbers::pi);
    CHECK((fourier_on_grid(v, k) - expect).norm() < 1e-8);
  }
  GridFunction zero(g, 2);
  CHECK(fourier_on_grid(zero, 1.0).norm() == 0.0);
  auto w = exp_decay(g, 2, 1, 2.0);
  CHECK((fourier_on_grid(v + w, 0.7) - fourier_on_grid(v, 0.7) - fourier_on_grid(w, 0.7)).norm() < 1e-15);
}

TEST_CASE("volterra sweeps match closed-form antiderivatives") {
  // F(x) = int_0^x e^{r(x-t)} e^{-t} dt = (e^{rx} - e^{-x}) / (r + 1)
  auto g = make_grid(HalfLine::Positive, 40.0, 800);
  const cplx r(-2.0, 0.7);
  auto h = exp_decay(g, 1, 0, 1.0);
  auto f = volterra_exponential(h, r, Sweep::Forward);
  double err = 0.0;
  for (int j = 0; j < g->size(); ++j) {
    double x = g->nodes()(j);
    cplx ex = (std::exp(r * x) - std::exp(-x)) / (r + 1.0);
    err = std::max(err, std::abs(f.values(0, j) - ex));
  }
  CHECK(err < 1e-10);
  CHECK(f.boundary_value_at_0.norm() == 0.0);

  // Backward on R+: int_x^inf e^{r(x-t)} e^{-t} dt = e^{-x} / (1 + r), Re r > -1
  const cplx rb(1.5, -0.4);
  auto fb = volterra_exponential(h, rb, Sweep::Backward);
  err = 0.0;
  for (int j = 0; j < g->size(); ++j) {
    double x = g->nodes()(j);
    if (x > 30.0) continue;
    err = std::max(err, std::abs(fb.values(0, j) - std::exp(-x) / (1.0 + rb)));
  }
  CHECK(err < 1e-10);
  CHECK(std::abs(fb.boundary_value_at_0(0) - 1.0 / (1.0 + rb)) < 1e-10);

  // Forward on R-: int_{-inf}^x e^{r(x-t)} e^{t} dt = e^{x} / (1 - r), Re r < 1
  auto gn = make_grid(HalfLine::Negative, 40.0, 800);
  auto hn = exp_decay(gn, 1, 0, 1.0);
  auto fn = volterra_exponential(hn, r, Sweep::Forward);
  err = 0.0;
  for (int j = 0; j < gn->size(); ++j) {
    double x = gn->nodes()(j);
    if (x < -30.0) continue;
    err = std::max(err, std::abs(fn.values(0, j) - std::exp(x) / (1.0 - r)));
  }
  CHECK(err < 1e-10);
  CHECK(std::abs(fn.boundary_value_at_0(0) - 1.0 / (1.0 - r)) < 1e-10);
}

TEST_CASE("panel interpolation reproduces smooth functions") {
  auto g = make_grid(HalfLine::Negative, 20.0, 400);
  auto f = sample(g, 1, [](double x) { return Vector::Constant(1, std::cos(x) * std::exp(x)); });
  for (double x : {-19.99, -7.3, -0.01, 0.0}) CHECK(std::abs(f.at(x)(0) - std::cos(x) * std::exp(x)) < 1e-9);
}

TEST_CASE("tan-mapped real-line rule integrates rational functions") {
  auto r = RealLineGrid::tan_mapped(200, 16);
  // int dk / (k^2 + 1) = pi
  double s = 0.0;
  for (Eigen::Index j = 0; j < r.nodes.size(); ++j) s += r.weights(j) / (r.nodes(j) * r.nodes(j) + 1.0);
  CHECK(s == doctest::Approx(std::numbers::pi).epsilon(1e-13));
}
