#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "modelkit/charmodel.hpp"
#include "modelkit/model.hpp"
#include "modelkit/scenarios.hpp"

using namespace modelkit;

namespace {

std::mt19937_64 rng(77);
const double kPi = std::numbers::pi;

Vector rand_vec(int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

cplx rand_z(bool upper) {
  std::uniform_real_distribution<double> re(-4.0, 4.0), im(0.3, 2.5);
  return {re(rng), upper ? im(rng) : -im(rng)};
}

ModelParams rand_params(int dim_e) { return {rand_z(true), rand_z(false), rand_vec(dim_e), rand_vec(dim_e)}; }

std::vector<double> sample_ks(int n, double lo = -8.0, double hi = 8.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> ks(n);
  for (double& k : ks) k = u(rng);
  return ks;
}

struct Channels {
  GridFunction minus, plus;
};

Channels rand_channels(int dim_e, GridPtr gm, GridPtr gp) {
  Vector a = rand_vec(dim_e), b = rand_vec(dim_e), c = rand_vec(dim_e);
  return {sample(gm, dim_e, [&](double x) -> Vector { return std::exp(x) * (a + x * b); }),
          sample(gp, dim_e, [&](double x) -> Vector { return std::exp(-1.5 * x) * (c + std::sin(x) * a); })};
}

ModelElement rational_pair(int dim_e, int terms, bool force_plus_tilde = false) {
  ModelElement e(dim_e);
  for (int i = 0; i < terms; ++i) {
    cplx p = force_plus_tilde ? rand_z(false) : rand_z(i % 2 == 0);
    e.gtilde.rational.add_term(p, rand_vec(dim_e));
    e.g.rational.add_term(rand_z(i % 2 == 1), rand_vec(dim_e));
  }
  return e;
}

const double kX = 40.0;

}  // namespace

TEST_CASE("model inner product basics") {
  auto t = build_random_triple(1, 12, 2);
  auto grid = RealLineGrid::tan_mapped(400, 16, 4.0);
  ModelElement zero(2);
  auto e = rational_pair(2, 2);
  CHECK(model_inner(t, e, zero, grid) == cplx(0.0));
  CHECK(model_inner_exact(t, e, zero) == cplx(0.0));

  // (0, b/(k - q)) has squared norm pi |b|^2 / |Im q|
  ModelElement g(2);
  Vector b = rand_vec(2);
  const cplx q(0.7, 1.3);
  g.g.rational.add_term(q, b);
  const double expect = kPi * b.squaredNorm() / q.imag();
  CHECK(std::abs(model_inner(t, g, g, grid) - expect) < 1e-6 * expect);
  CHECK(std::abs(model_inner_exact(t, g, g) - expect) < 1e-12 * expect);
}

TEST_CASE("incoming and outgoing subspaces are orthogonal") {
  for (std::uint64_t s : {2u, 3u}) {
    auto t = build_random_triple(s, 12, 2);
    ModelElement dp(2), dm(2);
    for (int i = 0; i < 3; ++i) {
      dp.gtilde.rational.add_term(rand_z(false), rand_vec(2));
      dm.g.rational.add_term(rand_z(true), rand_vec(2));
    }
    CHECK(std::abs(model_inner_exact(t, dp, dm)) < 1e-8);
    CHECK(std::abs(model_inner_exact(t, dm, dp)) < 1e-8);
    // S has narrow resonances near the eigenvalues of A0; the rule must resolve them.
    auto grid = RealLineGrid::tan_mapped(6400, 16, 4.0);
    CHECK(std::abs(model_inner(t, dp, dm, grid)) < 1e-6);

    auto gm = make_grid(HalfLine::Negative, kX, 400);
    auto gp = make_grid(HalfLine::Positive, kX, 400);
    auto ch = rand_channels(2, gm, gp);
    ModelElement fp(2), fm(2);
    fp.gtilde.fourier.push_back(ch.plus);
    fm.g.fourier.push_back(ch.minus);
    CHECK(std::abs(model_inner_exact(t, fp, fm)) < 1e-8);
    CHECK(std::abs(model_inner_exact(t, fp, fp) - quad_inner(ch.plus, ch.plus)) < 1e-12);
  }
}

TEST_CASE("residue pairing agrees with weighted quadrature") {
  auto t = build_random_triple(4, 12, 2);
  auto grid = RealLineGrid::tan_mapped(1600, 16, 4.0);
  for (int i = 0; i < 3; ++i) {
    auto e1 = rational_pair(2, 2), e2 = rational_pair(2, 3);
    cplx exact = model_inner_exact(t, e1, e2);
    cplx quad = model_inner(t, e1, e2, grid);
    CHECK(std::abs(exact - quad) < 1e-6 * (1.0 + std::abs(exact)));
    CHECK(model_inner_exact(t, e1, e1).real() >= -1e-10);
    CHECK(std::abs(model_inner_exact(t, e1, e1).imag()) < 1e-10 * (1.0 + std::abs(model_inner_exact(t, e1, e1))));
  }
}

TEST_CASE("double poles in the residue pairing") {
  auto t = build_random_triple(4, 12, 2);
  auto grid = RealLineGrid::tan_mapped(1600, 16, 4.0);
  const cplx zm(0.4, -0.9);
  ModelElement e1(2), e2(2);
  e1.g.rational.add_term(zm, rand_vec(2));
  e2.gtilde.rational.add_term(std::conj(zm), rand_vec(2));
  cplx exact = model_inner_exact(t, e1, e2);
  CHECK(std::abs(exact) > 1e-3);
  CHECK(std::abs(exact - model_inner(t, e1, e2, grid)) < 1e-6 * (1.0 + std::abs(exact)));
  CHECK(std::abs(model_inner_exact(t, e2, e1) - std::conj(exact)) < 1e-10 * (1.0 + std::abs(exact)));
}

TEST_CASE("weight is positive semidefinite on the real axis") {
  for (auto t : {build_random_triple(5, 16, 3), build_interval_laplacian(64)}) {
    for (double k : sample_ks(50, -20.0, 120.0)) CHECK(weight_min_eigenvalue(t, k) >= -1e-10);
    for (double d : t.a0_eigenvalues()) CHECK(weight_min_eigenvalue(t, d) >= -1e-10);
  }
}

TEST_CASE("F maps on single channels") {
  auto t = build_random_triple(6, 12, 2);
  auto gm = make_grid(HalfLine::Negative, kX, 400);
  auto gp = make_grid(HalfLine::Positive, kX, 400);
  Vector h = rand_vec(12);
  auto onlyh = make_element(gm, gp, 2, h);
  auto ch = rand_channels(2, gm, gp);
  auto onlym = make_element(gm, gp, 2, Vector::Zero(12));
  onlym.v_minus = ch.minus;
  for (double k : sample_ks(10)) {
    CHECK((f_plus(t, onlyh, k) + l_trace(t, k, h) / std::sqrt(kPi)).norm() < 1e-14 * (1.0 + h.norm()));
    CHECK((f_minus(t, onlyh, k) + lstar_trace(t, k, h) / std::sqrt(kPi)).norm() < 1e-14 * (1.0 + h.norm()));
    Vector vm = fourier_on_grid(ch.minus, k);
    CHECK((f_plus(t, onlym, k) - char_function_real(t, k).adjoint() * vm).norm() < 1e-14);
    CHECK((f_minus(t, onlym, k) - vm).norm() < 1e-14);
  }
}

TEST_CASE("trace displays for the G summands") {
  auto t = build_random_triple(7, 16, 3);
  const Matrix id = identity(3);
  for (int i = 0; i < 3; ++i) {
    cplx zm = rand_z(false), zp = rand_z(true);
    Vector wm = rand_vec(3), wp = rand_vec(3);
    Vector um = assemble(t, gamma(t, zm, solve(m_function(t, zm) - kI * id, wm)));
    Vector up = assemble(t, gamma(t, zp, solve(m_function(t, zp) + kI * id, wp)));
    Matrix s_zp = char_function(t, zp).s;
    Matrix sa_zm = char_adjoint(t, zm);
    for (double k : sample_ks(20)) {
      Matrix sa = char_function_real(t, k).adjoint();
      Vector lhs_m = kI / (k - zm) * (sa - sa_zm) * wm;
      Vector lhs_p = kI / (k - zp) * (id - sa * s_zp) * wp;
      CHECK((lhs_m + 2.0 * l_trace(t, k, um)).norm() < 1e-8 * (1.0 + lhs_m.norm()));
      CHECK((lhs_p - 2.0 * l_trace(t, k, up)).norm() < 1e-8 * (1.0 + lhs_p.norm()));
    }
  }
}

TEST_CASE("decomposition in G") {
  auto t = build_random_triple(8, 16, 2);
  auto p = rand_params(2);
  Vector v = assemble(t, g_vector(t, p));
  auto back = decompose_in_g(t, p.z_plus, p.z_minus, v);
  CHECK((back.w_plus - p.w_plus).norm() < 1e-8 * p.w_plus.norm());
  CHECK((back.w_minus - p.w_minus).norm() < 1e-8 * p.w_minus.norm());
  Vector off = rand_vec(16);
  CHECK_THROWS_AS(decompose_in_g(t, p.z_plus, p.z_minus, off), DomainError);
  CHECK_THROWS_AS(validate_params({cplx(1.0, 0.0), p.z_minus, p.w_plus, p.w_minus}, 2), DomainError);
}

TEST_CASE("Phi on channels and isometry") {
  auto t = build_random_triple(9, 16, 2);
  auto gm = make_grid(HalfLine::Negative, kX, 400);
  auto gp = make_grid(HalfLine::Positive, kX, 400);
  auto ch = rand_channels(2, gm, gp);
  ModelParams zero{cplx(0.0, 1.0), cplx(0.0, -1.0), Vector::Zero(2), Vector::Zero(2)};
  GridFunction nm(gm, 2), np(gp, 2);

  auto phm = phi_map(t, zero, ch.minus, np);
  for (double k : sample_ks(5)) {
    CHECK(phm.gtilde(k).norm() < 1e-15);
    CHECK((phm.g(k) - fourier_on_grid(ch.minus, k)).norm() < 1e-14);
  }
  CHECK(std::abs(std::sqrt(model_inner_exact(t, phm, phm).real()) - quad_norm(ch.minus)) < 1e-10);
  auto php = phi_map(t, zero, nm, ch.plus);
  for (double k : sample_ks(5)) {
    CHECK((php.gtilde(k) - fourier_on_grid(ch.plus, k)).norm() < 1e-14);
    CHECK(php.g(k).norm() < 1e-15);
  }

  for (int i = 0; i < 10; ++i) {
    auto p = rand_params(2);
    auto c = rand_channels(2, gm, gp);
    auto e = phi_map(t, p, c.minus, c.plus);
    double model = std::sqrt(model_inner_exact(t, e, e).real());
    double direct = dilation_norm(g_element(t, p, c.minus, c.plus));
    CHECK(std::abs(model - direct) < 1e-5 * direct);
    auto eh = phi_map(t, p, nm, np);
    double vh = assemble(t, g_vector(t, p)).norm();
    CHECK(std::abs(std::sqrt(model_inner_exact(t, eh, eh).real()) - vh) < 1e-8 * vh);
  }
}

TEST_CASE("weight identity") {
  auto t = build_random_triple(10, 16, 3);
  auto gm = make_grid(HalfLine::Negative, kX, 400);
  auto gp = make_grid(HalfLine::Positive, kX, 400);
  for (int i = 0; i < 3; ++i) {
    auto c = rand_channels(3, gm, gp);
    auto ks = sample_ks(20);
    CHECK(weight_identity_defect(t, rand_params(3), c.minus, c.plus, ks) < 1e-6);
  }
}

TEST_CASE("Phi intertwines the dilation resolvent") {
  auto t = build_random_triple(12, 12, 2);
  auto ks = sample_ks(20);
  ModelParams zero{cplx(0.5, 1.0), cplx(-0.5, -1.0), Vector::Zero(2), Vector::Zero(2)};
  {
    auto gm = make_grid(HalfLine::Negative, kX, 400);
    auto gp = make_grid(HalfLine::Positive, kX, 400);
    GridFunction nm(gm, 2), np(gp, 2);
    CHECK(intertwine_defect(t, zero, nm, np, cplx(0.0, -2.0), ks) == 0.0);
    auto p = rand_params(2);
    CHECK(intertwine_defect(t, p, nm, np, cplx(0.0, -2.0), ks) < 1e-6);
    CHECK(intertwine_defect(t, p, nm, np, cplx(1.0, 1.5), ks) < 1e-6);
  }
  auto p = rand_params(2);
  Vector a = rand_vec(2), b = rand_vec(2);
  double prev = INFINITY;
  for (int n : {80, 160, 800}) {
    auto gm = make_grid(HalfLine::Negative, kX, n);
    auto gp = make_grid(HalfLine::Positive, kX, n);
    auto vm = sample(gm, 2, [&](double x) -> Vector { return std::exp(x) * (a + x * b); });
    auto vp = sample(gp, 2, [&](double x) -> Vector { return std::exp(-x) * std::cos(x) * b; });
    double d1 = intertwine_defect(t, p, vm, vp, cplx(0.3, -1.2), ks);
    double d2 = intertwine_defect(t, p, vm, vp, cplx(-0.4, 0.9), ks);
    MESSAGE("intertwine n=" << n << ": " << d1 << " " << d2);
    CHECK(std::max(d1, d2) <= prev * 1.0001);
    prev = std::max(d1, d2);
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("projection onto K") {
  auto t = build_random_triple(13, 12, 2);
  ModelElement dp(2);
  for (int i = 0; i < 3; ++i) dp.gtilde.rational.add_term(rand_z(false), rand_vec(2));
  auto pd = pk_project(t, dp);
  for (double k : sample_ks(5)) {
    CHECK(pd.gtilde(k).norm() < 1e-14);
    CHECK(pd.g(k).norm() < 1e-14);
  }

  auto gm = make_grid(HalfLine::Negative, kX, 400);
  auto gp = make_grid(HalfLine::Positive, kX, 400);
  GridFunction nm(gm, 2), np(gp, 2);
  auto p = rand_params(2);
  auto e = phi_map(t, p, nm, np);
  auto pe = pk_project(t, e);
  auto c = rand_channels(2, gm, gp);
  auto full = pk_project(t, phi_map(t, p, c.minus, c.plus));
  for (double k : sample_ks(10)) {
    double scale = 1.0 + e.gtilde(k).norm() + e.g(k).norm();
    CHECK((pe.gtilde(k) - e.gtilde(k)).norm() < 1e-8 * scale);
    CHECK((pe.g(k) - e.g(k)).norm() < 1e-8 * scale);
    CHECK((full.gtilde(k) - e.gtilde(k)).norm() < 1e-8 * scale);
    CHECK((full.g(k) - e.g(k)).norm() < 1e-8 * scale);
  }

  auto e1 = rational_pair(2, 3), e2 = rational_pair(2, 2);
  auto lin = pk_project(t, e1 + e2) - (pk_project(t, e1) + pk_project(t, e2));
  auto p1 = pk_project(t, e1);
  auto idem = pk_project(t, p1) - p1;
  for (double k : sample_ks(10)) {
    CHECK(lin.gtilde(k).norm() < 1e-12 * (1.0 + p1.gtilde(k).norm()));
    CHECK(lin.g(k).norm() < 1e-12 * (1.0 + p1.g(k).norm()));
    CHECK(idem.gtilde(k).norm() < 1e-12 * (1.0 + p1.gtilde(k).norm()));
    CHECK(idem.g(k).norm() < 1e-12 * (1.0 + p1.g(k).norm()));
  }

  ModelElement bad(2);
  bad.g.fourier.push_back(c.plus);
  CHECK_THROWS_AS(pk_project(t, bad), DomainError);
}

TEST_CASE("resolvent of A_B in the model") {
  auto t = build_random_triple(14, 16, 2);
  auto ks = sample_ks(20);
  Vector h = rand_vec(16);
  CHECK(model_resolvent_defect(t, dissipative_bc(2), cplx(0.5, -1.0), h, ks, ModelSide::Plus) < 1e-10);
  auto hb = hermitian_random_bc(2, 5);
  CHECK(model_resolvent_defect(t, hb, cplx(-1.0, -1.0), h, ks, ModelSide::Plus) < 1e-8);
  auto iv = build_interval_laplacian(64);
  Vector hi = rand_vec(64);
  CHECK(model_resolvent_defect(iv, neumann_bc(2), cplx(0.0, 2.0), hi, sample_ks(20, -5.0, 60.0),
                               ModelSide::Minus) < 1e-8);
  for (int i = 0; i < 10; ++i) {
    auto bc = hermitian_random_bc(2, 100 + i);
    Vector v = rand_vec(16);
    CHECK(model_resolvent_defect(t, bc, rand_z(false), v, ks, ModelSide::Plus) < 1e-8);
    CHECK(model_resolvent_defect(t, bc, rand_z(true), v, ks, ModelSide::Minus) < 1e-8);
  }
  CHECK_THROWS_AS(model_resolvent_defect(t, hb, cplx(0.0, 1.0), h, ks, ModelSide::Plus), DomainError);
}

TEST_CASE("Toeplitz form of the resolvent") {
  auto t = build_random_triple(15, 16, 2);
  auto ks = sample_ks(20);
  CHECK(toeplitz_check(t, cplx(0.0, 1.0), Vector::Zero(16), ks) == 0.0);
  Vector h = rand_vec(16);
  CHECK(toeplitz_check(t, cplx(0.0, 1.0), h, ks) < 1e-10);
  CHECK_THROWS_AS(toeplitz_check(t, cplx(0.0, -1.0), h, ks), DomainError);
  for (int i = 0; i < 4; ++i) {
    auto bc = hermitian_random_bc(2, 200 + i);
    CHECK(triangular_check(t, bc, rand_z(true), h, ks) < 1e-8);
    CHECK(triangular_check(t, bc, rand_z(false), h, ks) < 1e-8);
  }
}
