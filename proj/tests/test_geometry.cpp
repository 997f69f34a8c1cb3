#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zoll/geometry.hpp"
#include "zoll/manifold_zoo.hpp"

using namespace zoll;

namespace {

ChartManifold flat_plane(double gscale) {
  ChartManifold M;
  M.name = "plane";
  M.dim = 2;
  Chart c;
  c.id = 0;
  c.dim = 2;
  c.lo = VecXd::Constant(2, -10.0);
  c.hi = VecXd::Constant(2, 10.0);
  M.charts = {c};
  M.metric = [gscale](int, const VecXd&) -> MatXd {
    return gscale * MatXd::Identity(2, 2);
  };
  MatXd beta(2, 2);
  beta << 0, 1, -1, 0;
  M.magnetic = [beta](int, const VecXd&) { return beta; };
  return M;
}

// Round sphere in spherical coordinates (theta, phi), away from the poles.
ChartManifold sphere_polar() {
  ChartManifold M;
  M.name = "sphere-polar";
  M.dim = 2;
  Chart c;
  c.id = 0;
  c.dim = 2;
  c.lo = VecXd(2);
  c.hi = VecXd(2);
  c.lo << 0.3, -10.0;
  c.hi << kPi - 0.3, 10.0;
  M.charts = {c};
  M.metric = [](int, const VecXd& q) -> MatXd {
    MatXd g = MatXd::Identity(2, 2);
    g(1, 1) = std::sin(q[0]) * std::sin(q[0]);
    return g;
  };
  M.magnetic = [](int, const VecXd& q) -> MatXd {
    MatXd b(2, 2);
    b << 0, std::sin(q[0]), -std::sin(q[0]), 0;
    return b;
  };
  return M;
}

VecXd unit_vector(const MatXd& g, VecXd v) { return v / g_norm(g, v); }

VecXd random_unit(const ChartManifold& M, int cid, const VecXd& q,
                  std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  VecXd v(M.dim);
  for (int i = 0; i < M.dim; ++i) v[i] = n(rng);
  return unit_vector(M.metric(cid, q), v);
}

VecXd torus_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  VecXd q(2);
  q << u(rng), u(rng);
  return q;
}

}  // namespace

TEST_CASE("Lorentz endomorphism on flat planes") {
  VecXd q = VecXd::Zero(2);
  MatXd B = lorentz_endomorphism(flat_plane(1.0), 0, q);
  MatXd rot(2, 2);
  rot << 0, -1, 1, 0;
  CHECK((B - rot).norm() < 1e-14);  // B e1 = e2, B e2 = -e1
  MatXd B2 = lorentz_endomorphism(flat_plane(2.0), 0, q);
  CHECK((B2 - 0.5 * rot).norm() < 1e-14);
}

TEST_CASE("Lorentz endomorphism squares to -1 when beta is the area form") {
  ChartManifold M = make_manifold("sphere");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    VecXd q(2);
    q << u(rng), u(rng);
    MatXd B = lorentz_endomorphism(M, 0, q);
    CHECK((B * B + MatXd::Identity(2, 2)).norm() < 1e-12);
  }
}

TEST_CASE("degenerate metric is rejected") {
  ChartManifold M = flat_plane(1.0);
  M.metric = [](int, const VecXd&) -> MatXd {
    MatXd g(2, 2);
    g << 1, 0, 0, -1;
    return g;
  };
  CHECK_THROWS_AS(lorentz_endomorphism(M, 0, VecXd::Zero(2)),
                  DegenerateMetricError);
}

TEST_CASE("Christoffel symbols: flat, polar sphere, conformal torus") {
  CHECK(direction_matrix(christoffel(make_manifold("flat-torus"), 0,
                                     VecXd::Constant(2, 1.0)),
                         0)
            .norm() == 0.0);

  ChartManifold S = sphere_polar();
  VecXd q(2);
  q << 1.1, 0.4;
  Tensor3 G = christoffel(S, 0, q);
  CHECK(std::abs(G[0](1, 1) - (-std::sin(q[0]) * std::cos(q[0]))) < 1e-9);
  CHECK(std::abs(G[1](0, 1) - std::cos(q[0]) / std::sin(q[0])) < 1e-9);
  CHECK(std::abs(G[0](0, 0)) < 1e-9);

  double c = 0.1;
  ChartManifold T = make_manifold("conformal-torus", {{"c", c}});
  std::mt19937_64 rng(2);
  for (int s = 0; s < 10; ++s) {
    VecXd p = torus_point(rng);
    Tensor3 Gc = christoffel(T, 0, p);
    VecXd dphi(2);
    dphi << c * std::cos(p[0]) * std::sin(p[1]),
        c * std::sin(p[0]) * std::cos(p[1]);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(Gc[k](i, j) -
                         oracle::conformal_christoffel(dphi, k, i, j)) < 1e-7);
  }
}

TEST_CASE("metric compatibility of the Levi-Civita connection") {
  std::mt19937_64 rng(23);
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    for (int s = 0; s < 5; ++s) {
      VecXd q(M.dim);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int i = 0; i < M.dim; ++i) q[i] = u(rng);
      Tensor3 lc = christoffel(M, 0, q);
      Tensor3 ng = covariant_metric_derivative(M, 0, q, lc);
      for (int i = 0; i < M.dim; ++i) CHECK(ng[i].norm() < 1e-7);
    }
  }
}

TEST_CASE("curvature: flat torus, round sphere, conformal torus") {
  ChartManifold F = make_manifold("flat-torus");
  VecXd q = VecXd::Constant(2, 0.7);
  VecXd e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(riemann(F, 0, q, e1, e2, e2).norm() < 1e-12);

  ChartManifold S = make_manifold("sphere");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int s = 0; s < 8; ++s) {
    VecXd p(2);
    p << u(rng), u(rng);
    MatXd g = S.metric(0, p);
    // g-orthonormal pair
    VecXd a = unit_vector(g, e1);
    VecXd b = e2 - a.dot(g * e2) * a;
    b = unit_vector(g, b);
    VecXd R = riemann(S, 0, p, a, b, b);
    CHECK(std::abs(R.dot(g * a) - 1.0) < 1e-8);
    // antisymmetry in the first slots
    CHECK((riemann(S, 0, p, a, b, b) + riemann(S, 0, p, b, a, b)).norm() <
          1e-8);
  }

  // Gauss curvature against the conformal-formula oracle
  double c = 0.1;
  ChartManifold T = make_manifold("conformal-torus", {{"c", c}});
  for (int s = 0; s < 8; ++s) {
    VecXd p = torus_point(rng);
    MatXd g = T.metric(0, p);
    VecXd a = unit_vector(g, e1);
    VecXd b = e2 - a.dot(g * e2) * a;
    b = unit_vector(g, b);
    double K = riemann(T, 0, p, a, b, b).dot(g * a);
    double phi = c * std::sin(p[0]) * std::sin(p[1]);
    double lap = -2.0 * phi;
    double K_oracle = -std::exp(-2.0 * phi) * lap;
    CHECK(std::abs(K - K_oracle) < 1e-5);
  }
}

TEST_CASE("Nijenhuis tensor: integrable cases vanish, KT frame value") {
  std::mt19937_64 rng(9);
  for (const char* name : {"flat-torus", "sphere", "conformal-torus"}) {
    ChartManifold M = make_manifold(name);
    VecXd q = VecXd::Constant(2, 0.5);
    for (int s = 0; s < 5; ++s) {
      VecXd u = random_unit(M, 0, q, rng), v = random_unit(M, 0, q, rng);
      CHECK(nijenhuis(M, 0, q, u, v).norm() < 1e-9);
    }
  }

  ChartManifold KT = make_manifold("kodaira-thurston");
  VecXd q(4);
  q << 0.3, -0.2, 0.8, 0.1;
  double x = q[0];
  VecXd e1(4), e2(4), e3(4);
  e1 << 1, 0, 0, 0;
  e2 << 0, 1, x, 0;  // frame field e2 = d_y + x d_z in coordinates
  e3 << 0, 0, 1, 0;
  CHECK((nijenhuis(KT, 0, q, e1, e2) - e3).norm() < 1e-8);

  std::normal_distribution<double> n;
  for (int s = 0; s < 10; ++s) {
    VecXd v(4), w(4);
    for (int i = 0; i < 4; ++i) {
      v[i] = n(rng);
      w[i] = n(rng);
    }
    CHECK(nijenhuis(KT, 0, q, v, v).norm() < 1e-10);
    // anticomplex relation N(Jv, w) = -J N(v, w)
    MatXd J = KT.acs(0, q);
    CHECK((nijenhuis(KT, 0, q, J * v, w) + J * nijenhuis(KT, 0, q, v, w))
              .norm() < 1e-8);
  }
}

TEST_CASE("Chern connection: defining properties on all built-ins") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    for (int s = 0; s < 20; ++s) {
      VecXd q(M.dim);
      for (int i = 0; i < M.dim; ++i) q[i] = u(rng);
      Tensor3 ch = chern_connection(M, 0, q);
      Tensor3 ng = covariant_metric_derivative(M, 0, q, ch);
      Tensor3 nJ = covariant_acs_derivative(M, 0, q, ch);
      for (int i = 0; i < M.dim; ++i) {
        CHECK(ng[i].norm() < 1e-8);
        CHECK(nJ[i].norm() < 1e-8);
      }
      // (1,1)-part of the torsion vanishes: T(Ju, w) = T(u, Jw)
      MatXd J = M.acs(0, q);
      VecXd a = random_unit(M, 0, q, rng);
      MatXd lhs = torsion_matrix(ch, J * a);
      MatXd rhs = torsion_matrix(ch, a) * J;
      CHECK((lhs - rhs).norm() < 1e-8);
      // torsion = -N/4
      VecXd b = random_unit(M, 0, q, rng);
      CHECK((torsion_matrix(ch, a) * b + 0.25 * nijenhuis(M, 0, q, a, b))
                .norm() < 1e-8);
    }
  }
}

TEST_CASE("finite-difference fallback matches analytic-derivative results") {
  for (const char* name : {"conformal-torus", "kodaira-thurston"}) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    ChartManifold F = M;
    F.metric_derivative = nullptr;
    F.acs_derivative = nullptr;
    VecXd q = VecXd::Constant(M.dim, 0.4);
    Tensor3 ga = christoffel(M, 0, q), gf = christoffel(F, 0, q);
    for (int k = 0; k < M.dim; ++k) CHECK((ga[k] - gf[k]).norm() < 1e-7);
    Tensor3 ng = covariant_metric_derivative(F, 0, q, gf);
    for (int i = 0; i < M.dim; ++i) CHECK(ng[i].norm() < 1e-7);
    Tensor3 ca = chern_connection(M, 0, q), cf = chern_connection(F, 0, q);
    for (int k = 0; k < M.dim; ++k) CHECK((ca[k] - cf[k]).norm() < 1e-6);
  }
}

TEST_CASE("Chern curvature is antisymmetric in the last metric pair") {
  ChartManifold KT = make_manifold("kodaira-thurston");
  VecXd q(4);
  q << 0.5, -0.2, 0.3, 0.7;
  MatXd g = KT.metric(0, q);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nrm;
  for (int s = 0; s < 5; ++s) {
    VecXd u(4), v(4), w(4), z(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = nrm(rng);
      v[i] = nrm(rng);
      w[i] = nrm(rng);
      z[i] = nrm(rng);
    }
    double a = riemann(KT, 0, q, u, v, w, Connection::Chern).dot(g * z);
    double b = riemann(KT, 0, q, u, v, z, Connection::Chern).dot(g * w);
    CHECK(std::abs(a + b) < 1e-8);
    // and antisymmetry in the first pair
    CHECK((riemann(KT, 0, q, u, v, w, Connection::Chern) +
           riemann(KT, 0, q, v, u, w, Connection::Chern))
              .norm() < 1e-8);
  }
}

TEST_CASE("Chern equals Levi-Civita in the integrable case") {
  ChartManifold S = make_manifold("sphere");
  VecXd q(2);
  q << 0.4, -0.9;
  Tensor3 lc = christoffel(S, 0, q);
  Tensor3 ch = chern_connection(S, 0, q);
  for (int k = 0; k < 2; ++k) CHECK((lc[k] - ch[k]).norm() < 1e-10);
  VecXd v = VecXd::Ones(2);
  CHECK(torsion_matrix(ch, v).norm() < 1e-10);
}

TEST_CASE("KT torsion fixture T(e1,e2) = -e3/4") {
  ChartManifold KT = make_manifold("kodaira-thurston");
  VecXd q(4);
  q << -0.4, 0.6, 0.2, 1.0;
  double x = q[0];
  VecXd e1(4), e2(4), e3(4);
  e1 << 1, 0, 0, 0;
  e2 << 0, 1, x, 0;
  e3 << 0, 0, 1, 0;
  Tensor3 ch = chern_connection(KT, 0, q);
  CHECK((torsion_matrix(ch, e1) * e2 + 0.25 * e3).norm() < 1e-8);
}

TEST_CASE("curvature invariant khat: space forms and flat torus") {
  std::mt19937_64 rng(13);
  ChartManifold F = make_manifold("flat-torus");
  VecXd q = torus_point(rng);
  CurvatureSample s = khat(F, 0, q, random_unit(F, 0, q, rng));
  CHECK(std::abs(s.K) < 1e-10);
  CHECK(std::abs(s.nstar2) < 1e-12);
  CHECK(std::abs(s.khat) < 1e-10);

  ChartManifold S = make_manifold("sphere");
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int t = 0; t < 6; ++t) {
    VecXd p(2);
    p << u(rng), u(rng);
    CurvatureSample c = khat(S, 0, p, random_unit(S, 0, p, rng));
    CHECK(std::abs(c.K - 1.0) < 1e-7);
    CHECK(c.nstar2 < 1e-10);
    CHECK(std::abs(c.khat - 1.0) < 1e-7);
  }

  CHECK_THROWS_AS(khat(S, 0, VecXd::Zero(2), VecXd::Constant(2, 5.0)),
                  NormalizationError);
}

TEST_CASE("khat on Kodaira-Thurston against the frame-algebra oracle") {
  ChartManifold KT = make_manifold("kodaira-thurston");
  oracle::FrameAlgebra alg = oracle::kodaira_thurston_frame();

  // frozen fixture at v = e1: K = 1/8, |N* v|^2 = 1, khat = 1/6
  auto fx = oracle::frame_khat(alg, VecXd::Unit(4, 0));
  CHECK(std::abs(fx.K - 0.125) < 1e-14);
  CHECK(std::abs(fx.nstar2 - 1.0) < 1e-14);
  CHECK(std::abs(fx.khat - 1.0 / 6.0) < 1e-14);

  VecXd q(4);
  q << 0.7, -0.3, 0.5, -0.1;
  MatXd E = MatXd::Identity(4, 4);  // frame in coordinates
  E(2, 1) = q[0];
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n;
  for (int s = 0; s < 6; ++s) {
    VecXd vf(4);
    for (int i = 0; i < 4; ++i) vf[i] = n(rng);
    vf.normalize();
    auto want = oracle::frame_khat(alg, vf);
    CurvatureSample got = khat(KT, 0, q, E * vf);
    CHECK(std::abs(got.K - want.K) < 1e-7);
    CHECK(std::abs(got.nstar2 - want.nstar2) < 1e-7);
    CHECK(std::abs(got.khat - want.khat) < 1e-7);
    CHECK(got.nstar2 >= 0.0);
    // torsion route agrees with the Nijenhuis route
    CHECK(std::abs(khat_via_torsion(KT, 0, q, E * vf) - got.khat) < 1e-10);
  }
}

TEST_CASE("khat is constant on complex lines (fiber invariance)") {
  ChartManifold KT = make_manifold("kodaira-thurston");
  VecXd q(4);
  q << 0.2, 0.4, -0.6, 0.3;
  MatXd g = KT.metric(0, q), J = KT.acs(0, q);
  std::mt19937_64 rng(17);
  VecXd v = random_unit(KT, 0, q, rng);
  VecXd Jv = J * v;
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < 32; ++k) {
    double th = kTwoPi * k / 32.0;
    VecXd w = std::cos(th) * v + std::sin(th) * Jv;
    w = unit_vector(g, w);
    double val = khat(KT, 0, q, w).khat;
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  CHECK(hi - lo < 1e-8);
}

TEST_CASE("stencil guard near chart boundaries") {
  ChartManifold S = sphere_polar();
  VecXd q(2);
  q << 0.3 + 1e-6, 0.0;  // hugs the theta boundary
  CHECK_THROWS_AS(riemann(S, 0, q, VecXd::Unit(2, 0), VecXd::Unit(2, 1),
                          VecXd::Unit(2, 1)),
                  StencilError);
}

TEST_CASE("missing almost complex structure is reported") {
  ChartManifold P = flat_plane(1.0);
  CHECK_THROWS_AS(nijenhuis(P, 0, VecXd::Zero(2), VecXd::Unit(2, 0),
                            VecXd::Unit(2, 1)),
                  MissingStructureError);
  CHECK_THROWS_AS(chern_connection(P, 0, VecXd::Zero(2)),
                  MissingStructureError);
}
