#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "zoll/geometry.hpp"
#include "zoll/manifold_zoo.hpp"

using namespace zoll;

namespace {

// Interior sample, margin away from the chart box (periodic charts get a
// bounded sampling window instead of their huge formal box).
VecXd sample_point(const Chart& c, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VecXd q(c.dim);
  for (int i = 0; i < c.dim; ++i) {
    double lo = std::max(c.lo[i] + margin, -8.0);
    double hi = std::min(c.hi[i] - margin, 8.0);
    q[i] = lo + (hi - lo) * u(rng);
  }
  return q;
}

double exterior_derivative_residual(const ChartManifold& M, int cid,
                                    const VecXd& q) {
  double h = 1e-5;
  Tensor3 db = fd_derivative(M.magnetic, cid, q, M.dim, h);
  double worst = 0;
  for (int i = 0; i < M.dim; ++i)
    for (int j = i + 1; j < M.dim; ++j)
      for (int k = j + 1; k < M.dim; ++k)
        worst = std::max(
            worst, std::abs(db[i](j, k) + db[j](k, i) + db[k](i, j)));
  return worst;
}

}  // namespace

TEST_CASE("registry exposes the six built-ins") {
  auto names = builtin_manifold_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) CHECK_NOTHROW(make_manifold(n));
  CHECK_THROWS_AS(make_manifold("nonexistent"), ConfigError);
  CHECK_THROWS_AS(make_manifold("sphere", {{"bogus", 1.0}}), ConfigError);
}

TEST_CASE("pointwise structure invariants on random samples") {
  std::mt19937_64 rng(7);
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    for (const auto& c : M.charts) {
      for (int s = 0; s < 40; ++s) {
        VecXd q = sample_point(c, rng, 1e-3);
        MatXd g = M.metric(c.id, q);
        CHECK((g - g.transpose()).norm() < 1e-14);
        Eigen::SelfAdjointEigenSolver<MatXd> es(g);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        MatXd beta = M.magnetic(c.id, q);
        CHECK((beta + beta.transpose()).norm() < 1e-14);
        MatXd J = M.acs(c.id, q);
        CHECK((J * J + MatXd::Identity(M.dim, M.dim)).norm() < 1e-12);
        // compatibility: beta = g(J.,.) and g(J.,J.) = g
        CHECK((beta - J.transpose() * g).norm() < 1e-10);
        CHECK((J.transpose() * g * J - g).norm() < 1e-10);
        CHECK(exterior_derivative_residual(M, c.id, q) < 1e-6);
      }
    }
  }
}

TEST_CASE("analytic derivative callbacks match finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    for (const auto& c : M.charts) {
      for (int s = 0; s < 10; ++s) {
        VecXd q = sample_point(c, rng, 1e-3);
        Tensor3 dg = M.metric_derivative(c.id, q);
        Tensor3 dg_fd = fd_derivative(M.metric, c.id, q, M.dim, 1e-5);
        Tensor3 dJ = M.acs_derivative(c.id, q);
        Tensor3 dJ_fd = fd_derivative(M.acs, c.id, q, M.dim, 1e-5);
        for (int l = 0; l < M.dim; ++l) {
          CHECK((dg[l] - dg_fd[l]).norm() < 1e-6);
          CHECK((dJ[l] - dJ_fd[l]).norm() < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("sphere chart transitions: round trip and Jacobian") {
  for (const char* name : {"sphere", "perturbed-sphere"}) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    std::uniform_real_distribution<double> rad(0.7, 1.5);
    for (int s = 0; s < 50; ++s) {
      double r = rad(rng), a = ang(rng);
      VecXd q(2);
      q << r * std::cos(a), r * std::sin(a);
      const auto& tr01 = M.charts[0].transitions[0];
      const auto& tr10 = M.charts[1].transitions[0];
      VecXd q2 = tr01.map(q);
      CHECK((tr10.map(q2) - q).norm() < 1e-12);
      // transition Jacobians are mutually inverse and match FD
      MatXd Jac = tr01.jacobian(q);
      CHECK((tr10.jacobian(q2) * Jac - MatXd::Identity(2, 2)).norm() < 1e-11);
      MatXd fd(2, 2);
      double h = 1e-6;
      for (int l = 0; l < 2; ++l) {
        VecXd qp = q, qm = q;
        qp[l] += h;
        qm[l] -= h;
        fd.col(l) = (tr01.map(qp) - tr01.map(qm)) / (2 * h);
      }
      CHECK((Jac - fd).norm() < 1e-6);
      // the metric is transition-invariant: g = Jac^T g' Jac
      MatXd g = M.metric(0, q), g2 = M.metric(1, q2);
      CHECK((Jac.transpose() * g2 * Jac - g).norm() < 1e-9);
      // and so is the magnetic form
      MatXd b = M.magnetic(0, q), b2 = M.magnetic(1, q2);
      CHECK((Jac.transpose() * b2 * Jac - b).norm() < 1e-9);
    }
  }
}

TEST_CASE("sphere atlas ambient conversions") {
  for (double pole_x : {0.0, 1.0}) {
    CAPTURE(pole_x);
    ChartManifold M = make_manifold("sphere", {{"pole_x", pole_x}});
    SphereAtlas atlas = sphere_atlas(M);
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n;
    for (int s = 0; s < 30; ++s) {
      Eigen::Vector3d p(n(rng), n(rng), n(rng));
      p.normalize();
      Eigen::Vector3d V(n(rng), n(rng), n(rng));
      V -= V.dot(p) * p;
      auto cs = atlas.to_chart(p, V);
      CHECK(M.chart(cs.chart_id).contains(cs.q));
      CHECK(cs.q.norm() <= 1.0 + 1e-12);
      Eigen::Vector3d p2, V2;
      atlas.to_ambient(cs.chart_id, cs.q, cs.v, p2, V2);
      CHECK((p2 - p).norm() < 1e-12);
      CHECK((V2 - V).norm() < 1e-11);
      // chart speed equals ambient speed in the round metric
      MatXd g = M.metric(cs.chart_id, cs.q);
      CHECK(std::abs(std::sqrt(cs.v.dot(g * cs.v)) - V.norm()) < 1e-10);
    }
  }
}
