#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zoll/dynamics.hpp"
#include "zoll/manifold_zoo.hpp"
#include "zoll/periods.hpp"
#include "zoll/seeding.hpp"

using namespace zoll;

namespace {

// Ambient circle of geodesic curvature 1/eps on the unit sphere through
// p0 = (cos r, 0, sin r) around the x-axis; sign picks the traversal sense.
struct AmbientCircle {
  double r, omega;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();

  Eigen::Vector3d pos(double t, double sgn) const {
    return std::cos(r) * axis +
           std::sin(r) * (std::cos(sgn * omega * t) * Eigen::Vector3d::UnitZ() +
                          std::sin(sgn * omega * t) *
                              Eigen::Vector3d::UnitY() * (-1.0));
  }
  Eigen::Vector3d vel(double t, double sgn) const {
    return std::sin(r) * sgn * omega *
           (-std::sin(sgn * omega * t) * Eigen::Vector3d::UnitZ() -
            std::cos(sgn * omega * t) * Eigen::Vector3d::UnitY());
  }
};

AmbientCircle sphere_circle(double eps) {
  AmbientCircle c;
  c.r = std::atan(eps);
  c.omega = std::sqrt(1.0 + eps * eps);
  return c;
}

}  // namespace

TEST_CASE("magnetic field on the flat torus is pure fiber rotation") {
  ChartManifold F = make_manifold("flat-torus");
  TangentState s = make_state(F, 0, VecXd::Zero(2), VecXd::Unit(2, 0), 1.0);
  auto [qd, vd] = magnetic_vector_field(F, s);
  CHECK((qd - s.v).norm() == 0.0);
  VecXd want(2);
  want << 0.0, 1.0;
  CHECK((vd - want).norm() < 1e-14);
}

TEST_CASE("without magnetic term the flow reduces to the geodesic equation") {
  ChartManifold M = make_manifold("conformal-torus", {{"c", 0.2}});
  M.magnetic = [](int, const VecXd&) { return MatXd::Zero(2, 2); };
  VecXd q(2), v(2);
  q << 1.2, 0.3;
  v << 0.4, -0.2;
  VecXd a = magnetic_acceleration(M, 0, q, v);
  Tensor3 G = christoffel(M, 0, q);
  VecXd want = VecXd::Zero(2);
  for (int k = 0; k < 2; ++k) want[k] = -v.dot(G[k] * v);
  CHECK((a - want).norm() < 1e-12);
}

TEST_CASE("flat torus orbit closes exactly after 2*pi") {
  ChartManifold F = make_manifold("flat-torus");
  VecXd q0(2);
  q0 << 0.3, 1.1;
  TangentState s0 = make_state(F, 0, q0, VecXd::Unit(2, 1), 0.7);
  Trajectory tr = integrate(F, s0, kTwoPi, 1e-12);
  TangentState end = tr.state_at_sample(static_cast<int>(tr.samples.size()) - 1);
  CHECK((end.q - s0.q).norm() < 1e-9);
  CHECK((end.v - s0.v).norm() < 1e-9);
  CHECK(tr.stats.max_energy_drift < 1e-10);
  for (size_t i = 1; i < tr.samples.size(); ++i)
    CHECK(tr.samples[i].t > tr.samples[i - 1].t);
}

TEST_CASE("sphere flow follows the closed-form ambient circle") {
  double eps = 0.3;
  ChartManifold S = make_manifold("sphere");
  SphereAtlas atlas = sphere_atlas(S);
  AmbientCircle circle = sphere_circle(eps);

  int matches = 0;
  for (double sgn : {1.0, -1.0}) {
    auto cs = atlas.to_chart(circle.pos(0, sgn), circle.vel(0, sgn));
    TangentState s0 = make_state(S, cs.chart_id, cs.q, cs.v, eps);
    double T = kTwoPi / circle.omega;
    double worst = 0;
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
      TangentState st = flow(S, s0, 0.0, frac * T);
      Eigen::Vector3d p, V;
      atlas.to_ambient(st.chart_id, st.q, st.v, p, V);
      worst = std::max(worst, (p - circle.pos(frac * T, sgn)).norm());
      worst = std::max(worst, (V - circle.vel(frac * T, sgn)).norm());
    }
    if (worst < 1e-9) ++matches;
  }
  // exactly one traversal sense solves the magnetic equation
  CHECK(matches == 1);
}

TEST_CASE("energy drift stays below 1e-8 over 100 periods") {
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    TangentState s0 = sample_unit_states(M, 0.1, 1, 4242)[0];
    FlowOptions opt;
    TangentState s = s0;
    IntegratorStats st = flow_observed(
        M, s, 0.0, 100 * kTwoPi, opt,
        [](double, int, const VecXd&, const VecXd&) {});
    CHECK(st.max_energy_drift < 1e-8);
  }
}

TEST_CASE("forward-backward reversal") {
  for (const auto& name : builtin_manifold_names()) {
    CAPTURE(name);
    ChartManifold M = make_manifold(name);
    TangentState s0 = sample_unit_states(M, 0.2, 1, 99)[0];
    TangentState mid = flow(M, s0, 0.0, 12.5);
    TangentState back = flow(M, mid, 12.5, 0.0);
    CHECK(back.chart_id == s0.chart_id);
    CHECK((back.q - s0.q).norm() < 1e-8);
    CHECK((back.v - s0.v).norm() < 1e-8);
  }
}

TEST_CASE("chart transitions are transparent to the period estimate") {
  double eps = 0.5;
  AmbientCircle circle = sphere_circle(eps);
  double T_pred = kTwoPi / circle.omega;

  double period[2];
  int transitions[2];
  int k = 0;
  for (double pole_x : {0.0, 1.0}) {
    ChartManifold S = make_manifold("sphere", {{"pole_x", pole_x}});
    SphereAtlas atlas = sphere_atlas(S);
    // pick the traversal sense that solves the equation (matches the flow)
    TangentState s0;
    double err_best = 1e300;
    for (double sgn : {1.0, -1.0}) {
      auto cs = atlas.to_chart(circle.pos(0, sgn), circle.vel(0, sgn));
      TangentState cand = make_state(S, cs.chart_id, cs.q, cs.v, eps);
      TangentState st = flow(S, cand, 0.0, T_pred);
      double d = phase_distance(S, cand, st);
      if (d < err_best) {
        err_best = d;
        s0 = cand;
      }
    }
    ClosureOptions opt;
    opt.T_guess = T_pred;
    ClosureResult res = detect_period(S, s0, opt);
    CHECK(res.closed);
    Trajectory tr = integrate(S, s0, 1.5 * T_pred);
    period[k] = res.period;
    transitions[k] = tr.stats.transitions;
    ++k;
  }
  CHECK(transitions[0] >= 1);  // equator orbit hops charts in the z-atlas
  CHECK(transitions[1] == 0);  // and stays mid-chart in the x-atlas
  CHECK(std::abs(period[0] - period[1]) < 1e-8);
}

TEST_CASE("trajectory leaving a chart without neighbors raises") {
  ChartManifold H = make_manifold("hyperbolic");
  // shrink the domain so the orbit must leave it
  H.charts[0].lo = VecXd::Constant(2, -0.05);
  H.charts[0].hi = VecXd::Constant(2, 0.05);
  TangentState s0 = make_state(H, 0, VecXd::Zero(2), VecXd::Unit(2, 0), 0.9);
  CHECK_THROWS_AS(flow(H, s0, 0.0, 3.0), IntegrationError);
}
