#include "zoll/seeding.hpp"

#include <cmath>

#include "zoll/sampling.hpp"

namespace zoll {

namespace {

VecXd direction_from_angle(double theta) {
  VecXd d(2);
  d << std::cos(theta), std::sin(theta);
  return d;
}

VecXd gaussian_direction(const Halton& h, std::uint64_t idx, int dim,
                         int first_axis) {
  VecXd d(dim);
  for (int i = 0; i < dim; i += 2) {
    double n1, n2;
    box_muller(h.coordinate(idx, first_axis + i),
               h.coordinate(idx, first_axis + i + 1), n1, n2);
    d[i] = n1;
    if (i + 1 < dim) d[i + 1] = n2;
  }
  if (d.norm() < 1e-8) d = VecXd::Unit(dim, 0);
  return d;
}

}  // namespace

std::vector<TangentState> sample_unit_states(const ChartManifold& M,
                                             double eps, int count,
                                             std::uint64_t seed) {
  Halton h(seed);
  std::vector<TangentState> states;
  states.reserve(count);
  const std::string& n = M.name;
  for (int k = 0; k < count; ++k) {
    std::uint64_t idx = k;
    if (n == "flat-torus" || n == "conformal-torus") {
      VecXd q(M.dim);
      for (int i = 0; i < M.dim; ++i) q[i] = kTwoPi * h.coordinate(idx, i);
      VecXd dir = M.dim == 2
                      ? direction_from_angle(kTwoPi * h.coordinate(idx, M.dim))
                      : gaussian_direction(h, idx, M.dim, M.dim);
      states.push_back(make_state(M, 0, q, dir, eps));
    } else if (n == "sphere" || n == "perturbed-sphere") {
      double z = -0.95 + 1.9 * h.coordinate(idx, 0);
      double phi = kTwoPi * h.coordinate(idx, 1);
      double alpha = kTwoPi * h.coordinate(idx, 2);
      double r = std::sqrt(1.0 - z * z);
      Eigen::Vector3d p(r * std::cos(phi), r * std::sin(phi), z);
      Eigen::Vector3d t1 = Eigen::Vector3d::UnitZ().cross(p).normalized();
      Eigen::Vector3d t2 = p.cross(t1);
      Eigen::Vector3d V = std::cos(alpha) * t1 + std::sin(alpha) * t2;
      auto cs = sphere_atlas(M).to_chart(p, V);
      states.push_back(make_state(M, cs.chart_id, cs.q, cs.v, eps));
    } else if (n == "hyperbolic") {
      double r = 0.15 * std::sqrt(h.coordinate(idx, 0));
      double phi = kTwoPi * h.coordinate(idx, 1);
      VecXd q(2);
      q << r * std::cos(phi), r * std::sin(phi);
      VecXd dir = direction_from_angle(kTwoPi * h.coordinate(idx, 2));
      states.push_back(make_state(M, 0, q, dir, eps));
    } else if (n == "kodaira-thurston") {
      VecXd q(4);
      for (int i = 0; i < 4; ++i) q[i] = -1.0 + 2.0 * h.coordinate(idx, i);
      states.push_back(
          make_state(M, 0, q, gaussian_direction(h, idx, 4, 4), eps));
    } else {
      throw ConfigError("sample_unit_states: no sampler for '" + n + "'");
    }
  }
  return states;
}

double space_form_kappa(const ChartManifold& M) {
  if (M.name == "sphere") return 1.0;
  if (M.name == "flat-torus") return 0.0;
  if (M.name == "hyperbolic") return -1.0;
  throw ConfigError(M.name + " is not a built-in space form");
}

TangentState space_form_state(const ChartManifold& M, double eps) {
  if (M.name == "flat-torus") {
    VecXd q = VecXd::Constant(M.dim, 0.5);
    return make_state(M, 0, q, VecXd::Unit(M.dim, 0), eps);
  }
  if (M.name == "sphere") {
    Eigen::Vector3d p(1, 0, 0), V(0, 1, 0);
    auto cs = sphere_atlas(M).to_chart(p, V);
    return make_state(M, cs.chart_id, cs.q, cs.v, eps);
  }
  if (M.name == "hyperbolic") {
    if (eps >= 1.0)
      throw ConfigError("hyperbolic orbits are closed only for eps < 1");
    // circle of geodesic curvature 1/eps centered at the origin
    double r_eu = std::tanh(0.5 * std::atanh(eps));
    VecXd q(2), dir(2);
    q << r_eu, 0.0;
    dir << 0.0, 1.0;
    return make_state(M, 0, q, dir, eps);
  }
  throw ConfigError(M.name + " is not a built-in space form");
}

}  // namespace zoll
