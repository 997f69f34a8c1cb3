#include "zoll/manifold_zoo.hpp"

#include <cmath>
#include <functional>
#include <set>

namespace zoll {

namespace {

MatXd rot90() {
  MatXd j(2, 2);
  j << 0, -1, 1, 0;
  return j;
}

MatXd omega2() {  // matrix of dq1 ^ dq2
  MatXd w(2, 2);
  w << 0, 1, -1, 0;
  return w;
}

Chart box_chart(int id, int dim, double half) {
  Chart c;
  c.id = id;
  c.dim = dim;
  c.lo = VecXd::Constant(dim, -half);
  c.hi = VecXd::Constant(dim, half);
  return c;
}

void check_params(const std::string& name, const ParamMap& params,
                  const std::set<std::string>& allowed) {
  for (const auto& [k, v] : params)
    if (!allowed.count(k))
      throw ConfigError(name + ": unknown parameter '" + k + "'");
}

double get(const ParamMap& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

// Surface with g = s(q) I, beta = s(q) dq1^dq2 (so B = J = standard rotation,
// a Kaehler surface). ds must return the gradient of s.
ChartManifold conformal_surface(std::string name,
                                std::function<double(int, const VecXd&)> s,
                                std::function<VecXd(int, const VecXd&)> ds) {
  ChartManifold M;
  M.name = std::move(name);
  M.dim = 2;
  M.compatible = true;
  M.metric = [s](int c, const VecXd& q) -> MatXd {
    return s(c, q) * MatXd::Identity(2, 2);
  };
  M.metric_derivative = [ds](int c, const VecXd& q) {
    VecXd d = ds(c, q);
    Tensor3 t(2, 2, 2);
    t[0] = d[0] * MatXd::Identity(2, 2);
    t[1] = d[1] * MatXd::Identity(2, 2);
    return t;
  };
  M.magnetic = [s](int c, const VecXd& q) -> MatXd { return s(c, q) * omega2(); };
  M.acs = [](int, const VecXd&) { return rot90(); };
  M.acs_derivative = [](int, const VecXd&) { return Tensor3(2, 2, 2); };
  return M;
}

void add_sphere_transitions(ChartManifold& M) {
  auto inv = [](const VecXd& u) -> VecXd {
    double r2 = u.squaredNorm();
    VecXd o(2);
    o << u[0] / r2, -u[1] / r2;
    return o;
  };
  auto inv_jac = [](const VecXd& u) -> MatXd {
    double r2 = u.squaredNorm(), r4 = r2 * r2;
    MatXd j(2, 2);
    j << (r2 - 2 * u[0] * u[0]) / r4, -2 * u[0] * u[1] / r4,
        2 * u[0] * u[1] / r4, (2 * u[1] * u[1] - r2) / r4;
    return j;
  };
  M.charts[0].transitions.push_back({1, inv, inv_jac});
  M.charts[1].transitions.push_back({0, inv, inv_jac});
}

ChartManifold make_flat_torus(const ParamMap& params) {
  check_params("flat-torus", params, {"dim"});
  int dim = static_cast<int>(get(params, "dim", 2));
  if (dim != 2 && dim != 4)
    throw ConfigError("flat-torus: dim must be 2 or 4");
  ChartManifold M;
  M.name = "flat-torus";
  M.dim = dim;
  M.compatible = true;
  M.charts = {box_chart(0, dim, 1e15)};
  M.periodic_axes.assign(dim, true);
  M.period = kTwoPi;
  MatXd beta = MatXd::Zero(dim, dim);
  for (int b = 0; b < dim; b += 2) beta.block(b, b, 2, 2) = omega2();
  MatXd J = -beta;
  M.metric = [dim](int, const VecXd&) -> MatXd { return MatXd::Identity(dim, dim); };
  M.metric_derivative = [dim](int, const VecXd&) { return Tensor3(dim, dim, dim); };
  M.magnetic = [beta](int, const VecXd&) { return beta; };
  M.acs = [J](int, const VecXd&) { return J; };
  M.acs_derivative = [dim](int, const VecXd&) { return Tensor3(dim, dim, dim); };
  return M;
}

ChartManifold make_sphere(const ParamMap& params) {
  check_params("sphere", params, {"pole_x"});
  auto s = [](int, const VecXd& q) {
    double r2 = q.squaredNorm();
    return 4.0 / ((1.0 + r2) * (1.0 + r2));
  };
  auto ds = [](int, const VecXd& q) -> VecXd {
    double w = 1.0 + q.squaredNorm();
    return (-16.0 / (w * w * w)) * q;
  };
  ChartManifold M = conformal_surface("sphere", s, ds);
  M.charts = {box_chart(0, 2, 1.6), box_chart(1, 2, 1.6)};
  add_sphere_transitions(M);
  M.params["pole_x"] = get(params, "pole_x", 0);
  return M;
}

ChartManifold make_hyperbolic(const ParamMap& params) {
  check_params("hyperbolic", params, {});
  auto s = [](int, const VecXd& q) {
    double w = 1.0 - q.squaredNorm();
    return 4.0 / (w * w);
  };
  auto ds = [](int, const VecXd& q) -> VecXd {
    double w = 1.0 - q.squaredNorm();
    return (16.0 / (w * w * w)) * q;
  };
  ChartManifold M = conformal_surface("hyperbolic", s, ds);
  M.charts = {box_chart(0, 2, 0.7)};
  return M;
}

ChartManifold make_conformal_torus(const ParamMap& params) {
  check_params("conformal-torus", params, {"c"});
  double c = get(params, "c", 0.1);
  auto s = [c](int, const VecXd& q) {
    return std::exp(2.0 * c * std::sin(q[0]) * std::sin(q[1]));
  };
  auto ds = [c, s](int cid, const VecXd& q) -> VecXd {
    VecXd d(2);
    d << c * std::cos(q[0]) * std::sin(q[1]),
        c * std::sin(q[0]) * std::cos(q[1]);
    return 2.0 * s(cid, q) * d;
  };
  ChartManifold M = conformal_surface("conformal-torus", s, ds);
  M.charts = {box_chart(0, 2, 1e15)};
  M.periodic_axes = {true, true};
  M.period = kTwoPi;
  M.params["c"] = c;
  return M;
}

ChartManifold make_perturbed_sphere(const ParamMap& params) {
  check_params("perturbed-sphere", params, {"c", "pole_x"});
  double c = get(params, "c", 0.15);
  // Z is the third ambient coordinate; chart 1 sees it with opposite sign.
  auto s = [c](int cid, const VecXd& q) {
    double r2 = q.squaredNorm();
    double z = (r2 - 1.0) / (r2 + 1.0);
    if (cid == 1) z = -z;
    double w = 1.0 + r2;
    return std::exp(2.0 * c * z) * 4.0 / (w * w);
  };
  auto ds = [c, s](int cid, const VecXd& q) -> VecXd {
    double r2 = q.squaredNorm(), w = 1.0 + r2;
    double zsign = (cid == 1) ? -1.0 : 1.0;
    // d/d(r2) of log s
    double dlog = zsign * 4.0 * c / (w * w) - 2.0 / w;
    return s(cid, q) * dlog * 2.0 * q;
  };
  ChartManifold M = conformal_surface("perturbed-sphere", s, ds);
  M.charts = {box_chart(0, 2, 1.6), box_chart(1, 2, 1.6)};
  add_sphere_transitions(M);
  M.params["c"] = c;
  M.params["pole_x"] = get(params, "pole_x", 0);
  return M;
}

// Nilmanifold frame e1 = dx, e2 = dy + x dz, e3 = dz, e4 = dw with
// [e1,e2] = e3; g frame-orthonormal, J e1 = e3, J e2 = e4,
// beta = e^1^e^3 + e^2^e^4 = dx^dz - x dx^dy + dy^dw.
ChartManifold make_kodaira_thurston(const ParamMap& params) {
  check_params("kodaira-thurston", params, {});
  ChartManifold M;
  M.name = "kodaira-thurston";
  M.dim = 4;
  M.compatible = true;
  M.charts = {box_chart(0, 4, 50.0)};
  M.metric = [](int, const VecXd& q) -> MatXd {
    double x = q[0];
    MatXd g = MatXd::Identity(4, 4);
    g(1, 1) = 1.0 + x * x;
    g(1, 2) = g(2, 1) = -x;
    return g;
  };
  M.metric_derivative = [](int, const VecXd& q) {
    double x = q[0];
    Tensor3 t(4, 4, 4);
    t[0](1, 1) = 2.0 * x;
    t[0](1, 2) = t[0](2, 1) = -1.0;
    return t;
  };
  M.magnetic = [](int, const VecXd& q) -> MatXd {
    double x = q[0];
    MatXd b = MatXd::Zero(4, 4);
    b(0, 2) = 1.0;
    b(2, 0) = -1.0;
    b(0, 1) = -x;
    b(1, 0) = x;
    b(1, 3) = 1.0;
    b(3, 1) = -1.0;
    return b;
  };
  M.acs = [](int, const VecXd& q) -> MatXd {
    double x = q[0];
    MatXd J = MatXd::Zero(4, 4);
    J(0, 1) = x;
    J(0, 2) = -1.0;
    J(1, 3) = -1.0;
    J(2, 0) = 1.0;
    J(2, 3) = -x;
    J(3, 1) = 1.0;
    return J;
  };
  M.acs_derivative = [](int, const VecXd&) {
    Tensor3 t(4, 4, 4);
    t[0](0, 1) = 1.0;
    t[0](2, 3) = -1.0;
    return t;
  };
  return M;
}

}  // namespace

ChartManifold make_manifold(const std::string& name, const ParamMap& params) {
  ChartManifold M;
  if (name == "flat-torus")
    M = make_flat_torus(params);
  else if (name == "sphere")
    M = make_sphere(params);
  else if (name == "hyperbolic")
    M = make_hyperbolic(params);
  else if (name == "conformal-torus")
    M = make_conformal_torus(params);
  else if (name == "perturbed-sphere")
    M = make_perturbed_sphere(params);
  else if (name == "kodaira-thurston")
    M = make_kodaira_thurston(params);
  else
    throw ConfigError("unknown manifold '" + name + "'");
  return M;
}

std::vector<std::string> builtin_manifold_names() {
  return {"flat-torus",      "sphere",           "hyperbolic",
          "conformal-torus", "perturbed-sphere", "kodaira-thurston"};
}

SphereAtlas sphere_atlas(const ChartManifold& M) {
  SphereAtlas a;
  auto it = M.params.find("pole_x");
  if (it != M.params.end() && it->second != 0) {
    a.rot << 0, 0, -1, 0, 1, 0, 1, 0, 0;  // maps x-axis to the atlas pole axis
  }
  return a;
}

SphereAtlas::ChartState SphereAtlas::to_chart(const Eigen::Vector3d& p,
                                              const Eigen::Vector3d& V) const {
  Eigen::Vector3d pp = rot * p, vv = rot * V;
  ChartState s;
  s.q = VecXd(2);
  s.v = VecXd(2);
  if (pp.z() <= 0) {  // lower hemisphere -> projection from the north pole
    s.chart_id = 0;
    double w = 1.0 - pp.z();
    s.q << pp.x() / w, pp.y() / w;
    s.v << (vv.x() * w + pp.x() * vv.z()) / (w * w),
        (vv.y() * w + pp.y() * vv.z()) / (w * w);
  } else {
    s.chart_id = 1;
    double w = 1.0 + pp.z();
    s.q << pp.x() / w, -pp.y() / w;
    s.v << (vv.x() * w - pp.x() * vv.z()) / (w * w),
        -(vv.y() * w - pp.y() * vv.z()) / (w * w);
  }
  return s;
}

void SphereAtlas::to_ambient(int chart_id, const VecXd& q, const VecXd& v,
                             Eigen::Vector3d& p, Eigen::Vector3d& V) const {
  double r2 = q.squaredNorm(), w = 1.0 + r2;
  double u1 = q[0], u2 = chart_id == 0 ? q[1] : -q[1];
  double v1 = v[0], v2 = chart_id == 0 ? v[1] : -v[1];
  double zsign = chart_id == 0 ? 1.0 : -1.0;
  Eigen::Vector3d pp(2 * u1 / w, 2 * u2 / w, zsign * (r2 - 1.0) / w);
  double dr2 = 2 * (u1 * v1 + u2 * v2);
  Eigen::Vector3d vv(2 * v1 / w - 2 * u1 * dr2 / (w * w),
                     2 * v2 / w - 2 * u2 * dr2 / (w * w),
                     zsign * (dr2 * w - (r2 - 1.0) * dr2) / (w * w));
  p = rot.transpose() * pp;
  V = rot.transpose() * vv;
}

}  // namespace zoll
