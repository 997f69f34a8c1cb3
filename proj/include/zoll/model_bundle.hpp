#pragma once

// Trivial-bundle model system over the flat 2-torus: base form sigma =
// dq1^dq2, fiber form rho = dv1^dv2, Hamiltonian H = a(q)|v|^2/2 with
// i_X omega = -dH. The fast motion is fiber rotation at rate a(q); the base
// point drifts slowly.

#include <functional>
#include <utility>

#include "zoll/rk78.hpp"
#include "zoll/types.hpp"

namespace zoll {

struct ModelBundleSystem {
  std::function<double(const VecXd&)> a;
  std::function<VecXd(const VecXd&)> da;  // gradient of a
};

inline ModelBundleSystem make_sine_bundle(double amp) {
  ModelBundleSystem s;
  s.a = [amp](const VecXd& q) { return 1.0 + amp * std::sin(q[0]); };
  s.da = [amp](const VecXd& q) -> VecXd {
    VecXd d(2);
    d << amp * std::cos(q[0]), 0.0;
    return d;
  };
  return s;
}

/// Hamiltonian vector field: vdot = a(q) J v and i_qdot sigma = -(|v|^2/2) da.
inline std::pair<VecXd, VecXd> model_bundle_vector_field(
    const ModelBundleSystem& S, const VecXd& q, const VecXd& v) {
  double av = S.a(q);
  VecXd da = S.da(q);
  double half_v2 = 0.5 * v.squaredNorm();
  VecXd qdot(2), vdot(2);
  qdot << -half_v2 * da[1], half_v2 * da[0];
  vdot << -av * v[1], av * v[0];
  return {qdot, vdot};
}

inline VecXd model_bundle_rhs(const ModelBundleSystem& S, const VecXd& y) {
  auto [qd, vd] = model_bundle_vector_field(S, y.head(2), y.tail(2));
  VecXd f(4);
  f << qd, vd;
  return f;
}

/// Base velocity averaged over the fast fiber rotation at frozen q and
/// energy H (quadrature over the circle a(q)|v|^2 = 2H). Independent oracle
/// for the slow drift: direction and magnitude both come out of this average.
inline VecXd averaged_base_field(const ModelBundleSystem& S, const VecXd& q,
                                 double H, int n_angles = 256) {
  double r = std::sqrt(2.0 * H / S.a(q));
  VecXd mean = VecXd::Zero(2);
  for (int k = 0; k < n_angles; ++k) {
    double th = kTwoPi * (k + 0.5) / n_angles;
    VecXd v(2);
    v << r * std::cos(th), r * std::sin(th);
    mean += model_bundle_vector_field(S, q, v).first;
  }
  return mean / n_angles;
}

}  // namespace zoll
