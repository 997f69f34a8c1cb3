#pragma once

// Built-in magnetic systems. Every entry ships analytic metric (and, where an
// almost complex structure is present, analytic J) derivatives, so curvature
// stencils only differentiate connection coefficients.

#include <map>
#include <string>
#include <vector>

#include "zoll/chart.hpp"

namespace zoll {

using ParamMap = std::map<std::string, double>;

/// Construct a built-in manifold by name. Unknown parameter keys are an error.
///
///   flat-torus        dim (2 or 4, default 2), side 2*pi
///   sphere            pole_x (0/1: atlas poles on the z- or x-axis)
///   hyperbolic        (none) Poincare disk, curvature -1
///   conformal-torus   c (default 0.1): g = e^{2 c sin q1 sin q2} * delta
///   perturbed-sphere  c (default 0.15): conformal factor e^{2 c Z}
///   kodaira-thurston  (none) left-invariant frame, [e1,e2] = e3
ChartManifold make_manifold(const std::string& name, const ParamMap& params = {});

std::vector<std::string> builtin_manifold_names();

/// Ambient <-> chart conversions for the round/perturbed sphere atlases.
struct SphereAtlas {
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();  // ambient -> atlas frame

  struct ChartState {
    int chart_id;
    VecXd q;
    VecXd v;
  };
  /// p on the unit sphere, V tangent at p (ambient coordinates).
  ChartState to_chart(const Eigen::Vector3d& p, const Eigen::Vector3d& V) const;
  void to_ambient(int chart_id, const VecXd& q, const VecXd& v,
                  Eigen::Vector3d& p, Eigen::Vector3d& V) const;
};

SphereAtlas sphere_atlas(const ChartManifold& M);

}  // namespace zoll
