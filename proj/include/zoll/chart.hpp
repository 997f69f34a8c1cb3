#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zoll/types.hpp"

namespace zoll {

/// A coordinate chart: an axis-aligned domain box plus transition maps to
/// neighboring charts (each with its Jacobian), valid on the overlaps.
struct Chart {
  int id = 0;
  int dim = 0;
  VecXd lo, hi;  // domain box

  struct Transition {
    int neighbor = -1;
    std::function<VecXd(const VecXd&)> map;
    std::function<MatXd(const VecXd&)> jacobian;
  };
  std::vector<Transition> transitions;

  bool contains(const VecXd& q, double margin = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (q[i] < lo[i] + margin || q[i] > hi[i] - margin) return false;
    return true;
  }

  /// Distance from q to the domain boundary (L-inf sense, negative outside).
  double boundary_distance(const VecXd& q) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i)
      d = std::min(d, std::min(q[i] - lo[i], hi[i] - q[i]));
    return d;
  }

  /// Shortest finite box half-extent, used to scale transition triggers.
  double extent() const {
    double e = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i)
      if (std::isfinite(lo[i]) && std::isfinite(hi[i]))
        e = std::min(e, 0.5 * (hi[i] - lo[i]));
    return e;
  }
};

/// A manifold described by charts, with the metric, magnetic 2-form and
/// (optionally) an almost complex structure evaluated pointwise per chart.
/// All fields in chart coordinates with index convention M(i,j) = T(e_i,e_j).
struct ChartManifold {
  std::string name;
  int dim = 0;
  std::vector<Chart> charts;
  std::map<std::string, double> params;

  using MatrixField = std::function<MatXd(int, const VecXd&)>;
  using Tensor3Field = std::function<Tensor3(int, const VecXd&)>;

  MatrixField metric;
  Tensor3Field metric_derivative;  // optional, else finite differences
  MatrixField magnetic;
  Tensor3Field magnetic_derivative;  // optional
  MatrixField acs;                   // optional almost complex structure
  Tensor3Field acs_derivative;       // optional
  bool compatible = false;           // g(J.,J.)=g and beta=g(J.,.)

  std::vector<bool> periodic_axes;  // same convention in every chart
  double period = kTwoPi;

  double fd_step = 1e-5;  // base step for finite-difference derivatives

  const Chart& chart(int id) const {
    for (const auto& c : charts)
      if (c.id == id) return c;
    throw Error(name + ": no chart with id " + std::to_string(id));
  }

  bool has_acs() const { return static_cast<bool>(acs); }

  /// Wrap a coordinate difference along periodic axes into (-period/2, period/2].
  VecXd wrap_delta(VecXd dq) const {
    if (periodic_axes.empty()) return dq;
    for (int i = 0; i < dim; ++i)
      if (periodic_axes[i]) dq[i] -= period * std::round(dq[i] / period);
    return dq;
  }

  /// Chart transition for (q, v): returns (neighbor id, q', dT(q) v).
  struct Moved {
    int chart_id;
    VecXd q;
    VecXd v;
  };
  std::optional<Moved> transition(int chart_id, const VecXd& q,
                                  const VecXd& v) const {
    const Chart& c = chart(chart_id);
    for (const auto& tr : c.transitions) {
      VecXd q2 = tr.map(q);
      if (chart(tr.neighbor).contains(q2)) {
        return Moved{tr.neighbor, std::move(q2), tr.jacobian(q) * v};
      }
    }
    return std::nullopt;
  }
};

}  // namespace zoll
