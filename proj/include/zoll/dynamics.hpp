#pragma once

// Magnetic geodesic flow: state types, the vector field, and an adaptive
// integrator that is transparent across chart transitions. Velocities are
// never renormalized; energy drift is tracked and reported instead.

#include <cstdint>
#include <utility>
#include <vector>

#include "zoll/chart.hpp"
#include "zoll/geometry.hpp"
#include "zoll/rk78.hpp"

namespace zoll {

struct TangentState {
  int chart_id = 0;
  VecXd q, v;
  double energy = 0;  // |v|_g at construction
};

/// Build a state with the direction of `dir` rescaled so that |v|_g = eps.
inline TangentState make_state(const ChartManifold& M, int chart_id,
                               const VecXd& q, const VecXd& dir, double eps) {
  if (eps <= 0) throw NormalizationError(M.name + ": energy must be positive");
  MatXd g = M.metric(chart_id, q);
  double n = g_norm(g, dir);
  if (n == 0) throw NormalizationError(M.name + ": zero direction");
  TangentState s;
  s.chart_id = chart_id;
  s.q = q;
  s.v = (eps / n) * dir;
  s.energy = eps;
  return s;
}

inline double speed(const ChartManifold& M, const TangentState& s) {
  return g_norm(M.metric(s.chart_id, s.q), s.v);
}

/// Acceleration of the magnetic geodesic equation:
/// a^k = -Gamma^k_{ij} v^i v^j + (Bv)^k, assembled with one metric solve.
inline VecXd magnetic_acceleration(const ChartManifold& M, int cid,
                                   const VecXd& q, const VecXd& v) {
  const int n = M.dim;
  MatXd g = M.metric(cid, q);
  Tensor3 dg = metric_derivative(M, cid, q);
  VecXd w(n);
  for (int l = 0; l < n; ++l) {
    double acc = 0;
    const MatXd& dl = dg[l];
    for (int i = 0; i < n; ++i) {
      acc += v[i] * dg[i].row(l).dot(v);
      acc -= 0.5 * v[i] * dl.row(i).dot(v);
    }
    w[l] = acc;
  }
  w += M.magnetic(cid, q) * v;
  Eigen::LLT<MatXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw DegenerateMetricError(M.name + ": metric not positive definite");
  return -llt.solve(w);
}

/// (qdot, vdot) of the flow at a state.
inline std::pair<VecXd, VecXd> magnetic_vector_field(const ChartManifold& M,
                                                     const TangentState& s) {
  return {s.v, magnetic_acceleration(M, s.chart_id, s.q, s.v)};
}

struct IntegratorStats {
  std::int64_t steps = 0;
  std::int64_t rejected = 0;
  int transitions = 0;
  double max_energy_drift = 0;  // max |(|v|_g - eps)| / eps over the run
};

struct TrajectorySample {
  double t;
  int chart_id;
  VecXd y;     // (q, v) stacked
  VecXd dydt;  // flow derivative at y
};

struct Trajectory {
  double eps = 0;
  std::vector<TrajectorySample> samples;
  IntegratorStats stats;

  TangentState state_at_sample(int i) const {
    const TrajectorySample& s = samples[i];
    int n = static_cast<int>(s.y.size()) / 2;
    return TangentState{s.chart_id, s.y.head(n), s.y.tail(n), eps};
  }
};

struct FlowOptions {
  double tol = 1e-12;
  double transition_margin_frac = 0.1;  // of the chart extent
  std::int64_t max_steps = 400000000;
};

/// Integrate from time t0 to t1 (either direction), invoking
/// sink(t, chart_id, y, dydt) at t0, after every accepted step, and after
/// every chart transition. Returns stats; `state` is advanced in place.
template <class Sink>
IntegratorStats flow_observed(const ChartManifold& M, TangentState& state,
                              double t0, double t1, const FlowOptions& opt,
                              Sink&& sink) {
  const int n = M.dim;
  StepControl<double> ctl;
  ctl.rtol = ctl.atol = opt.tol;
  ctl.max_steps = opt.max_steps;
  Rk78Driver<double> drv(ctl);

  int cid = state.chart_id;
  auto rhs = [&M, &cid, n](double, const VecXd& y) -> VecXd {
    VecXd f(2 * n);
    f.head(n) = y.tail(n);
    f.tail(n) = magnetic_acceleration(M, cid, y.head(n), y.tail(n));
    return f;
  };

  VecXd y(2 * n);
  y << state.q, state.v;
  drv.start(rhs, t0, y, t1);

  IntegratorStats st;
  const double eps = state.energy;
  auto note_energy = [&] {
    double e = g_norm(M.metric(cid, drv.y().head(n)), drv.y().tail(n));
    st.max_energy_drift = std::max(st.max_energy_drift,
                                   std::abs(e - eps) / eps);
  };

  sink(drv.t(), cid, drv.y(), drv.dydt());
  bool more = t0 != t1;
  while (more) {
    more = drv.step(rhs, t1);
    note_energy();
    sink(drv.t(), cid, drv.y(), drv.dydt());

    const Chart& c = M.chart(cid);
    double margin = opt.transition_margin_frac * c.extent();
    double dist = c.boundary_distance(drv.y().head(n));
    if (std::isfinite(margin) && dist < margin && !c.transitions.empty()) {
      auto moved = M.transition(cid, drv.y().head(n), drv.y().tail(n));
      if (!moved && dist < 0)
        throw IntegrationError(M.name + ": no chart covers the trajectory");
      if (moved) {
        double dist_new =
            M.chart(moved->chart_id).boundary_distance(moved->q);
        if (dist_new > 1.5 * margin) {  // hysteresis: only clearly better
          cid = moved->chart_id;
          VecXd y2(2 * n);
          y2 << moved->q, moved->v;
          drv.set_state(rhs, y2);
          ++st.transitions;
          sink(drv.t(), cid, drv.y(), drv.dydt());
        }
      }
    } else if (dist < 0 && c.transitions.empty() && std::isfinite(margin)) {
      throw IntegrationError(M.name + ": trajectory left the chart domain");
    }
  }
  st.steps = drv.steps();
  st.rejected = drv.rejected();
  state.chart_id = cid;
  state.q = drv.y().head(n);
  state.v = drv.y().tail(n);
  return st;
}

/// Endpoint-only integration.
inline TangentState flow(const ChartManifold& M, TangentState state, double t0,
                         double t1, const FlowOptions& opt = {}) {
  flow_observed(M, state, t0, t1, opt,
                [](double, int, const VecXd&, const VecXd&) {});
  return state;
}

/// Full trajectory with per-step samples.
inline Trajectory integrate(const ChartManifold& M, const TangentState& s0,
                            double t_end, double tol = 1e-12) {
  Trajectory tr;
  tr.eps = s0.energy;
  TangentState s = s0;
  FlowOptions opt;
  opt.tol = tol;
  tr.stats = flow_observed(
      M, s, 0.0, t_end, opt,
      [&tr](double t, int cid, const VecXd& y, const VecXd& f) {
        // a chart transition re-reports the same instant: supersede in place
        // so sample times stay strictly increasing
        if (!tr.samples.empty() && tr.samples.back().t == t) {
          tr.samples.back() = {t, cid, y, f};
          return;
        }
        tr.samples.push_back({t, cid, y, f});
      });
  return tr;
}

}  // namespace zoll
