#pragma once

// Orbit closure detection, minimal-period estimation and Zoll-defect
// aggregation across a seeded sample of the unit sphere bundle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "zoll/dynamics.hpp"

namespace zoll {

/// Derivative-free Brent minimization on [a,b]; f must have an interior
/// minimum. Returns (argmin, min, iterations).
struct BrentResult {
  double x, fx;
  int iterations;
};
inline BrentResult brent_minimize(const std::function<double(double)>& f,
                                  double a, double b, double xtol,
                                  int max_iter = 200) {
  const double gr = 0.3819660112501051;  // 2 - golden ratio
  double x = a + gr * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0, e = 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    double m = 0.5 * (a + b);
    double tol1 = xtol + 1e-15 * std::abs(x), tol2 = 2 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0, q = 0, r = 0;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2 * (q - r);
      if (q > 0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) &&
          p < q * (b - x)) {
        e = d;
        d = p / q;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gr * e;
    }
    double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx, it};
}

/// Weighted phase-space distance in the chart of `ref`: base and fiber parts
/// combine as |dq|_g^2 + |dv|_g^2 / eps^2 so both contribute comparably at
/// energy eps. Probe states in a neighboring chart are transported first.
inline double phase_distance(const ChartManifold& M, const TangentState& ref,
                             TangentState probe) {
  if (probe.chart_id != ref.chart_id) {
    const Chart& pc = M.chart(probe.chart_id);
    bool mapped = false;
    for (const auto& tr : pc.transitions) {
      if (tr.neighbor == ref.chart_id) {
        VecXd q_old = probe.q;
        probe.q = tr.map(q_old);
        probe.v = tr.jacobian(q_old) * probe.v;
        mapped = true;
        break;
      }
    }
    if (!mapped) return std::numeric_limits<double>::infinity();
  }
  MatXd g = M.metric(ref.chart_id, ref.q);
  VecXd dq = M.wrap_delta(ref.q - probe.q);
  VecXd dv = ref.v - probe.v;
  double eps = ref.energy;
  return std::sqrt(dq.dot(g * dq) + dv.dot(g * dv) / (eps * eps));
}

/// State at an arbitrary time along a stored trajectory, re-integrated from
/// the nearest earlier sample so accuracy matches the original tolerance.
inline TangentState state_at(const ChartManifold& M, const Trajectory& tr,
                             double t, double tol = 1e-12) {
  const auto& ss = tr.samples;
  auto it = std::upper_bound(ss.begin(), ss.end(), t,
                             [](double a, const TrajectorySample& s) {
                               return a < s.t;
                             });
  int i = std::max<int>(0, static_cast<int>(it - ss.begin()) - 1);
  TangentState s = tr.state_at_sample(i);
  if (ss[i].t == t) return s;
  FlowOptions opt;
  opt.tol = tol;
  return flow(M, s, ss[i].t, t, opt);
}

struct ClosureOptions {
  double T_guess = kTwoPi;
  double window_lo = 0;  // 0 -> 0.5 * T_guess
  double window_hi = 0;  // 0 -> 1.5 * T_guess
  double refine_tol = 1e-11;      // absolute tolerance on the period
  double integrator_tol = 1e-12;
  double reject = 0.1;  // defect above this is "no closure"
};

struct ClosureResult {
  bool closed = false;
  double period = 0;
  double defect = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Locate the minimal quasi-period: global minimum of the weighted return
/// distance over the window on the step grid, then Brent refinement.
inline ClosureResult detect_period(const ChartManifold& M,
                                   const TangentState& s0,
                                   const ClosureOptions& opt = {}) {
  if (opt.T_guess <= 0) throw Error("detect_period: T_guess must be positive");
  double lo = opt.window_lo > 0 ? opt.window_lo : 0.5 * opt.T_guess;
  double hi = opt.window_hi > 0 ? opt.window_hi : 1.5 * opt.T_guess;
  Trajectory tr = integrate(M, s0, hi, opt.integrator_tol);

  double best_t = 0, best_d = std::numeric_limits<double>::infinity();
  int best_i = -1;
  const auto& ss = tr.samples;
  for (int i = 0; i < static_cast<int>(ss.size()); ++i) {
    if (ss[i].t < lo || ss[i].t > hi) continue;
    double d = phase_distance(M, s0, tr.state_at_sample(i));
    if (d < best_d) {
      best_d = d;
      best_t = ss[i].t;
      best_i = i;
    }
  }
  ClosureResult res;
  if (best_i < 0) return res;

  double a = best_i > 0 ? std::max(lo, ss[best_i - 1].t) : lo;
  double b = best_i + 1 < static_cast<int>(ss.size())
                 ? std::min(hi, ss[best_i + 1].t)
                 : hi;
  if (a >= b || best_t <= a || best_t >= b) {
    // minimum sits on the window edge: no interior closure
    res.period = best_t;
    res.defect = best_d;
    res.closed = false;
    return res;
  }
  auto dist = [&](double t) {
    return phase_distance(M, s0, state_at(M, tr, t, opt.integrator_tol));
  };
  BrentResult br = brent_minimize(
      [&](double t) { return 0.5 * dist(t) * dist(t); }, a, b, opt.refine_tol);
  res.period = br.x;
  res.defect = dist(br.x);
  res.iterations = br.iterations;
  res.closed = res.defect <= opt.reject;
  return res;
}

struct PeriodRow {
  int orbit = 0;
  TangentState s0;
  ClosureResult res;
};

struct PeriodReport {
  double eps = 0;
  std::vector<PeriodRow> rows;
  double T_min = 0, T_max = 0;
  double zoll_defect = 0;  // T_max - T_min (window width if any orbit is open)
  double max_closure_defect = 0;
  bool all_closed = true;
};

/// Closure statistics over a seeded low-discrepancy orbit sample. Any orbit
/// without a closure marks the report non-Zoll with the defect set to the
/// window width.
PeriodReport zoll_defect_report(const ChartManifold& M, double eps,
                                int n_orbits, std::uint64_t seed,
                                const ClosureOptions& opt = {});

struct PeriodLawRow {
  double eps = 0;
  double T_measured = 0;
  double T_predicted = 0;
  double rel_err = 0;
  double closure_defect = 0;
};

/// Measured vs predicted periods T = 2*pi / sqrt(1 + kappa eps^2) on the
/// built-in space form of curvature kappa.
std::vector<PeriodLawRow> period_law_scan(const ChartManifold& M, double kappa,
                                          const std::vector<double>& eps_list,
                                          double integrator_tol = 1e-12);

/// Aggregate closure statistics over per-orbit rows.
inline PeriodReport aggregate_periods(double eps, std::vector<PeriodRow> rows,
                                      double window_width) {
  PeriodReport rep;
  rep.eps = eps;
  rep.rows = std::move(rows);
  rep.T_min = std::numeric_limits<double>::infinity();
  rep.T_max = 0;
  for (const auto& r : rep.rows) {
    rep.all_closed = rep.all_closed && r.res.closed;
    rep.max_closure_defect = std::max(rep.max_closure_defect, r.res.defect);
    if (r.res.closed) {
      rep.T_min = std::min(rep.T_min, r.res.period);
      rep.T_max = std::max(rep.T_max, r.res.period);
    }
  }
  rep.zoll_defect = rep.all_closed && !rep.rows.empty()
                        ? rep.T_max - rep.T_min
                        : window_width;
  return rep;
}

}  // namespace zoll
