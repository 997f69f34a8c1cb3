#include "zoll/drift.hpp"

#include <cmath>
#include <complex>

namespace zoll {

namespace {

double clamp_windows(double wanted, double lo, double hi) {
  return std::min(hi, std::max(lo, wanted));
}

double g_cosine(const MatXd& g, const VecXd& a, const VecXd& b) {
  double na = g_norm(g, a), nb = g_norm(g, b);
  if (na == 0 || nb == 0) return 0;
  return a.dot(g * b) / (na * nb);
}

/// Time for the fiber vector of the model system to wind once around.
double model_rotation_period(const ModelBundleSystem& S, const VecXd& y0,
                             double tol) {
  StepControl<double> ctl;
  ctl.rtol = ctl.atol = tol;
  Rk78Driver<double> drv(ctl);
  auto rhs = [&S](double, const VecXd& y) { return model_bundle_rhs(S, y); };
  double t_max = 3.0 * kTwoPi / S.a(y0.head(2));
  drv.start(rhs, 0.0, y0, t_max);
  double theta0 = std::atan2(y0[3], y0[2]);
  double prev_t = 0, prev_w = 0, wind = 0, prev_theta = theta0;
  while (drv.step(rhs, t_max)) {
    double th = std::atan2(drv.y()[3], drv.y()[2]);
    double d = th - prev_theta;
    d -= kTwoPi * std::round(d / kTwoPi);
    wind += d;
    prev_theta = th;
    if (std::abs(wind) >= kTwoPi) {
      double s = (kTwoPi - std::abs(prev_w)) / (std::abs(wind) - std::abs(prev_w));
      return prev_t + s * (drv.t() - prev_t);
    }
    prev_t = drv.t();
    prev_w = wind;
  }
  throw IntegrationError("model bundle: fiber did not complete a rotation");
}

ExponentFit fit_report(DriftReport& rep) {
  std::vector<double> eps, mag;
  double csum = 0;
  int nc = 0;
  rep.degenerate = true;
  for (const auto& r : rep.rows) {
    if (r.degenerate) continue;
    rep.degenerate = false;
    eps.push_back(r.eps);
    mag.push_back(r.displacement);
    csum += r.direction_cosine;
    ++nc;
  }
  rep.mean_direction_cosine = nc ? csum / nc : 0.0;
  rep.fit = fit_exponent(eps, mag);
  return rep.fit;
}

}  // namespace

std::vector<VecXd> guiding_center(const ChartManifold& M, const Trajectory& tr,
                                  double period) {
  if (tr.samples.empty()) throw Error("guiding_center: empty trajectory");
  double t0 = tr.samples.front().t, t1 = tr.samples.back().t;
  if (t1 - t0 < 3.0 * period)
    throw Error("guiding_center: trajectory shorter than three periods");
  int cid = tr.samples.front().chart_id;
  WindowAverager wa(t0, period);
  const int n = M.dim;
  for (const auto& s : tr.samples) {
    if (s.chart_id != cid)
      throw Error("guiding_center: trajectory crosses charts");
    wa.add(s.t, s.y.head(n), s.dydt.head(n), s.dydt.tail(n));
  }
  return wa.means();
}

double surface_khat(const ChartManifold& M, int cid, const VecXd& q) {
  if (M.dim != 2) throw Error("surface_khat: needs a surface");
  MatXd g = M.metric(cid, q);
  VecXd v = VecXd::Unit(2, 0) / std::sqrt(g(0, 0));
  return khat(M, cid, q, v).khat;
}

VecXd surface_khat_gradient_covector(const ChartManifold& M, int cid,
                                     const VecXd& q, double h) {
  VecXd d(2);
  for (int l = 0; l < 2; ++l) {
    VecXd qp = q, qm = q;
    qp[l] += h;
    qm[l] -= h;
    d[l] = (surface_khat(M, cid, qp) - surface_khat(M, cid, qm)) / (2 * h);
  }
  return d;
}

DriftReport conformal_drift_experiment(const ModelBundleSystem& S,
                                       const std::vector<double>& eps_list,
                                       double T_slow, double tol) {
  DriftReport rep;
  StepControl<double> ctl;
  ctl.rtol = ctl.atol = tol;
  for (double eps : eps_list) {
    VecXd y0(4);
    y0 << 0.0, 0.0, eps, 0.0;
    double H = 0.5 * S.a(y0.head(2)) * eps * eps;
    DriftRow row;
    row.eps = eps;
    row.period = model_rotation_period(S, y0, tol);
    double n_win =
        clamp_windows(std::round(T_slow / (eps * eps * row.period)), 16, 2e5);
    double t_end = n_win * row.period;

    WindowAverager wa(0.0, row.period);
    VecXd y = y0;
    auto rhs = [&S](double, const VecXd& yy) { return model_bundle_rhs(S, yy); };
    integrate_ode(rhs, 0.0, t_end, y, ctl,
                  [&wa](double t, const VecXd& yy, const VecXd& ff) {
                    wa.add(t, yy.head(2), ff.head(2));
                  });
    DriftLine dl = fit_drift_line(wa.means(), row.period);
    row.center = dl.center;
    row.velocity = dl.velocity;
    row.displacement = dl.velocity.norm() * row.period;
    row.predicted_velocity = averaged_base_field(S, dl.center, H);
    row.degenerate = row.displacement < kDriftFloor;
    if (!row.degenerate) {
      double pn = row.predicted_velocity.norm();
      row.direction_cosine =
          pn > 0 ? dl.velocity.dot(row.predicted_velocity) /
                       (dl.velocity.norm() * pn)
                 : 0.0;
      row.magnitude_ratio = pn > 0 ? dl.velocity.norm() / pn : 0.0;
    }
    rep.rows.push_back(std::move(row));
  }
  fit_report(rep);
  return rep;
}

DriftReport curvature_drift_experiment(const ChartManifold& M,
                                       const std::vector<double>& eps_list,
                                       double T_slow, double tol,
                                       std::optional<VecXd> q0_opt,
                                       int chart_id, std::optional<VecXd> v_dir) {
  if (M.dim != 2)
    throw Error("curvature_drift_experiment: needs a magnetic surface");
  VecXd q0 = q0_opt.value_or([] {
    VecXd q(2);
    q << 1.0, 1.2;
    return q;
  }());
  VecXd dir0 = v_dir.value_or(VecXd::Unit(2, 0));
  DriftReport rep;
  for (double eps : eps_list) {
    TangentState s0 = make_state(M, chart_id, q0, dir0, eps);
    ClosureOptions copt;
    copt.integrator_tol = tol;
    ClosureResult cl = detect_period(M, s0, copt);
    if (!cl.closed)
      throw IntegrationError(
          "curvature drift: no quasi-period found [replay: manifold=" +
          M.name + " eps=" + std::to_string(eps) + " chart=" +
          std::to_string(s0.chart_id) + "]");

    DriftRow row;
    row.eps = eps;
    row.period = cl.period;
    double e4 = eps * eps * eps * eps;
    double n_win =
        clamp_windows(std::round(T_slow / (e4 * row.period)), 24, 4e5);
    double t_end = n_win * row.period;

    WindowAverager wa(0.0, row.period);
    TangentState s = s0;
    FlowOptions fopt;
    fopt.tol = tol;
    const int n = M.dim;
    IntegratorStats st = flow_observed(
        M, s, 0.0, t_end, fopt,
        [&wa, n](double t, int, const VecXd& y, const VecXd& f) {
          wa.add(t, y.head(n), f.head(n), f.tail(n));
        });
    if (st.transitions > 0)
      throw Error(
          "curvature drift: orbit crossed charts; pick an interior start");
    DriftLine dl = fit_drift_line(wa.means(), row.period);
    MatXd g = M.metric(chart_id, dl.center);
    row.center = dl.center;
    row.velocity = dl.velocity;
    row.displacement = g_norm(g, dl.velocity) * row.period;
    row.degenerate = row.displacement < kDriftFloor;

    VecXd dk = surface_khat_gradient_covector(M, chart_id, dl.center);
    VecXd Y = kCurvatureDriftSign / 8.0 *
              beta_hamiltonian(M, chart_id, dl.center, dk);
    row.predicted_velocity = e4 * Y;
    if (!row.degenerate) {
      row.direction_cosine = g_cosine(g, dl.velocity, Y);
      double ynorm = g_norm(g, Y);
      row.magnitude_ratio =
          ynorm > 0 ? g_norm(g, dl.velocity) / (e4 * ynorm) : 0.0;
      VecXd grad = g.llt().solve(dk);
      row.level_line_component = std::abs(g_cosine(g, dl.velocity, grad));
    }
    rep.rows.push_back(std::move(row));
  }
  fit_report(rep);
  return rep;
}

namespace {

/// g0-orthonormal basis (f1, J0 f1, f3, J0 f3) of a 4-dim fiber.
struct ComplexFrame {
  VecXd f1, f2, f3, f4;
  MatXd g;

  std::complex<double> z1(const VecXd& u) const {
    return {u.dot(g * f1), u.dot(g * f2)};
  }
  std::complex<double> z2(const VecXd& u) const {
    return {u.dot(g * f3), u.dot(g * f4)};
  }
  /// Complex line of u as a point on the unit 2-sphere (Hopf map).
  Eigen::Vector3d hopf(const VecXd& u) const {
    std::complex<double> a = z1(u), b = z2(u);
    double n2 = std::norm(a) + std::norm(b);
    std::complex<double> c = std::conj(a) * b;
    return Eigen::Vector3d(2 * c.real() / n2, 2 * c.imag() / n2,
                           (std::norm(a) - std::norm(b)) / n2);
  }
};

ComplexFrame make_complex_frame(const MatXd& g, const MatXd& J) {
  ComplexFrame f;
  f.g = g;
  f.f1 = VecXd::Unit(4, 0);
  f.f1 /= g_norm(g, f.f1);
  f.f2 = J * f.f1;
  // best coordinate direction outside span{f1, f2}
  VecXd cand;
  double best = -1;
  for (int i = 1; i < 4; ++i) {
    VecXd w = VecXd::Unit(4, i);
    w -= w.dot(g * f.f1) * f.f1 + w.dot(g * f.f2) * f.f2;
    double n = g_norm(g, w);
    if (n > best) {
      best = n;
      cand = w / n;
    }
  }
  f.f3 = cand;
  f.f4 = J * f.f3;
  return f;
}

}  // namespace

DriftReport vertical_drift_probe(const ChartManifold& M,
                                 const std::vector<double>& eps_list,
                                 double T_slow, double tol) {
  if (M.dim != 4 || !M.has_acs())
    throw Error("vertical_drift_probe: needs an almost Kaehler 4-manifold");
  const int n = 4;
  VecXd q0(4);
  q0 << 0.15, -0.2, 0.1, 0.05;
  // direction chosen off the J-invariant coordinate planes so the complex
  // line moves through a region where khat varies along the fiber
  VecXd dir(4);
  dir << 1.0, 1.0, q0[0], 0.0;

  ComplexFrame frame = make_complex_frame(M.metric(0, q0), M.acs(0, q0));
  StepControl<double> ctl;
  ctl.rtol = ctl.atol = tol;

  DriftReport rep;
  for (double eps : eps_list) {
    TangentState s0 = make_state(M, 0, q0, dir, eps);
    ClosureOptions copt;
    copt.integrator_tol = tol;
    ClosureResult cl = detect_period(M, s0, copt);
    if (!cl.closed)
      throw IntegrationError(
          "vertical drift: no quasi-period found [replay: manifold=" +
          M.name + " eps=" + std::to_string(eps) + "]");

    DriftRow row;
    row.eps = eps;
    row.period = cl.period;
    double n_win =
        clamp_windows(std::round(T_slow / (eps * eps * row.period)), 16, 1e5);
    double t_end = n_win * row.period;

    // augmented state: (q, v, frame columns), frame Chern-parallel along q(t)
    VecXd y0(2 * n + n * n);
    y0.head(n) = s0.q;
    y0.segment(n, n) = s0.v;
    Eigen::Map<MatXd>(y0.data() + 2 * n, n, n) = MatXd::Identity(n, n);
    auto rhs = [&M, n](double, const VecXd& y) -> VecXd {
      VecXd q = y.head(n), v = y.segment(n, n);
      VecXd f(y.size());
      f.head(n) = v;
      f.segment(n, n) = magnetic_acceleration(M, 0, q, v);
      Tensor3 ch = chern_connection(M, 0, q);
      MatXd G = MatXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        if (v[i] != 0.0) G += v[i] * direction_matrix(ch, i);
      Eigen::Map<const MatXd> E(y.data() + 2 * n, n, n);
      Eigen::Map<MatXd>(f.data() + 2 * n, n, n) = -G * E;
      return f;
    };

    WindowAverager wa(0.0, row.period);
    VecXd y = y0;
    integrate_ode(rhs, 0.0, t_end, y, ctl,
                  [&](double t, const VecXd& yy, const VecXd&) {
                    Eigen::Map<const MatXd> E(yy.data() + 2 * n, n, n);
                    VecXd u = E.partialPivLu().solve(yy.segment(n, n));
                    wa.add(t, frame.hopf(u));
                  });
    DriftLine dl = fit_drift_line(wa.means(), row.period);
    row.center = dl.center;
    row.velocity = dl.velocity;
    row.displacement = dl.velocity.norm() * row.period;
    row.degenerate = row.displacement < kDriftFloor;
    row.predicted_velocity = VecXd::Zero(3);
    rep.rows.push_back(std::move(row));
  }
  fit_report(rep);
  return rep;
}

}  // namespace zoll
