#pragma once

// Guiding-center extraction and the slow-drift experiments: window-averaged
// base curves, per-period drift vectors, and log-log exponent fits against
// the epsilon^2 / epsilon^4 predictions.

#include <cstdint>
#include <optional>
#include <vector>

#include "zoll/dynamics.hpp"
#include "zoll/model_bundle.hpp"
#include "zoll/periods.hpp"

namespace zoll {

/// Streaming time averages of a sampled vector signal over consecutive
/// windows of fixed length. Between samples the signal is modeled by a cubic
/// Hermite segment when a derivative is supplied (falling back to a chord),
/// and windows are accumulated by integrating the segment piecewise, so the
/// means carry O(h^4) accuracy at window boundaries.
class WindowAverager {
 public:
  WindowAverager(double t0, double window) : t_edge_(t0 + window), w_(window) {}

  void add(double t, const VecXd& z) { add_impl(t, z, nullptr, nullptr); }
  void add(double t, const VecXd& z, const VecXd& dz) {
    add_impl(t, z, &dz, nullptr);
  }
  void add(double t, const VecXd& z, const VecXd& dz, const VecXd& d2z) {
    add_impl(t, z, &dz, &d2z);
  }

  const std::vector<VecXd>& means() const { return means_; }
  double window() const { return w_; }

 private:
  void add_impl(double t, const VecXd& z, const VecXd* dz, const VecXd* d2z) {
    if (!have_prev_) {
      prev_t_ = t;
      prev_z_ = z;
      if (dz) prev_dz_ = *dz;
      if (d2z) prev_d2z_ = *d2z;
      acc_ = VecXd::Zero(z.size());
      have_prev_ = true;
      return;
    }
    double dt = t - prev_t_;
    if (dt <= 0) {
      prev_z_ = z;
      if (dz) prev_dz_ = *dz;
      if (d2z) prev_d2z_ = *d2z;
      return;
    }
    // polynomial segment on s in [0,1]: chord, cubic or quintic Hermite
    // depending on how many derivatives the caller supplies
    const int deg = 6;
    std::vector<VecXd> a(deg, VecXd::Zero(z.size()));
    VecXd dp = z - prev_z_;
    a[0] = prev_z_;
    if (d2z && dz && prev_dz_.size() == z.size() &&
        prev_d2z_.size() == z.size()) {
      VecXd m0 = dt * prev_dz_, m1 = dt * *dz;
      VecXd c0 = dt * dt * prev_d2z_, c1 = dt * dt * *d2z;
      a[1] = m0;
      a[2] = 0.5 * c0;
      a[3] = 10.0 * dp - 6.0 * m0 - 4.0 * m1 - 1.5 * c0 + 0.5 * c1;
      a[4] = -15.0 * dp + 8.0 * m0 + 7.0 * m1 + 1.5 * c0 - c1;
      a[5] = 6.0 * dp - 3.0 * (m0 + m1) - 0.5 * (c0 - c1);
    } else if (dz && prev_dz_.size() == z.size()) {
      VecXd m0 = dt * prev_dz_, m1 = dt * *dz;
      a[1] = m0;
      a[2] = 3.0 * dp - 2.0 * m0 - m1;
      a[3] = -2.0 * dp + m0 + m1;
    } else {
      a[1] = dp;
    }
    auto antiderivative = [&](double s) -> VecXd {
      VecXd out = VecXd::Zero(z.size());
      double sp = s;
      for (int i = 0; i < deg; ++i) {
        out += a[i] * (sp / (i + 1));
        sp *= s;
      }
      return dt * out;
    };
    double s_done = 0;
    while (t >= t_edge_) {
      double sb = (t_edge_ - prev_t_) / dt;
      acc_ += antiderivative(sb) - antiderivative(s_done);
      means_.push_back(acc_ / w_);
      acc_.setZero();
      s_done = sb;
      t_edge_ += w_;
    }
    acc_ += antiderivative(1.0) - antiderivative(s_done);
    prev_t_ = t;
    prev_z_ = z;
    if (dz) prev_dz_ = *dz;
    if (d2z) prev_d2z_ = *d2z;
  }

  double t_edge_, w_, prev_t_ = 0;
  VecXd prev_z_, prev_dz_, prev_d2z_, acc_;
  bool have_prev_ = false;
  std::vector<VecXd> means_;
};

/// Least-squares straight line through window means at midpoint times;
/// velocity is the fitted slope.
struct DriftLine {
  VecXd velocity;
  VecXd center;  // mean of the window means
  double residual_rms = 0;
};

inline DriftLine fit_drift_line(const std::vector<VecXd>& means,
                                double window) {
  const int n = static_cast<int>(means.size());
  if (n < 2) throw Error("fit_drift_line: need at least two windows");
  const int d = static_cast<int>(means[0].size());
  double xbar = 0.5 * (n - 1);
  VecXd zbar = VecXd::Zero(d);
  for (const auto& m : means) zbar += m;
  zbar /= n;
  double sxx = 0;
  VecXd sxz = VecXd::Zero(d);
  for (int k = 0; k < n; ++k) {
    double dx = k - xbar;
    sxx += dx * dx;
    sxz += dx * (means[k] - zbar);
  }
  DriftLine out;
  out.velocity = sxz / (sxx * window);
  out.center = zbar;
  double ssr = 0;
  for (int k = 0; k < n; ++k) {
    VecXd pred = zbar + (k - xbar) * window * out.velocity;
    ssr += (means[k] - pred).squaredNorm();
  }
  out.residual_rms = std::sqrt(ssr / n);
  return out;
}

struct ExponentFit {
  double p = 0;        // fitted exponent
  double stderr_p = 0;
  double r2 = 0;
  bool ok = false;
};

inline ExponentFit fit_exponent(const std::vector<double>& eps,
                                const std::vector<double>& mag) {
  ExponentFit f;
  const int n = static_cast<int>(eps.size());
  if (n < 3) return f;
  double sx = 0, sy = 0;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    if (mag[i] <= 0) return f;
    xs[i] = std::log(eps[i]);
    ys[i] = std::log(mag[i]);
    sx += xs[i];
    sy += ys[i];
  }
  double xbar = sx / n, ybar = sy / n, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    syy += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.p = sxy / sxx;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    double r = ys[i] - ybar - f.p * (xs[i] - xbar);
    ssr += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 0.0;
  f.stderr_p = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  f.ok = true;
  return f;
}

/// One-period sliding average of the base point of a stored trajectory,
/// resampled on period windows.
std::vector<VecXd> guiding_center(const ChartManifold& M, const Trajectory& tr,
                                  double period);

struct DriftRow {
  double eps = 0;
  double period = 0;            // measured quasi-period
  double displacement = 0;      // guiding-center displacement per quasi-period
  VecXd center;                 // mean guiding center of the run
  VecXd velocity;               // fitted drift velocity (chart coordinates)
  VecXd predicted_velocity;     // model prediction at the guiding center
  double direction_cosine = 0;  // measured vs predicted, metric inner product
  double magnitude_ratio = 0;   // measured speed / predicted speed
  double level_line_component = 0;  // |<dir, grad khat>| (curvature case)
  bool degenerate = false;          // displacement below the noise floor
};

struct DriftReport {
  std::vector<DriftRow> rows;
  ExponentFit fit;
  double mean_direction_cosine = 0;
  bool degenerate = false;  // every row below the noise floor ("Zoll")
};

/// Noise floor: displacements per period below this are treated as zero
/// drift (10x the closure tolerance scale).
inline constexpr double kDriftFloor = 1e-7;

/// Direction audit for the slow drifts, in this codebase's i_X omega = -df
/// convention and curvature orientation: the measured conformal-model drift
/// is collinear with X_{+a} = -X_{-a}, and the measured curvature drift with
/// -X_{khat/8} = X_{-khat/8}; the 1/8 magnitude coefficient is verbatim.
/// The flips are the same convention seam documented at khat() and are
/// asserted by the audit tests; flipping this constant fails the suite.
inline constexpr double kCurvatureDriftSign = -1.0;

/// Hamiltonian vector field of f w.r.t. the magnetic form: i_X beta = -df,
/// i.e. X = beta_mat^{-1} df in the pinned index convention.
inline VecXd beta_hamiltonian(const ChartManifold& M, int cid, const VecXd& q,
                              const VecXd& df) {
  return M.magnetic(cid, q).partialPivLu().solve(df);
}

DriftReport conformal_drift_experiment(const ModelBundleSystem& S,
                                       const std::vector<double>& eps_list,
                                       double T_slow, double tol = 1e-12);

DriftReport curvature_drift_experiment(const ChartManifold& M,
                                       const std::vector<double>& eps_list,
                                       double T_slow, double tol = 1e-12,
                                       std::optional<VecXd> q0 = {},
                                       int chart_id = 0,
                                       std::optional<VecXd> v_dir = {});

DriftReport vertical_drift_probe(const ChartManifold& M,
                                 const std::vector<double>& eps_list,
                                 double T_slow, double tol = 1e-12);

/// khat as a function of the base point on a surface with B = J (fiber
/// invariant there), and its coordinate differential by central differences.
double surface_khat(const ChartManifold& M, int cid, const VecXd& q);
VecXd surface_khat_gradient_covector(const ChartManifold& M, int cid,
                                     const VecXd& q, double h = 1e-4);

}  // namespace zoll
