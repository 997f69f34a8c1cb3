#pragma once

// Embedded Runge-Kutta-Fehlberg 7(8) pair (13 stages, exact rational tableau)
// with PI step-size control. The 8th-order solution propagates; the 7th-order
// one only feeds the error estimate.

#include <cmath>
#include <cstdint>

#include "zoll/types.hpp"

namespace zoll {

template <class S>
struct StepControl {
  S rtol = 1e-12;
  S atol = 1e-12;
  S h_min_abs = 1e-14;
  S h_max_abs = 1.0;
  S h_init = 0;  // 0 -> choose from |y|/|f|
  std::int64_t max_steps = 400000000;
};

namespace rk78 {

inline constexpr int kStages = 13;

inline constexpr double kC[kStages] = {
    0.0,       2.0 / 27.0, 1.0 / 9.0, 1.0 / 6.0, 5.0 / 12.0, 1.0 / 2.0,
    5.0 / 6.0, 1.0 / 6.0,  2.0 / 3.0, 1.0 / 3.0, 1.0,        0.0,
    1.0};

inline constexpr double kA[kStages][kStages - 1] = {
    {},
    {2.0 / 27.0},
    {1.0 / 36.0, 1.0 / 12.0},
    {1.0 / 24.0, 0.0, 1.0 / 8.0},
    {5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0},
    {1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0},
    {-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0},
    {31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0},
    {2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0},
    {-91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0,
     -19.0 / 60.0, 17.0 / 6.0, -1.0 / 12.0},
    {2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -301.0 / 82.0,
     2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0},
    {3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0,
     3.0 / 41.0, 6.0 / 41.0, 0.0},
    {-1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0,
     -289.0 / 82.0, 2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0, 12.0 / 41.0,
     0.0, 1.0}};

inline constexpr double kB8[kStages] = {
    0.0,         0.0,         0.0, 0.0, 0.0, 34.0 / 105.0, 9.0 / 35.0,
    9.0 / 35.0,  9.0 / 280.0, 9.0 / 280.0, 0.0, 41.0 / 840.0, 41.0 / 840.0};

// err = y8 - y7 = h * 41/840 * (k0 + k10 - k11 - k12)
inline constexpr double kErrW = 41.0 / 840.0;

}  // namespace rk78

/// Adaptive RKF7(8) driver. The caller owns the stepping loop so that the
/// state may be remapped between accepted steps (chart transitions, event
/// handling). Step size and controller memory survive set_state().
template <class S>
class Rk78Driver {
 public:
  explicit Rk78Driver(StepControl<S> ctl = {}) : ctl_(ctl) {}

  template <class RHS>
  void start(RHS&& f, S t0, const Vec<S>& y0, S t_target) {
    t_ = t0;
    y_ = y0;
    dir_ = t_target >= t0 ? S(1) : S(-1);
    k_.resize(y0.size(), rk78::kStages);
    f0_ = f(t_, y_);
    err_prev_ = S(1);
    n_steps_ = n_rejected_ = 0;
    h_ = ctl_.h_init > 0 ? ctl_.h_init : initial_step(t_target);
  }

  /// One accepted step, clamped so that t never passes t_target.
  /// Returns false once t == t_target.
  template <class RHS>
  bool step(RHS&& f, S t_target) {
    using std::abs;
    if (dir_ * (t_target - t_) <= S(0)) return false;
    for (;;) {
      if (n_steps_ + n_rejected_ >= ctl_.max_steps)
        throw IntegrationError("rk78: step budget exhausted");
      S h = dir_ * std::min(abs(h_), std::min(ctl_.h_max_abs, abs(t_target - t_)));
      bool clamped = abs(h) >= abs(t_target - t_) * (S(1) - S(1e-14));
      if (clamped) h = t_target - t_;
      S err = try_step(f, h);
      S fac = S(0.9) * std::pow(std::max(err, S(1e-30)), S(-0.7 / 8.0)) *
              std::pow(err_prev_, S(0.4 / 8.0));
      fac = std::min(S(4), std::max(S(0.2), fac));
      if (err <= S(1)) {
        t_ = clamped ? t_target : t_ + h;
        y_.swap(y_next_);
        f0_ = f(t_, y_);
        err_prev_ = std::max(err, S(1e-10));
        h_ = abs(h) * fac;
        ++n_steps_;
        return dir_ * (t_target - t_) > S(0);
      }
      ++n_rejected_;
      h_ = abs(h) * fac;
      if (h_ < ctl_.h_min_abs)
        throw IntegrationError("rk78: step size underflow");
    }
  }

  S t() const { return t_; }
  const Vec<S>& y() const { return y_; }
  const Vec<S>& dydt() const { return f0_; }
  std::int64_t steps() const { return n_steps_; }
  std::int64_t rejected() const { return n_rejected_; }

  /// Replace the state in place (e.g. after a chart transition).
  template <class RHS>
  void set_state(RHS&& f, const Vec<S>& y) {
    y_ = y;
    f0_ = f(t_, y_);
  }

 private:
  S initial_step(S t_target) const {
    using std::abs;
    S ny = y_.norm(), nf = f0_.norm();
    S h = (nf > S(0)) ? S(0.01) * std::max(ny, S(1)) / nf : S(1e-4);
    return std::min({h, ctl_.h_max_abs, abs(t_target - t_)});
  }

  // Returns the scaled error norm; fills y_next_ with the 8th-order result.
  template <class RHS>
  S try_step(RHS&& f, S h) {
    const int n = static_cast<int>(y_.size());
    k_.col(0) = f0_;
    Vec<S> yt(n);
    for (int s = 1; s < rk78::kStages; ++s) {
      yt = y_;
      for (int j = 0; j < s; ++j) {
        double a = rk78::kA[s][j];
        if (a != 0.0) yt += (h * S(a)) * k_.col(j);
      }
      k_.col(s) = f(t_ + S(rk78::kC[s]) * h, yt);
    }
    y_next_ = y_;
    for (int s = 0; s < rk78::kStages; ++s) {
      double b = rk78::kB8[s];
      if (b != 0.0) y_next_ += (h * S(b)) * k_.col(s);
    }
    Vec<S> e = (h * S(rk78::kErrW)) *
               (k_.col(0) + k_.col(10) - k_.col(11) - k_.col(12));
    S acc = 0;
    for (int i = 0; i < n; ++i) {
      S sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y_[i]), std::abs(y_next_[i]));
      S r = e[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / S(n));
  }

  StepControl<S> ctl_;
  S t_ = 0, h_ = 0, dir_ = 1, err_prev_ = 1;
  Vec<S> y_, y_next_, f0_;
  Mat<S> k_;
  std::int64_t n_steps_ = 0, n_rejected_ = 0;
};

/// Integrate y' = f(t,y) from t0 to t1, invoking sink(t, y, dy/dt) at t0 and
/// after every accepted step (including the final clamped one).
template <class S, class RHS, class Sink>
void integrate_ode(RHS&& f, S t0, S t1, Vec<S>& y, const StepControl<S>& ctl,
                   Sink&& sink) {
  Rk78Driver<S> drv(ctl);
  drv.start(f, t0, y, t1);
  sink(drv.t(), drv.y(), drv.dydt());
  if (t1 == t0) return;
  bool more = true;
  while (more) {
    more = drv.step(f, t1);
    sink(drv.t(), drv.y(), drv.dydt());
  }
  y = drv.y();
}

template <class S, class RHS>
void integrate_ode(RHS&& f, S t0, S t1, Vec<S>& y, const StepControl<S>& ctl) {
  integrate_ode(f, t0, t1, y, ctl, [](S, const Vec<S>&, const Vec<S>&) {});
}

}  // namespace zoll
