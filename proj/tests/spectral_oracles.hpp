#pragma once

// Brute-force oracles for the spectral module, independent of the eigen/SVD
// route: plain Taylor matrix exponential, orbit-closure scanning, and FFT
// peak extraction from a matrix entry of the flow.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "zoll/types.hpp"

namespace oracle {

using zoll::kTwoPi;
using zoll::MatXd;
using zoll::VecXd;

// --- brute-force oracles, independent of the eigen/SVD route ---

// plain scaling-and-squaring Taylor exponential
MatXd expm_taylor(const MatXd& M) {
  const int n = static_cast<int>(M.rows());
  double nrm = M.norm();
  int s = nrm > 0.25 ? static_cast<int>(std::ceil(std::log2(nrm / 0.25))) : 0;
  MatXd X = M / std::pow(2.0, s);
  MatXd E = MatXd::Identity(n, n) + X;
  MatXd term = X;
  for (int k = 2; k <= 30; ++k) {
    term = (term * X) / k;
    E += term;
    if (term.norm() < 1e-18) break;
  }
  for (int i = 0; i < s; ++i) E = E * E;
  return E;
}

// first closure time of e^{tA} v in (0, T_max], or nothing
std::optional<double> closure_time(const MatXd& A, const VecXd& v,
                                   double T_max, double rel_tol) {
  double dt = 1e-3 * kTwoPi;
  MatXd E = expm_taylor(dt * A);
  VecXd w = v;
  double best = 1e300, best_t = 0;
  double prev = 1e300;
  bool descending = false;
  bool armed = false;  // ignore the trivial near-closure at t = 0
  long steps = static_cast<long>(T_max / dt);
  for (long k = 1; k <= steps; ++k) {
    w = E * w;
    double d = (w - v).norm();
    if (d > 0.3 * v.norm()) armed = true;
    if (armed && descending && d > prev && prev < 0.2 * v.norm()) {
      // local minimum at step k-1: refine by golden section
      double a = (k - 2) * dt, b = k * dt;
      auto f = [&](double t) { return (expm_taylor(t * A) * v - v).norm(); };
      double lo = a, hi = b;
      for (int it = 0; it < 60; ++it) {
        double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
        (f(m1) < f(m2) ? hi : lo) = (f(m1) < f(m2) ? m2 : m1);
      }
      double t_ref = 0.5 * (lo + hi), d_ref = f(t_ref);
      if (d_ref < rel_tol * v.norm()) return t_ref;
      if (d_ref < best) {
        best = d_ref;
        best_t = t_ref;
      }
    }
    descending = d < prev;
    prev = d;
  }
  (void)best_t;
  return std::nullopt;
}

// frequencies of a matrix entry of e^{t A}: FFT peaks refined by maximizing
// the windowed projection |sum s_k w_k e^{-i w t_k}|
std::vector<double> flow_frequencies(const MatXd& A, int expected) {
  const double T = 6000.0;
  const int N = 1 << 16;
  const double dt = T / N;
  MatXd E = expm_taylor(dt * A);
  MatXd M = MatXd::Identity(A.rows(), A.cols());
  std::vector<double> sig(N), win(N);
  for (int k = 0; k < N; ++k) {
    sig[k] = M(0, 0);
    win[k] = 0.5 - 0.5 * std::cos(kTwoPi * k / N);  // Hann
    M = E * M;
  }
  std::vector<std::complex<double>> spec;
  {
    Eigen::FFT<double> fft;
    std::vector<double> windowed(N);
    for (int k = 0; k < N; ++k) windowed[k] = sig[k] * win[k];
    fft.fwd(spec, windowed);
  }
  auto projection = [&](double omega) {
    std::complex<double> acc = 0;
    for (int k = 0; k < N; ++k)
      acc += sig[k] * win[k] *
             std::exp(std::complex<double>(0, -omega * k * dt));
    return std::abs(acc);
  };
  // local maxima of the magnitude spectrum
  std::vector<std::pair<double, int>> peaks;
  for (int b = 2; b < N / 2 - 2; ++b) {
    double m = std::abs(spec[b]);
    if (m > std::abs(spec[b - 1]) && m > std::abs(spec[b + 1]))
      peaks.push_back({m, b});
  }
  std::sort(peaks.rbegin(), peaks.rend());
  std::vector<double> freqs;
  for (const auto& [mag, bin] : peaks) {
    if (static_cast<int>(freqs.size()) >= expected) break;
    double omega = kTwoPi * bin / T;
    bool dup = false;
    for (double f : freqs) dup = dup || std::abs(f - omega) < 0.02;
    if (dup) continue;
    double lo = omega - kTwoPi / T * 2, hi = omega + kTwoPi / T * 2;
    for (int it = 0; it < 80; ++it) {
      double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
      (projection(m1) > projection(m2) ? hi : lo) =
          (projection(m1) > projection(m2) ? m2 : m1);
    }
    freqs.push_back(0.5 * (lo + hi));
  }
  std::sort(freqs.rbegin(), freqs.rend());
  return freqs;
}

}  // namespace oracle
