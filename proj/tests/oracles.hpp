#pragma once

// Test-side oracles, kept independent of the chart/finite-difference
// implementation paths they are used to check.

#include <vector>

#include "zoll/types.hpp"

namespace oracle {

using zoll::MatXd;
using zoll::VecXd;

/// A Lie algebra with orthonormal metric and a constant complex structure in
/// the frame; f[i][j] holds the structure constants of [e_i, e_j].
struct FrameAlgebra {
  int n = 0;
  std::vector<std::vector<VecXd>> f;
  MatXd J;

  VecXd bracket(const VecXd& u, const VecXd& v) const {
    VecXd out = VecXd::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (u[i] != 0.0 && v[j] != 0.0) out += u[i] * v[j] * f[i][j];
    return out;
  }
};

inline FrameAlgebra kodaira_thurston_frame() {
  FrameAlgebra a;
  a.n = 4;
  a.f.assign(4, std::vector<VecXd>(4, VecXd::Zero(4)));
  a.f[0][1][2] = 1.0;  // [e1,e2] = e3
  a.f[1][0][2] = -1.0;
  a.J = MatXd::Zero(4, 4);
  a.J(2, 0) = 1.0;   // J e1 = e3
  a.J(3, 1) = 1.0;   // J e2 = e4
  a.J(0, 2) = -1.0;
  a.J(1, 3) = -1.0;
  return a;
}

/// Levi-Civita connection matrices in the frame via the Koszul formula:
/// C_i(m,j) = <nabla_{e_i} e_j, e_m>.
inline std::vector<MatXd> frame_levi_civita(const FrameAlgebra& a) {
  std::vector<MatXd> C(a.n, MatXd::Zero(a.n, a.n));
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      for (int m = 0; m < a.n; ++m)
        C[i](m, j) = 0.5 * (a.f[i][j][m] - a.f[i][m][j] - a.f[j][m][i]);
  return C;
}

inline std::vector<MatXd> frame_chern(const FrameAlgebra& a) {
  std::vector<MatXd> C = frame_levi_civita(a);
  for (int i = 0; i < a.n; ++i)
    C[i] -= 0.5 * a.J * (C[i] * a.J - a.J * C[i]);
  return C;
}

/// Curvature R(u,v) for constant frame connection matrices.
inline MatXd frame_curvature(const FrameAlgebra& a,
                             const std::vector<MatXd>& C, const VecXd& u,
                             const VecXd& v) {
  MatXd R = MatXd::Zero(a.n, a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      double c = u[i] * v[j];
      if (c == 0.0) continue;
      R += c * (C[i] * C[j] - C[j] * C[i]);
      VecXd br = a.f[i][j];
      for (int l = 0; l < a.n; ++l)
        if (br[l] != 0.0) R -= c * br[l] * C[l];
    }
  return R;
}

inline MatXd frame_nijenhuis_matrix(const FrameAlgebra& a, const VecXd& v) {
  MatXd N(a.n, a.n);
  for (int j = 0; j < a.n; ++j) {
    VecXd ej = VecXd::Zero(a.n);
    ej[j] = 1.0;
    N.col(j) = a.bracket(v, ej) + a.J * a.bracket(a.J * v, ej) +
               a.J * a.bracket(v, a.J * ej) - a.bracket(a.J * v, a.J * ej);
  }
  return N;
}

struct FrameCurvatureSample {
  double K, nstar2, khat;
};

inline FrameCurvatureSample frame_khat(const FrameAlgebra& a, const VecXd& v) {
  auto Cc = frame_chern(a);
  VecXd Jv = a.J * v;
  FrameCurvatureSample s;
  s.K = (frame_curvature(a, Cc, v, Jv) * Jv).dot(v);
  VecXd Nsv = frame_nijenhuis_matrix(a, v).transpose() * v;
  s.nstar2 = Nsv.squaredNorm();
  s.khat = s.K + s.nstar2 / 24.0;
  return s;
}

/// Christoffel symbols of e^{2 phi} delta in dimension n, from grad phi:
/// Gamma^k_{ij} = d_i phi delta_jk + d_j phi delta_ik - d_k phi delta_ij.
inline double conformal_christoffel(const VecXd& dphi, int k, int i, int j) {
  double s = 0;
  if (j == k) s += dphi[i];
  if (i == k) s += dphi[j];
  if (i == j) s -= dphi[k];
  return s;
}

}  // namespace oracle
