#pragma once

// Linear symplectic analysis of the normal-bundle pair (rho, gamma): the
// generator A with rho(w, Av) = gamma(w, v), its normalization to unit
// determinant, spectral numbers with multiplicities, and the classification
// of the fiberwise flow e^{t A~} as Zoll / Besse / not Besse.
//
// Index convention (pinned here, tested by the defining residual): matrices
// of bilinear forms are M(i,j) = T(e_i, e_j), so A = rho_mat^{-1} gamma_mat.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "zoll/rational.hpp"
#include "zoll/types.hpp"

namespace zoll {

enum class FlowClass { Zoll, Besse, NotBesse, Undecided };

inline const char* to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Zoll: return "Zoll";
    case FlowClass::Besse: return "Besse";
    case FlowClass::NotBesse: return "NotBesse";
    default: return "Undecided";
  }
}

struct SpectralData {
  int dim = 0;  // 2k
  MatXd rho, gamma, A, A_tilde;
  double det_A = 0;
  std::vector<double> a;        // spectral numbers of A, descending
  std::vector<double> a_tilde;  // normalized, product = 1
  std::vector<double> distinct;       // distinct normalized values, descending
  std::vector<int> multiplicities;    // cluster sizes for `distinct`
  FlowClass cls = FlowClass::Undecided;
  std::vector<RationalVerdict> ratio_verdicts;  // a_tilde[i] / a_tilde[0]
  double common_period = 0;  // minimal common period when Besse/Zoll
  double T_min = 0;          // 2*pi / a_tilde[0]
};

/// Classification of spectral numbers: Besse iff every ratio to the largest
/// is recognized rational with denominator <= den_bound; Zoll iff moreover
/// all are equal. An undecided ratio makes the verdict Undecided, never
/// silently NotBesse.
inline void classify_linear_flow(SpectralData& S, std::int64_t den_bound,
                                 double rat_tol = 1e-9) {
  const int k = static_cast<int>(S.a_tilde.size());
  S.ratio_verdicts.clear();
  bool all_rational = true, any_undecided = false;
  std::int64_t lcm = 1;
  for (int i = 0; i < k; ++i) {
    RationalVerdict v =
        recognize_rational(S.a_tilde[i] / S.a_tilde[0], den_bound, rat_tol);
    if (v.kind == RationalVerdict::Kind::Undecided) any_undecided = true;
    if (v.kind != RationalVerdict::Kind::Rational) all_rational = false;
    if (v.rational() && lcm < (std::int64_t{1} << 62) / std::max<std::int64_t>(v.den, 1))
      lcm = lcm64(lcm, v.den);
    S.ratio_verdicts.push_back(v);
  }
  if (all_rational) {
    bool zoll = S.distinct.size() == 1;
    S.cls = zoll ? FlowClass::Zoll : FlowClass::Besse;
    S.common_period = kTwoPi * static_cast<double>(lcm) / S.a_tilde[0];
  } else {
    S.cls = any_undecided ? FlowClass::Undecided : FlowClass::NotBesse;
    S.common_period = 0;
  }
}

/// Build the full spectral record from (rho, gamma).
inline SpectralData build_spectral(const MatXd& rho, const MatXd& gamma,
                                   std::int64_t den_bound = 1000000,
                                   double cluster_tol = 1e-9) {
  const int n = static_cast<int>(rho.rows());
  if (n == 0 || n % 2 != 0 || rho.cols() != n || gamma.rows() != n ||
      gamma.cols() != n)
    throw Error("build_spectral: need matching even-dimensional matrices");
  if ((rho + rho.transpose()).norm() > 1e-10 * (1.0 + rho.norm()))
    throw Error("build_spectral: rho is not antisymmetric");
  if ((gamma - gamma.transpose()).norm() > 1e-10 * (1.0 + gamma.norm()))
    throw Error("build_spectral: gamma is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatXd> ges(gamma);
  if (ges.eigenvalues().minCoeff() <= 0)
    throw Error("build_spectral: gamma is not positive definite");
  Eigen::FullPivLU<MatXd> rlu(rho);
  if (!rlu.isInvertible())
    throw Error("build_spectral: rho is singular");

  SpectralData S;
  S.dim = n;
  S.rho = rho;
  S.gamma = gamma;
  S.A = rlu.solve(gamma);
  S.det_A = S.A.partialPivLu().determinant();

  // spectral numbers via the antisymmetric similarity W = gamma^{1/2}
  // rho^{-1} gamma^{1/2}: eigenvalues of A are those of W, i.e. +/- i times
  // the (paired) singular values of W
  MatXd ghalf = ges.operatorSqrt();
  MatXd W = ghalf * rlu.solve(ghalf);
  Eigen::JacobiSVD<MatXd> svd(W);
  VecXd sv = svd.singularValues();  // descending, in pairs
  const int k = n / 2;
  S.a.resize(k);
  for (int j = 0; j < k; ++j) S.a[j] = 0.5 * (sv[2 * j] + sv[2 * j + 1]);

  double scale = std::pow(S.det_A, 1.0 / n);
  S.A_tilde = S.A / scale;
  S.a_tilde.resize(k);
  for (int j = 0; j < k; ++j) S.a_tilde[j] = S.a[j] / scale;

  // multiplicity clustering at relative tolerance
  for (int j = 0; j < k; ++j) {
    if (!S.distinct.empty() &&
        std::abs(S.a_tilde[j] - S.distinct.back()) <=
            cluster_tol * S.distinct.back()) {
      ++S.multiplicities.back();
    } else {
      S.distinct.push_back(S.a_tilde[j]);
      S.multiplicities.push_back(1);
    }
  }
  S.T_min = kTwoPi / S.a_tilde[0];
  classify_linear_flow(S, den_bound);
  return S;
}

struct PeriodSetVerdict {
  bool member = false;
  RationalVerdict verdict;  // rationality of (period / 2pi)^k
};

/// Membership of a period in 2*pi * (Q_+^k)^{1/k}: checks that
/// (period / 2pi)^k is rational with bounded denominator.
inline PeriodSetVerdict check_period_set(const SpectralData& S, double period,
                                         std::int64_t den_bound = 1000000,
                                         double tol = 1e-9) {
  const int k = S.dim / 2;
  double x = std::pow(period / kTwoPi, k);
  PeriodSetVerdict v;
  v.verdict = recognize_rational(x, den_bound, tol);
  v.member = v.verdict.rational();
  return v;
}

/// Fiber-sphere dimension of the minimal-period submanifold: 2 k_{a1} - 1.
inline int sigma_min_dim(const SpectralData& S) {
  return 2 * S.multiplicities.front() - 1;
}

}  // namespace zoll
