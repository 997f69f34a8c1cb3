#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace zoll {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = Vec<double>;
using MatXd = Mat<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Third-order array storing first derivatives of a matrix field:
/// d[l](i,j) = ∂_l T_ij in chart coordinates.
template <class S>
struct Tensor3T {
  std::vector<Mat<S>> d;

  Tensor3T() = default;
  Tensor3T(int dirs, int rows, int cols) : d(dirs, Mat<S>::Zero(rows, cols)) {}

  int dirs() const { return static_cast<int>(d.size()); }
  Mat<S>& operator[](int l) { return d[l]; }
  const Mat<S>& operator[](int l) const { return d[l]; }
};

using Tensor3 = Tensor3T<double>;

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Metric not positive definite / not invertible where it must be.
struct DegenerateMetricError : Error {
  using Error::Error;
};

/// Finite-difference stencil would leave the chart domain.
struct StencilError : Error {
  using Error::Error;
};

/// Requested an object (e.g. almost complex structure) the manifold lacks.
struct MissingStructureError : Error {
  using Error::Error;
};

/// Integration could not proceed (step underflow, no covering chart, ...).
struct IntegrationError : Error {
  using Error::Error;
};

/// A vector that must be unit-norm (or similar) is not.
struct NormalizationError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace zoll
