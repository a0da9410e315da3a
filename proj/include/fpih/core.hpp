#pragma once

#include <Eigen/Dense>

namespace fpih {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr const char* kBuildVersion = "1.0.0";

// Numerically stable softplus and logistic; used by the network activations
// and the squashed-Gaussian density corrections.
inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double wrap_angle(double a) {
  return std::remainder(a, 2.0 * M_PI);
}

}  // namespace fpih
