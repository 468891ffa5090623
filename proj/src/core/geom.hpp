#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ewm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Intrinsic X-then-Y-then-Z Euler rotation, radians.
inline Mat3 euler_to_matrix(const Vec3& e) {
  return (Eigen::AngleAxisd(e.x(), Vec3::UnitX()) *
          Eigen::AngleAxisd(e.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(e.z(), Vec3::UnitZ()))
      .toRotationMatrix();
}

inline bool finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Eigen's default constructor leaves coefficients uninitialized; use this for
// zeroed array members.
template <std::size_t N>
inline std::array<Vec3, N> zero_vec3_array() {
  std::array<Vec3, N> a;
  for (auto& v : a) v.setZero();
  return a;
}

}  // namespace ewm
