#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/geom.hpp"

namespace ewm {

struct Landmark {
  Vec3 position = Vec3::Zero();  // meters, world
  std::array<std::uint8_t, 3> color{255, 255, 255};
  double radius = 0.2;           // meters
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

// Static synthetic world: colored landmark spheres inside an axis-aligned box.
struct SceneSpec {
  std::vector<Landmark> landmarks;
  Aabb bounds;
  std::uint64_t seed = 0;

  void validate() const;
};

}  // namespace ewm
