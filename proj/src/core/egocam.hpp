#pragma once

#include <optional>
#include <vector>

#include "core/geom.hpp"
#include "core/image.hpp"
#include "core/kinematics.hpp"
#include "core/scene.hpp"

namespace ewm::cam {

// Head-anchored virtual camera basis expressed in world coordinates.
// Axes: x along the eye line, y toward the neck (image-down), z = x cross y.
struct CameraFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 x_axis = Vec3::UnitX();
  Vec3 y_axis = Vec3::UnitY();
  Vec3 z_axis = Vec3::UnitZ();
};

struct Intrinsics {
  int image_width = 224;
  int image_height = 224;
  double vertical_fov = M_PI / 2;  // radians
  double near_plane = 0.1;         // meters

  void validate() const;
  double focal_px() const;  // pixels, square-pixel pinhole
};

// Distance the camera is advanced along its forward axis from the eye
// midpoint.
inline constexpr double kForwardPush = 0.1;

// Builds the camera from eye and neck markers: origin at the eye midpoint
// pushed kForwardPush along z; x = normalize(eye_left - eye_right);
// y = neck - origin direction, orthogonalized against x; z = x cross y.
// Throws DegenerateCamera for coincident eyes or a neck on the eye line.
CameraFrame build_ego_camera(const Vec3& eye_left, const Vec3& eye_right,
                             const Vec3& neck);
CameraFrame build_ego_camera(const kin::FkResult& fk);

struct ImagePoint {
  double x = 0;      // pixels, origin top-left
  double y = 0;
  double depth = 0;  // meters along the forward axis
  bool in_frame = false;
};

// Pinhole projection. Returns nullopt when the point lies at or behind the
// near plane; out-of-frame points are returned with in_frame = false.
std::optional<ImagePoint> project(const CameraFrame& cam,
                                  const Intrinsics& intr, const Vec3& p);

// Wrist plus 15 finger joints; bones form a tree rooted at the wrist.
struct HandSkeleton {
  enum class Side { Left, Right };
  static constexpr int kJoints = 16;
  static constexpr int kBones = 15;

  std::array<Vec3, kJoints> joints = zero_vec3_array<kJoints>();
  Side side = Side::Left;
  std::array<std::pair<int, int>, kBones> bones{};

  void validate() const;
};

// Canonical bone list: wrist to each of five 3-joint finger chains.
std::array<std::pair<int, int>, HandSkeleton::kBones> canonical_hand_bones();

struct OverlayStats {
  int circles = 0;
  int lines = 0;
};

// Draws joints as filled circles and bones as segments onto the canvas.
// Left hand in red, right hand in blue. Joints culled by the near plane are
// skipped and their bones omitted.
OverlayStats render_hand_overlay(const HandSkeleton& hand,
                                 const CameraFrame& cam,
                                 const Intrinsics& intr, Image& canvas);

// Deterministic rasterization of the landmark scene: fixed gradient
// background, landmark discs sized inversely with depth, far-to-near paint
// order. Same inputs give bit-identical images.
Image render_observation(const SceneSpec& scene, const CameraFrame& cam,
                         const Intrinsics& intr);

}  // namespace ewm::cam
