#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/geom.hpp"

namespace ewm::kin {

inline constexpr int kBodyJoints = 22;
inline constexpr int kXsensJoints = 23;
inline constexpr int kActionDim = 3 + kBodyJoints * 3;  // 69

// Body skeleton: tree rooted at joint 0, rest offsets in the parent frame.
// Eye markers are carried as offsets in the head-joint frame because the
// 22-joint body skeleton has no eye joints of its own.
struct SkeletonTopology {
  int joint_count = kBodyJoints;
  std::array<int, kBodyJoints> parent_index{};      // -1 for the root
  std::array<Vec3, kBodyJoints> rest_offset{};      // meters, parent frame
  std::array<std::string, kBodyJoints> joint_name{};
  int head_index = 0;
  int neck_index = 0;
  int left_wrist_index = 0;
  int right_wrist_index = 0;
  Vec3 eye_offset_left = Vec3::Zero();   // head-joint frame
  Vec3 eye_offset_right = Vec3::Zero();

  void validate() const;
};

// Default humanoid, 1.7 m tall, standing along +Y and facing +Z at the
// zero pose with arms extended forward.
const SkeletonTopology& default_topology();

// Structured-text topology files (see docs/formats.md).
SkeletonTopology load_topology(const std::string& path);
void save_topology(const SkeletonTopology& topo, const std::string& path);

struct BodyPose {
  Vec3 root_translation = Vec3::Zero();               // meters, world frame
  std::array<Vec3, kBodyJoints> joint_euler =
      zero_vec3_array<kBodyJoints>();  // radians, parent-relative

  bool is_finite() const;
  bool operator==(const BodyPose& o) const;
};

// Per-step motion delta: world-frame root change plus per-joint Euler deltas.
struct Action {
  Vec3 delta_root = Vec3::Zero();
  std::array<Vec3, kBodyJoints> delta_joint_euler = zero_vec3_array<kBodyJoints>();

  bool is_finite() const;
  bool operator==(const Action& o) const;
};

using ActionVec = std::array<double, kActionDim>;

// Layout: [delta_root(3), joint 0 euler(3), ..., joint 21 euler(3)].
ActionVec flatten_action(const Action& a);
Action unflatten_action(const ActionVec& v);

// Symmetric per-component angle limits, radians.
struct JointLimits {
  double lo = -M_PI;
  double hi = M_PI;
};

// Adds the deltas, then clamps each joint angle to the limits. The root
// translation is never clamped.
BodyPose apply_action(const BodyPose& p, const Action& a,
                      const JointLimits& limits = {});

// Componentwise difference p2 - p1; apply_action(p1, result) == p2 exactly
// whenever no clamping triggers.
Action action_between(const BodyPose& p1, const BodyPose& p2);

struct FkResult {
  std::array<Vec3, kBodyJoints> position{};   // world, meters
  std::array<Mat3, kBodyJoints> rotation{};   // world orientation per joint
  Vec3 eye_left = Vec3::Zero();
  Vec3 eye_right = Vec3::Zero();
  Vec3 neck = Vec3::Zero();
};

FkResult forward_kinematics(const BodyPose& p, const SkeletonTopology& topo);

// Motion-suit skeleton with the four-joint torso chain.
struct XsensPose {
  Vec3 root_translation = Vec3::Zero();
  std::array<Vec3, kXsensJoints> joint_euler = zero_vec3_array<kXsensJoints>();
};

// Index table between the 23-joint suit skeleton and the 22-joint body
// skeleton. The torso chain is fixed (L5/T12/T8 onto the three spine
// joints, L3 dropped); everything else is data-driven.
struct JointMap {
  int l5 = 1, l3 = 2, t12 = 3, t8 = 4;                // suit torso indices
  std::array<int, 3> spine_targets{3, 6, 9};          // body spine joints
  std::vector<std::pair<int, int>> pairs;             // (suit, body), non-torso

  void validate() const;
};

const JointMap& default_joint_map();
JointMap load_joint_map(const std::string& path);
void save_joint_map(const JointMap& map, const std::string& path);

// Drops L3; maps L5/T12/T8 onto the spine chain and the rest by table.
BodyPose xsens_to_smpl(const XsensPose& x, const JointMap& map = default_joint_map());

// Inverse mapping; the L3 slot is filled by duplicating the body joint
// that L5 maps onto.
XsensPose smpl_to_xsens(const BodyPose& p, const JointMap& map = default_joint_map());

}  // namespace ewm::kin
