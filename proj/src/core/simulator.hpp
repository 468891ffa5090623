#pragma once

#include <span>
#include <cstdint>
#include <vector>

#include "core/egocam.hpp"
#include "core/features.hpp"
#include "core/kinematics.hpp"
#include "core/scene.hpp"
#include "core/worldmodel.hpp"

namespace ewm::sim {

struct SceneConfig {
  int landmark_count = 40;
  Vec3 bounds_size = Vec3(6.0, 3.0, 6.0);  // box x in [-3,3], y in [0,3], z in [-3,3]
  double radius_min = 0.12;
  double radius_max = 0.35;
};

SceneSpec make_scene(const SceneConfig& cfg, std::uint64_t seed);

// Order-1 autoregressive Gaussian velocity prior: v' = smoothing * v + eps.
struct MotionPriorConfig {
  double joint_vel_std = 0.02;   // rad/step
  double root_vel_std = 0.04;    // m/step
  double smoothing = 0.75;       // in [0,1)
  kin::JointLimits limits{};
  std::uint64_t seed = 0;

  void validate() const;
};

using MotionSequence = std::vector<kin::Action>;

// Smoothed Gaussian random walk on per-joint and root velocities. Deltas are
// pre-clamped so the running pose never leaves the joint limits; the
// post-clamp delta feeds back as the velocity. Deterministic per seed.
MotionSequence sample_motion(const MotionPriorConfig& cfg,
                             const kin::BodyPose& start, int horizon,
                             std::uint64_t seed);

struct Episode {
  std::vector<kin::BodyPose> poses;                      // frames
  MotionSequence actions;                                // frames - 1
  std::vector<Image> images;                             // frames
  std::vector<std::array<feat::Keypoint, 2>> wrists;     // frames x {left,right}
};

// Standing rest pose at a uniformly sampled in-bounds root position with a
// uniform random heading about the vertical axis.
kin::BodyPose sample_start_pose(const SceneSpec& scene,
                                const kin::SkeletonTopology& topo,
                                std::uint64_t seed);

// Full synthetic episode: motion from the prior, per-frame egocentric render,
// wrist keypoints from projected FK wrists (confidence 1 in frame, else 0).
// Every byte is fixed by (scene, cfg, frames, seed).
Episode generate_episode(const SceneSpec& scene, const MotionPriorConfig& cfg,
                         const kin::SkeletonTopology& topo,
                         const cam::Intrinsics& intr, int frames,
                         std::uint64_t seed);

// Ground-truth dynamics: apply the action, rebuild the camera, render.
std::pair<kin::BodyPose, Image> oracle_next_observation(
    const SceneSpec& scene, const kin::BodyPose& pose, const kin::Action& action,
    const kin::SkeletonTopology& topo, const cam::Intrinsics& intr,
    const kin::JointLimits& limits = {});

// Brute-force dynamics oracle for planner tests: rolls actions through the
// simulator from a fixed start pose and encodes the rendered frames.
class OracleRollout final : public wm::RolloutModel {
 public:
  OracleRollout(const SceneSpec& scene, const kin::BodyPose& start,
                const kin::SkeletonTopology& topo, const cam::Intrinsics& intr,
                const feat::EncoderConfig& enc, kin::JointLimits limits = {})
      : scene_(scene), start_(start), topo_(topo), intr_(intr), enc_(enc),
        limits_(limits) {}

  std::vector<wm::LatentState> rollout(
      std::span<const wm::LatentState> context,
      std::span<const kin::Action> actions) const override;

 private:
  SceneSpec scene_;
  kin::BodyPose start_;
  kin::SkeletonTopology topo_;
  cam::Intrinsics intr_;
  feat::EncoderConfig enc_;
  kin::JointLimits limits_;
};

}  // namespace ewm::sim
