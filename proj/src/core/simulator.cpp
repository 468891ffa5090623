#include "core/simulator.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ewm {

void SceneSpec::validate() const {
  require(!landmarks.empty(), ErrorCode::InvalidArgument,
          "scene: needs at least one landmark");
  require((bounds.hi.array() > bounds.lo.array()).all(),
          ErrorCode::InvalidArgument, "scene: empty bounds");
  for (const auto& lm : landmarks) {
    require(finite(lm.position) && lm.radius > 0, ErrorCode::InvalidArgument,
            "scene: bad landmark");
    require(bounds.contains(lm.position), ErrorCode::InvalidArgument,
            "scene: landmark outside bounds");
  }
}

}  // namespace ewm

namespace ewm::sim {

SceneSpec make_scene(const SceneConfig& cfg, std::uint64_t seed) {
  require(cfg.landmark_count >= 1, ErrorCode::InvalidArgument,
          "scene: landmark_count must be >= 1");
  require(cfg.radius_min > 0 && cfg.radius_max >= cfg.radius_min,
          ErrorCode::InvalidArgument, "scene: bad radius range");
  SceneSpec scene;
  scene.seed = seed;
  scene.bounds.lo = Vec3(-cfg.bounds_size.x() / 2, 0.0, -cfg.bounds_size.z() / 2);
  scene.bounds.hi = Vec3(cfg.bounds_size.x() / 2, cfg.bounds_size.y(),
                         cfg.bounds_size.z() / 2);
  Rng rng(mix_seed(seed, "scene"));
  scene.landmarks.reserve(cfg.landmark_count);
  for (int i = 0; i < cfg.landmark_count; ++i) {
    Landmark lm;
    for (int c = 0; c < 3; ++c)
      lm.position[c] = rng.uniform(scene.bounds.lo[c], scene.bounds.hi[c]);
    // Saturated colors so landmarks stand out from the gray background.
    int channel = static_cast<int>(rng.uniform_index(3));
    for (int c = 0; c < 3; ++c)
      lm.color[c] = static_cast<std::uint8_t>(
          c == channel ? 160 + rng.uniform_index(96) : rng.uniform_index(128));
    lm.radius = rng.uniform(cfg.radius_min, cfg.radius_max);
    scene.landmarks.push_back(lm);
  }
  scene.validate();
  return scene;
}

void MotionPriorConfig::validate() const {
  require(joint_vel_std >= 0 && root_vel_std >= 0, ErrorCode::InvalidArgument,
          "motion prior: stds must be >= 0");
  require(smoothing >= 0 && smoothing < 1, ErrorCode::InvalidArgument,
          "motion prior: smoothing must be in [0,1)");
  require(limits.lo < limits.hi, ErrorCode::InvalidArgument,
          "motion prior: bad joint limits");
}

MotionSequence sample_motion(const MotionPriorConfig& cfg,
                             const kin::BodyPose& start, int horizon,
                             std::uint64_t seed) {
  cfg.validate();
  require(horizon >= 1, ErrorCode::InvalidArgument,
          "sample_motion: horizon must be >= 1");
  require(start.is_finite(), ErrorCode::InvalidArgument,
          "sample_motion: non-finite start pose");

  Rng rng(mix_seed(seed, "motion"));
  kin::BodyPose pose = start;
  Vec3 root_vel = Vec3::Zero();
  auto joint_vel = zero_vec3_array<kin::kBodyJoints>();

  MotionSequence seq;
  seq.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    kin::Action a;
    for (int c = 0; c < 3; ++c)
      root_vel[c] = cfg.smoothing * root_vel[c] +
                    rng.normal(0.0, cfg.root_vel_std);
    a.delta_root = root_vel;
    for (int j = 0; j < kin::kBodyJoints; ++j)
      for (int c = 0; c < 3; ++c) {
        double v = cfg.smoothing * joint_vel[j][c] +
                   rng.normal(0.0, cfg.joint_vel_std);
        double angle = pose.joint_euler[j][c];
        double clamped =
            std::clamp(angle + v, cfg.limits.lo, cfg.limits.hi) - angle;
        a.delta_joint_euler[j][c] = clamped;
        joint_vel[j][c] = clamped;  // absorb the wall instead of winding up
        pose.joint_euler[j][c] = angle + clamped;
      }
    pose.root_translation += a.delta_root;
    seq.push_back(a);
  }
  return seq;
}

kin::BodyPose sample_start_pose(const SceneSpec& scene,
                                const kin::SkeletonTopology& topo,
                                std::uint64_t seed) {
  scene.validate();
  topo.validate();
  Rng rng(mix_seed(seed, "start-pose"));
  kin::BodyPose pose;
  for (int c = 0; c < 3; ++c)
    pose.root_translation[c] =
        rng.uniform(scene.bounds.lo[c], scene.bounds.hi[c]);
  pose.joint_euler[0][1] = rng.uniform(-M_PI, M_PI);  // heading about +Y
  return pose;
}

namespace {

std::array<feat::Keypoint, 2> project_wrists(const kin::FkResult& fk,
                                             const kin::SkeletonTopology& topo,
                                             const cam::CameraFrame& camera,
                                             const cam::Intrinsics& intr) {
  std::array<feat::Keypoint, 2> kps{};
  const int wrist_idx[2] = {topo.left_wrist_index, topo.right_wrist_index};
  for (int w = 0; w < 2; ++w) {
    auto pt = cam::project(camera, intr, fk.position[wrist_idx[w]]);
    if (pt) {
      kps[w].x = pt->x;
      kps[w].y = pt->y;
      kps[w].confidence = pt->in_frame ? 1.0 : 0.0;
    } else {
      kps[w] = {0.0, 0.0, 0.0};
    }
  }
  return kps;
}

}  // namespace

Episode generate_episode(const SceneSpec& scene, const MotionPriorConfig& cfg,
                         const kin::SkeletonTopology& topo,
                         const cam::Intrinsics& intr, int frames,
                         std::uint64_t seed) {
  require(frames >= 1, ErrorCode::InvalidArgument,
          "generate_episode: frames must be >= 1");
  scene.validate();

  Episode ep;
  ep.poses.reserve(frames);
  ep.images.reserve(frames);
  ep.wrists.reserve(frames);

  ep.poses.push_back(sample_start_pose(scene, topo, mix_seed(seed, "episode-start")));
  if (frames > 1) {
    ep.actions = sample_motion(cfg, ep.poses[0], frames - 1,
                               mix_seed(seed, "episode-motion"));
    for (const auto& a : ep.actions)
      ep.poses.push_back(kin::apply_action(ep.poses.back(), a, cfg.limits));
  }
  for (const auto& pose : ep.poses) {
    kin::FkResult fk = kin::forward_kinematics(pose, topo);
    cam::CameraFrame camera = cam::build_ego_camera(fk);
    ep.images.push_back(cam::render_observation(scene, camera, intr));
    ep.wrists.push_back(project_wrists(fk, topo, camera, intr));
  }
  return ep;
}

std::pair<kin::BodyPose, Image> oracle_next_observation(
    const SceneSpec& scene, const kin::BodyPose& pose, const kin::Action& action,
    const kin::SkeletonTopology& topo, const cam::Intrinsics& intr,
    const kin::JointLimits& limits) {
  kin::BodyPose next = kin::apply_action(pose, action, limits);
  kin::FkResult fk = kin::forward_kinematics(next, topo);
  cam::CameraFrame camera = cam::build_ego_camera(fk);
  return {next, cam::render_observation(scene, camera, intr)};
}

std::vector<wm::LatentState> OracleRollout::rollout(
    std::span<const wm::LatentState> /*context*/,
    std::span<const kin::Action> actions) const {
  std::vector<wm::LatentState> out;
  out.reserve(actions.size());
  kin::BodyPose pose = start_;
  for (const auto& a : actions) {
    auto [next, img] = oracle_next_observation(scene_, pose, a, topo_, intr_,
                                               limits_);
    pose = next;
    out.push_back(feat::encode(img, enc_));
  }
  return out;
}

}  // namespace ewm::sim
