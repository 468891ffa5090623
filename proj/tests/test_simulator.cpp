#include <doctest.h>

#include <chrono>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/simulator.hpp"
#include "helpers.hpp"

using namespace ewm;
using namespace ewm::sim;

namespace {

RunConfig cfg() { return RunConfig::defaults(); }

}  // namespace

TEST_CASE("zero stds give all-zero actions") {
  MotionPriorConfig prior;
  prior.joint_vel_std = 0.0;
  prior.root_vel_std = 0.0;
  auto seq = sample_motion(prior, kin::BodyPose{}, 10, 7);
  CHECK(seq.size() == 10);
  for (const auto& a : seq) CHECK(a == kin::Action{});
}

TEST_CASE("sample_motion is deterministic per seed and horizon-sized") {
  MotionPriorConfig prior;
  auto a = sample_motion(prior, kin::BodyPose{}, 8, 99);
  auto b = sample_motion(prior, kin::BodyPose{}, 8, 99);
  auto c = sample_motion(prior, kin::BodyPose{}, 8, 100);
  CHECK(a.size() == 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t] == b[t]);
  bool any_diff = false;
  for (std::size_t t = 0; t < a.size(); ++t)
    if (!(a[t] == c[t])) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("sampled motion never violates joint limits") {
  MotionPriorConfig prior;
  prior.joint_vel_std = 0.8;  // aggressive, forces clamping
  prior.smoothing = 0.9;
  prior.limits = {-1.0, 1.0};
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    kin::BodyPose pose;
    auto seq = sample_motion(prior, pose, 50, 500 + trial);
    for (const auto& a : seq) {
      pose = kin::apply_action(pose, a, prior.limits);
      for (int j = 0; j < kin::kBodyJoints; ++j)
        for (int c = 0; c < 3; ++c) {
          CHECK(pose.joint_euler[j][c] <= 1.0);
          CHECK(pose.joint_euler[j][c] >= -1.0);
        }
    }
  }
}

TEST_CASE("sample_motion validates its inputs") {
  MotionPriorConfig prior;
  CHECK_THROWS_AS(sample_motion(prior, kin::BodyPose{}, 0, 1), Error);
  prior.smoothing = 1.0;
  CHECK_THROWS_AS(sample_motion(prior, kin::BodyPose{}, 5, 1), Error);
  prior = MotionPriorConfig{};
  prior.joint_vel_std = -0.1;
  CHECK_THROWS_AS(sample_motion(prior, kin::BodyPose{}, 5, 1), Error);
}

TEST_CASE("make_scene stays inside bounds and honors the count") {
  SceneConfig sc;
  SceneSpec scene = make_scene(sc, 42);
  scene.validate();
  CHECK(scene.landmarks.size() == 40);
  for (const auto& lm : scene.landmarks) CHECK(scene.bounds.contains(lm.position));
}

TEST_CASE("episode actions replay exactly onto the stored poses") {
  auto c = cfg();
  SceneSpec scene = make_scene(c.scene(), 7);
  Episode ep = generate_episode(scene, c.motion_prior(), c.topology(),
                                c.intrinsics(), 12, 77);
  REQUIRE(ep.poses.size() == 12);
  REQUIRE(ep.actions.size() == 11);
  REQUIRE(ep.images.size() == 12);
  REQUIRE(ep.wrists.size() == 12);
  for (std::size_t t = 0; t < ep.actions.size(); ++t) {
    kin::BodyPose next =
        kin::apply_action(ep.poses[t], ep.actions[t], c.motion_prior().limits);
    CHECK(next == ep.poses[t + 1]);
  }
}

TEST_CASE("episode wrist keypoints equal projected FK wrists") {
  auto c = cfg();
  auto topo = c.topology();
  auto intr = c.intrinsics();
  SceneSpec scene = make_scene(c.scene(), 8);
  Episode ep = generate_episode(scene, c.motion_prior(), topo, intr, 10, 78);
  for (std::size_t t = 0; t < ep.poses.size(); ++t) {
    kin::FkResult fk = kin::forward_kinematics(ep.poses[t], topo);
    auto camera = cam::build_ego_camera(fk);
    const int wrist_idx[2] = {topo.left_wrist_index, topo.right_wrist_index};
    for (int w = 0; w < 2; ++w) {
      auto pt = cam::project(camera, intr, fk.position[wrist_idx[w]]);
      if (pt && pt->in_frame) {
        CHECK(ep.wrists[t][w].confidence == 1.0);
        CHECK(ep.wrists[t][w].x == pt->x);
        CHECK(ep.wrists[t][w].y == pt->y);
      } else {
        CHECK(ep.wrists[t][w].confidence == 0.0);
      }
    }
  }
}

TEST_CASE("zero-motion episodes repeat the first frame") {
  auto c = cfg();
  MotionPriorConfig still = c.motion_prior();
  still.joint_vel_std = 0.0;
  still.root_vel_std = 0.0;
  SceneSpec scene = make_scene(c.scene(), 9);
  Episode ep = generate_episode(scene, still, c.topology(), c.intrinsics(), 6, 79);
  for (std::size_t t = 1; t < ep.images.size(); ++t) CHECK(ep.images[t] == ep.images[0]);
}

TEST_CASE("episodes are byte-deterministic in scene and seed") {
  auto c = cfg();
  SceneSpec scene = make_scene(c.scene(), 10);
  Episode a = generate_episode(scene, c.motion_prior(), c.topology(), c.intrinsics(), 8, 80);
  Episode b = generate_episode(scene, c.motion_prior(), c.topology(), c.intrinsics(), 8, 80);
  REQUIRE(a.images.size() == b.images.size());
  for (std::size_t t = 0; t < a.images.size(); ++t) {
    CHECK(a.images[t] == b.images[t]);
    CHECK(a.poses[t] == b.poses[t]);
  }
}

TEST_CASE("oracle step with a zero action re-renders the same frame") {
  auto c = cfg();
  SceneSpec scene = make_scene(c.scene(), 11);
  kin::BodyPose pose = sample_start_pose(scene, c.topology(), 81);
  auto [next, img] = oracle_next_observation(scene, pose, kin::Action{},
                                             c.topology(), c.intrinsics());
  CHECK(next == pose);
  kin::FkResult fk = kin::forward_kinematics(pose, c.topology());
  Image direct = cam::render_observation(scene, cam::build_ego_camera(fk), c.intrinsics());
  CHECK(img == direct);
}

TEST_CASE("oracle steps compose like summed actions when no clamping") {
  auto c = cfg();
  SceneSpec scene = make_scene(c.scene(), 12);
  kin::BodyPose pose = sample_start_pose(scene, c.topology(), 82);
  Rng rng(83);
  kin::Action a1 = test::random_action(rng, 0.05);
  kin::Action a2 = test::random_action(rng, 0.05);
  auto [p1, img1] = oracle_next_observation(scene, pose, a1, c.topology(), c.intrinsics());
  auto [p2, img2] = oracle_next_observation(scene, p1, a2, c.topology(), c.intrinsics());

  kin::Action sum;
  sum.delta_root = a1.delta_root + a2.delta_root;
  for (int j = 0; j < kin::kBodyJoints; ++j)
    sum.delta_joint_euler[j] = a1.delta_joint_euler[j] + a2.delta_joint_euler[j];
  auto [direct, img_direct] =
      oracle_next_observation(scene, pose, sum, c.topology(), c.intrinsics());
  CHECK((direct.root_translation - p2.root_translation).norm() < 1e-12);
  for (int j = 0; j < kin::kBodyJoints; ++j)
    CHECK((direct.joint_euler[j] - p2.joint_euler[j]).norm() < 1e-12);
}

TEST_CASE("oracle matches generate_episode frame by frame") {
  auto c = cfg();
  SceneSpec scene = make_scene(c.scene(), 13);
  Episode ep = generate_episode(scene, c.motion_prior(), c.topology(), c.intrinsics(), 8, 84);
  kin::BodyPose pose = ep.poses[0];
  for (std::size_t t = 0; t < ep.actions.size(); ++t) {
    auto [next, img] = oracle_next_observation(scene, pose, ep.actions[t],
                                               c.topology(), c.intrinsics(),
                                               c.motion_prior().limits);
    CHECK(next == ep.poses[t + 1]);
    CHECK(img == ep.images[t + 1]);
    pose = next;
  }
}

TEST_CASE("episode generation meets the throughput budget") {
  auto c = cfg();
  auto start = std::chrono::steady_clock::now();
  std::uint64_t checksum = 0;
  for (int e = 0; e < 200; ++e) {
    SceneSpec scene = make_scene(c.scene(), 9000 + e);
    Episode ep = generate_episode(scene, c.motion_prior(), c.topology(),
                                  c.intrinsics(), 25, 9100 + e);
    checksum ^= image_hash(ep.images.back());
  }
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  CHECK(checksum != 0);
  CHECK(elapsed.count() < 60.0);
}
