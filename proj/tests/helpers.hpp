#pragma once

#include <filesystem>
#include <string>

#include "core/kinematics.hpp"
#include "core/rng.hpp"

namespace ewm::test {

inline kin::BodyPose random_pose(Rng& rng, double angle_range = 1.0) {
  kin::BodyPose p;
  for (int c = 0; c < 3; ++c) p.root_translation[c] = rng.uniform(-2.0, 2.0);
  for (int j = 0; j < kin::kBodyJoints; ++j)
    for (int c = 0; c < 3; ++c)
      p.joint_euler[j][c] = rng.uniform(-angle_range, angle_range);
  return p;
}

inline kin::Action random_action(Rng& rng, double scale = 0.1) {
  kin::Action a;
  for (int c = 0; c < 3; ++c) a.delta_root[c] = rng.uniform(-scale, scale);
  for (int j = 0; j < kin::kBodyJoints; ++j)
    for (int c = 0; c < 3; ++c)
      a.delta_joint_euler[j][c] = rng.uniform(-scale, scale);
  return a;
}

inline kin::XsensPose random_xsens(Rng& rng) {
  kin::XsensPose x;
  for (int c = 0; c < 3; ++c) x.root_translation[c] = rng.uniform(-2.0, 2.0);
  for (int j = 0; j < kin::kXsensJoints; ++j)
    for (int c = 0; c < 3; ++c) x.joint_euler[j][c] = rng.uniform(-3.0, 3.0);
  return x;
}

// Unique scratch directory per test, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ewm_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ewm::test
