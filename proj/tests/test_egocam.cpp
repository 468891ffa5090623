#include <doctest.h>

#include "core/egocam.hpp"
#include "core/error.hpp"
#include "helpers.hpp"

using namespace ewm;
using namespace ewm::cam;

namespace {

// Independent 3-vector algebra for the construction oracle.
Vec3 xcross(const Vec3& a, const Vec3& b) {
  return Vec3(a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(),
              a.x() * b.y() - a.y() * b.x());
}

}  // namespace

TEST_CASE("camera construction matches hand geometry") {
  Vec3 eye_l(-0.03, 1.6, 0), eye_r(0.03, 1.6, 0), neck(0, 1.45, 0);
  CameraFrame cf = build_ego_camera(eye_l, eye_r, neck);

  CHECK((cf.x_axis - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((cf.y_axis - Vec3(0, -1, 0)).norm() < 1e-12);
  // z = x cross y, checked against an independent cross product.
  CHECK((cf.z_axis - xcross(cf.x_axis, cf.y_axis)).norm() == 0.0);
  CHECK((cf.z_axis - Vec3(0, 0, 1)).norm() < 1e-12);
  // Origin is the eye midpoint pushed 0.1 m along the forward axis.
  Vec3 center(0, 1.6, 0);
  CHECK((cf.origin - (center + 0.1 * cf.z_axis)).norm() < 1e-12);
  CHECK(std::abs((cf.origin - center).norm() - 0.1) < 1e-12);
}

TEST_CASE("camera construction rejects degenerate inputs") {
  Vec3 eye(0.1, 1.6, 0.2), neck(0, 1.4, 0);
  CHECK_THROWS_AS(build_ego_camera(eye, eye, neck), Error);
  try {
    build_ego_camera(eye, eye, neck);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCamera);
  }

  // Neck on the eye axis.
  Vec3 eye_l(-0.03, 1.6, 0), eye_r(0.03, 1.6, 0);
  CHECK_THROWS_AS(build_ego_camera(eye_l, eye_r, Vec3(0.2, 1.6, 0)), Error);
}

TEST_CASE("camera axes are orthonormal and right-handed") {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    Vec3 eye_l(rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(-1, 1));
    Vec3 eye_r = eye_l + Vec3(rng.uniform(0.02, 0.1), rng.uniform(-0.02, 0.02),
                              rng.uniform(-0.02, 0.02));
    Vec3 neck(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5), rng.uniform(-1, 1));
    CameraFrame cf;
    try {
      cf = build_ego_camera(eye_l, eye_r, neck);
    } catch (const Error&) {
      continue;  // rare collinear sample
    }
    CHECK(std::abs(cf.x_axis.norm() - 1.0) < 1e-9);
    CHECK(std::abs(cf.y_axis.norm() - 1.0) < 1e-9);
    CHECK(std::abs(cf.z_axis.norm() - 1.0) < 1e-9);
    CHECK(std::abs(cf.x_axis.dot(cf.y_axis)) < 1e-9);
    CHECK(std::abs(cf.x_axis.dot(cf.z_axis)) < 1e-9);
    CHECK(std::abs(cf.y_axis.dot(cf.z_axis)) < 1e-9);
    Mat3 basis;
    basis.col(0) = cf.x_axis;
    basis.col(1) = cf.y_axis;
    basis.col(2) = cf.z_axis;
    CHECK(std::abs(basis.determinant() - 1.0) < 1e-9);
  }
}

namespace {

CameraFrame canonical_camera() {
  return build_ego_camera(Vec3(-0.03, 1.6, 0), Vec3(0.03, 1.6, 0),
                          Vec3(0, 1.45, -0.2));
}

}  // namespace

TEST_CASE("projection maps the optical axis to the image center") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  auto pt = project(cf, intr, cf.origin + 1.0 * cf.z_axis);
  REQUIRE(pt.has_value());
  CHECK(pt->x == doctest::Approx(112.0).epsilon(1e-12));
  CHECK(pt->y == doctest::Approx(112.0).epsilon(1e-12));
  CHECK(pt->depth == doctest::Approx(1.0));
  CHECK(pt->in_frame);
}

TEST_CASE("projection culls at and behind the near plane") {
  // Axis-exact camera so the boundary depth is representable exactly.
  CameraFrame cf = build_ego_camera(Vec3(-0.03, 1.6, 0), Vec3(0.03, 1.6, 0),
                                    Vec3(0, 1.45, 0));
  Intrinsics intr;
  REQUIRE(cf.z_axis == Vec3(0, 0, 1));
  CHECK(!project(cf, intr, cf.origin + intr.near_plane * cf.z_axis));
  CHECK(!project(cf, intr, cf.origin - 0.5 * cf.z_axis));
  CHECK(project(cf, intr, cf.origin + (intr.near_plane + 1e-9) * cf.z_axis));
}

TEST_CASE("projection mirrors x-symmetric points about the center column") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Rng rng(22);
  for (int i = 0; i < 25; ++i) {
    double dx = rng.uniform(0.05, 0.5), dy = rng.uniform(-0.5, 0.5);
    double depth = rng.uniform(0.5, 4.0);
    auto a = project(cf, intr, cf.origin + depth * cf.z_axis + dx * cf.x_axis + dy * cf.y_axis);
    auto b = project(cf, intr, cf.origin + depth * cf.z_axis - dx * cf.x_axis + dy * cf.y_axis);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->x - 112.0 == doctest::Approx(112.0 - b->x).epsilon(1e-12));
    CHECK(a->y == doctest::Approx(b->y).epsilon(1e-12));
  }
}

TEST_CASE("projection is scale-consistent along a ray") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Vec3 dir = (0.3 * cf.x_axis - 0.2 * cf.y_axis + 1.0 * cf.z_axis);
  auto near_pt = project(cf, intr, cf.origin + dir);
  auto far_pt = project(cf, intr, cf.origin + 2.0 * dir);
  REQUIRE(near_pt.has_value());
  REQUIRE(far_pt.has_value());
  CHECK(near_pt->x == doctest::Approx(far_pt->x).epsilon(1e-12));
  CHECK(near_pt->y == doctest::Approx(far_pt->y).epsilon(1e-12));
}

TEST_CASE("projection flags out-of-frame points instead of dropping them") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  auto pt = project(cf, intr, cf.origin + cf.z_axis + 5.0 * cf.x_axis);
  REQUIRE(pt.has_value());
  CHECK(!pt->in_frame);
  CHECK(pt->x > intr.image_width);
}

namespace {

HandSkeleton test_hand(const CameraFrame& cf, HandSkeleton::Side side,
                       double depth) {
  HandSkeleton hand;
  hand.side = side;
  hand.bones = canonical_hand_bones();
  hand.joints[0] = cf.origin + depth * cf.z_axis;  // wrist
  for (int finger = 0; finger < 5; ++finger)
    for (int seg = 0; seg < 3; ++seg)
      hand.joints[1 + 3 * finger + seg] =
          hand.joints[0] + (0.02 + 0.02 * seg) * cf.x_axis +
          0.01 * (finger - 2) * cf.y_axis;
  return hand;
}

}  // namespace

TEST_CASE("hand overlay draws 16 circles and at most 15 lines") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Image canvas(intr.image_width, intr.image_height, 0);
  OverlayStats stats = render_hand_overlay(
      test_hand(cf, HandSkeleton::Side::Left, 0.6), cf, intr, canvas);
  CHECK(stats.circles == 16);
  CHECK(stats.lines <= 15);
  CHECK(stats.lines == 15);  // fully visible hand keeps every bone
}

TEST_CASE("hand overlay skips a hand behind the camera") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Image canvas(intr.image_width, intr.image_height, 7);
  Image before = canvas;
  OverlayStats stats = render_hand_overlay(
      test_hand(cf, HandSkeleton::Side::Left, -1.0), cf, intr, canvas);
  CHECK(stats.circles == 0);
  CHECK(stats.lines == 0);
  CHECK(canvas == before);
}

TEST_CASE("left and right hands use distinct color channels") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Image left_canvas(intr.image_width, intr.image_height, 0);
  Image right_canvas(intr.image_width, intr.image_height, 0);
  render_hand_overlay(test_hand(cf, HandSkeleton::Side::Left, 0.6), cf, intr,
                      left_canvas);
  render_hand_overlay(test_hand(cf, HandSkeleton::Side::Right, 0.6), cf, intr,
                      right_canvas);
  long red_left = 0, blue_left = 0, red_right = 0, blue_right = 0;
  for (std::size_t i = 0; i < left_canvas.rgb.size(); i += 3) {
    red_left += left_canvas.rgb[i];
    blue_left += left_canvas.rgb[i + 2];
    red_right += right_canvas.rgb[i];
    blue_right += right_canvas.rgb[i + 2];
  }
  CHECK(red_left > 0);
  CHECK(blue_left == 0);
  CHECK(blue_right > 0);
  CHECK(red_right == 0);
}

TEST_CASE("hand overlay validates canvas and bone topology") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  Image small(10, 10);
  CHECK_THROWS_AS(render_hand_overlay(test_hand(cf, HandSkeleton::Side::Left, 0.6),
                                      cf, intr, small),
                  Error);
  HandSkeleton broken = test_hand(cf, HandSkeleton::Side::Left, 0.6);
  broken.bones[3] = {4, 4};  // self loop
  Image canvas(intr.image_width, intr.image_height);
  CHECK_THROWS_AS(render_hand_overlay(broken, cf, intr, canvas), Error);
}

TEST_CASE("render_observation: empty scene gives the backdrop only") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  SceneSpec scene;  // no landmarks
  Image img = render_observation(scene, cf, intr);
  // Backdrop is grayscale and deterministic.
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    CHECK(img.rgb[i] == img.rgb[i + 1]);
    CHECK(img.rgb[i + 1] == img.rgb[i + 2]);
  }
  CHECK(img == render_observation(scene, cf, intr));

  // The backdrop is anchored to the world: a rotated camera sees a
  // different image even with nothing in the scene.
  CameraFrame turned = build_ego_camera(Vec3(0, 1.6, -0.03), Vec3(0, 1.6, 0.03),
                                        Vec3(0, 1.45, -0.2));
  CHECK(!(render_observation(scene, turned, intr) == img));
}

TEST_CASE("render_observation is bit-deterministic") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  SceneSpec scene;
  scene.bounds.lo = Vec3(-3, 0, -3);
  scene.bounds.hi = Vec3(3, 3, 3);
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    Landmark lm;
    lm.position = cf.origin + Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                   rng.uniform(0.5, 2.5));
    lm.color = {static_cast<std::uint8_t>(rng.uniform_index(256)),
                static_cast<std::uint8_t>(rng.uniform_index(256)),
                static_cast<std::uint8_t>(rng.uniform_index(256))};
    lm.radius = rng.uniform(0.05, 0.3);
    scene.landmarks.push_back(lm);
  }
  Image a = render_observation(scene, cf, intr);
  Image b = render_observation(scene, cf, intr);
  CHECK(image_hash(a) == image_hash(b));
  CHECK(a == b);
}

TEST_CASE("render_observation culls landmarks behind the camera") {
  CameraFrame cf = canonical_camera();
  Intrinsics intr;
  SceneSpec empty;
  Image background = render_observation(empty, cf, intr);

  SceneSpec behind;
  Landmark lm;
  lm.position = cf.origin - 1.0 * cf.z_axis;
  lm.color = {255, 0, 0};
  lm.radius = 0.5;
  behind.landmarks.push_back(lm);
  Image img = render_observation(behind, cf, intr);
  CHECK(img == background);
}
