#include "core/egocam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace ewm::cam {

namespace {
constexpr double kDegenerateEps = 1e-9;

void draw_disc(Image& img, double cx, double cy, double radius,
               const std::uint8_t color[3]) {
  int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + radius)));
  int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + radius)));
  double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r2) img.set(x, y, color[0], color[1], color[2]);
    }
}

void draw_segment(Image& img, double x0, double y0, double x1, double y1,
                  const std::uint8_t color[3]) {
  int steps = static_cast<int>(
      std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0))));
  for (int i = 0; i <= steps; ++i) {
    double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
    int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    if (img.in_bounds(x, y)) img.set(x, y, color[0], color[1], color[2]);
  }
}

}  // namespace

void Intrinsics::validate() const {
  require(image_width > 0 && image_height > 0, ErrorCode::InvalidArgument,
          "intrinsics: image dimensions must be positive");
  require(vertical_fov > 0 && vertical_fov < M_PI, ErrorCode::InvalidArgument,
          "intrinsics: vertical_fov must be in (0, pi)");
  require(near_plane > 0, ErrorCode::InvalidArgument,
          "intrinsics: near_plane must be positive");
}

double Intrinsics::focal_px() const {
  return (image_height / 2.0) / std::tan(vertical_fov / 2.0);
}

CameraFrame build_ego_camera(const Vec3& eye_left, const Vec3& eye_right,
                             const Vec3& neck) {
  require(finite(eye_left) && finite(eye_right) && finite(neck),
          ErrorCode::InvalidArgument, "camera: non-finite markers");
  Vec3 center = 0.5 * (eye_left + eye_right);
  Vec3 x_raw = eye_left - eye_right;
  double x_len = x_raw.norm();
  require(x_len > kDegenerateEps, ErrorCode::DegenerateCamera,
          "camera: coincident eyes");
  Vec3 x = x_raw / x_len;

  Vec3 y_raw = neck - center;
  Vec3 y_orth = y_raw - y_raw.dot(x) * x;
  double y_len = y_orth.norm();
  require(y_len > kDegenerateEps, ErrorCode::DegenerateCamera,
          "camera: neck collinear with the eye axis");
  Vec3 y = y_orth / y_len;

  CameraFrame cf;
  cf.x_axis = x;
  cf.y_axis = y;
  cf.z_axis = x.cross(y);
  cf.origin = center + kForwardPush * cf.z_axis;
  return cf;
}

CameraFrame build_ego_camera(const kin::FkResult& fk) {
  return build_ego_camera(fk.eye_left, fk.eye_right, fk.neck);
}

std::optional<ImagePoint> project(const CameraFrame& cam,
                                  const Intrinsics& intr, const Vec3& p) {
  intr.validate();
  Vec3 d = p - cam.origin;
  double depth = d.dot(cam.z_axis);
  if (depth <= intr.near_plane) return std::nullopt;
  double f = intr.focal_px();
  ImagePoint pt;
  pt.depth = depth;
  pt.x = intr.image_width / 2.0 + f * d.dot(cam.x_axis) / depth;
  pt.y = intr.image_height / 2.0 + f * d.dot(cam.y_axis) / depth;
  pt.in_frame = pt.x >= 0 && pt.x < intr.image_width && pt.y >= 0 &&
                pt.y < intr.image_height;
  return pt;
}

void HandSkeleton::validate() const {
  std::array<bool, kJoints> reached{};
  reached[0] = true;  // wrist
  int frontier = 1;
  // Bones must connect each non-wrist joint into a tree rooted at joint 0.
  std::array<int, kJoints> parent{};
  parent.fill(-1);
  for (const auto& [a, b] : bones) {
    require(a >= 0 && a < kJoints && b > 0 && b < kJoints && a != b,
            ErrorCode::InvalidArgument, "hand: bad bone indices");
    require(parent[b] == -1, ErrorCode::InvalidArgument,
            "hand: joint has two parents");
    parent[b] = a;
  }
  while (frontier != 0) {
    frontier = 0;
    for (int j = 1; j < kJoints; ++j)
      if (!reached[j] && parent[j] >= 0 && reached[parent[j]]) {
        reached[j] = true;
        frontier = 1;
      }
  }
  require(std::all_of(reached.begin(), reached.end(), [](bool r) { return r; }),
          ErrorCode::InvalidArgument, "hand: bones do not form a wrist-rooted tree");
}

std::array<std::pair<int, int>, HandSkeleton::kBones> canonical_hand_bones() {
  std::array<std::pair<int, int>, HandSkeleton::kBones> bones{};
  int b = 0;
  for (int finger = 0; finger < 5; ++finger) {
    int base = 1 + 3 * finger;
    bones[b++] = {0, base};
    bones[b++] = {base, base + 1};
    bones[b++] = {base + 1, base + 2};
  }
  return bones;
}

OverlayStats render_hand_overlay(const HandSkeleton& hand,
                                 const CameraFrame& cam,
                                 const Intrinsics& intr, Image& canvas) {
  hand.validate();
  require(canvas.width == intr.image_width && canvas.height == intr.image_height,
          ErrorCode::InvalidArgument, "overlay: canvas does not match intrinsics");
  const std::uint8_t red[3] = {255, 0, 0};
  const std::uint8_t blue[3] = {0, 0, 255};
  const std::uint8_t* color = hand.side == HandSkeleton::Side::Left ? red : blue;

  std::array<std::optional<ImagePoint>, HandSkeleton::kJoints> pts;
  for (int j = 0; j < HandSkeleton::kJoints; ++j)
    pts[j] = project(cam, intr, hand.joints[j]);

  OverlayStats stats;
  constexpr double kJointRadiusPx = 3.0;
  for (int j = 0; j < HandSkeleton::kJoints; ++j) {
    if (!pts[j]) continue;
    draw_disc(canvas, pts[j]->x, pts[j]->y, kJointRadiusPx, color);
    ++stats.circles;
  }
  for (const auto& [a, b] : hand.bones) {
    if (!pts[a] || !pts[b]) continue;
    draw_segment(canvas, pts[a]->x, pts[a]->y, pts[b]->x, pts[b]->y, color);
    ++stats.lines;
  }
  return stats;
}

Image render_observation(const SceneSpec& scene, const CameraFrame& cam,
                         const Intrinsics& intr) {
  intr.validate();
  Image img(intr.image_width, intr.image_height);
  // World-anchored backdrop: shade is a fixed function of each pixel's view
  // direction, so every camera orientation produces a distinct image even
  // with no landmark in sight.
  double f = intr.focal_px();
  double cx = intr.image_width / 2.0, cy = intr.image_height / 2.0;
  for (int y = 0; y < img.height; ++y) {
    double vy = (y + 0.5 - cy) / f;
    for (int x = 0; x < img.width; ++x) {
      double vx = (x + 0.5 - cx) / f;
      Vec3 d = vx * cam.x_axis + vy * cam.y_axis + cam.z_axis;
      d /= d.norm();
      double shade =
          96.0 + 44.0 * d.y() + 26.0 * d.x() + 18.0 * d.z() + 14.0 * d.x() * d.z();
      auto s = static_cast<std::uint8_t>(std::clamp(shade, 0.0, 255.0));
      img.set(x, y, s, s, s);
    }
  }

  struct Visible {
    std::size_t index;
    ImagePoint pt;
  };
  std::vector<Visible> visible;
  visible.reserve(scene.landmarks.size());
  for (std::size_t i = 0; i < scene.landmarks.size(); ++i)
    if (auto pt = project(cam, intr, scene.landmarks[i].position))
      visible.push_back({i, *pt});

  // Painter's order: far first, index-stable for equal depths.
  std::sort(visible.begin(), visible.end(), [](const Visible& a, const Visible& b) {
    if (a.pt.depth != b.pt.depth) return a.pt.depth > b.pt.depth;
    return a.index < b.index;
  });

  for (const auto& v : visible) {
    const Landmark& lm = scene.landmarks[v.index];
    double radius_px = f * lm.radius / v.pt.depth;
    draw_disc(img, v.pt.x, v.pt.y, radius_px, lm.color.data());
  }
  return img;
}

}  // namespace ewm::cam
