#include "core/features.hpp"

#include <cmath>

#include "core/error.hpp"

namespace ewm::feat {

int EncoderConfig::grid() const {
  int g = static_cast<int>(std::lround(std::sqrt(double(latent_dim))));
  return g;
}

void EncoderConfig::validate() const {
  int g = grid();
  require(g > 0 && g * g == latent_dim, ErrorCode::InvalidArgument,
          "encoder: latent_dim must be a perfect square");
  require(image_width > 0 && image_height > 0 && image_width % g == 0 &&
              image_height % g == 0,
          ErrorCode::InvalidArgument,
          "encoder: image dimensions must be positive multiples of the cell grid");
}

LatentState encode(const Image& img, const EncoderConfig& cfg) {
  cfg.validate();
  require(img.width == cfg.image_width && img.height == cfg.image_height,
          ErrorCode::InvalidArgument, "encode: image dimensions do not match config");
  int g = cfg.grid();
  int cw = img.width / g, ch = img.height / g;
  LatentState z(cfg.latent_dim);
  for (int cy = 0; cy < g; ++cy)
    for (int cx = 0; cx < g; ++cx) {
      std::int64_t sum = 0;
      for (int y = cy * ch; y < (cy + 1) * ch; ++y)
        for (int x = cx * cw; x < (cx + 1) * cw; ++x) sum += luma(img.at(x, y));
      z[cy * g + cx] =
          static_cast<double>(sum) / (static_cast<double>(cw) * ch * 255.0);
    }
  return z;
}

void HeatmapConfig::validate() const {
  require(grid > 0, ErrorCode::InvalidArgument, "heatmap: grid must be positive");
  require(sigma_ref_px > 0, ErrorCode::InvalidArgument,
          "heatmap: sigma must be positive");
  require(image_width > 0 && image_height > 0, ErrorCode::InvalidArgument,
          "heatmap: image dimensions must be positive");
}

namespace {

bool in_frame(const Keypoint& kp, const HeatmapConfig& cfg) {
  return std::isfinite(kp.x) && std::isfinite(kp.y) && kp.x >= 0 &&
         kp.x < cfg.image_width && kp.y >= 0 && kp.y < cfg.image_height;
}

std::vector<Keypoint> gate_and_dedup(const std::vector<Keypoint>& kps,
                                     const HeatmapConfig& cfg) {
  std::vector<Keypoint> kept;
  for (const auto& kp : kps) {
    if (kp.confidence < cfg.confidence_threshold || !in_frame(kp, cfg)) continue;
    bool duplicate = false;
    for (const auto& k : kept) {
      double dx = k.x - kp.x, dy = k.y - kp.y;
      if (std::sqrt(dx * dx + dy * dy) <= cfg.dedup_radius_px) {
        duplicate = true;  // merged into the earlier keypoint
        break;
      }
    }
    if (!duplicate) kept.push_back(kp);
  }
  return kept;
}

}  // namespace

WristHeatmap make_wrist_heatmap(const std::vector<Keypoint>& kps,
                                const HeatmapConfig& cfg) {
  cfg.validate();
  WristHeatmap h;
  h.grid = cfg.grid;
  h.values = Eigen::VectorXd::Zero(cfg.grid * cfg.grid);

  double sigma = cfg.sigma_cells();
  double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  for (const auto& kp : gate_and_dedup(kps, cfg)) {
    // Snap to the containing cell center so the peak is exactly 1.
    int cx = std::min(cfg.grid - 1,
                      static_cast<int>(kp.x * cfg.grid / cfg.image_width));
    int cy = std::min(cfg.grid - 1,
                      static_cast<int>(kp.y * cfg.grid / cfg.image_height));
    for (int r = 0; r < cfg.grid; ++r)
      for (int c = 0; c < cfg.grid; ++c) {
        double d2 = double(r - cy) * (r - cy) + double(c - cx) * (c - cx);
        double v = std::exp(-d2 * inv_two_sigma2);
        double& cell = h.values[r * cfg.grid + c];
        cell = std::max(cell, v);
      }
  }
  return h;
}

bool wrist_visible(const std::vector<Keypoint>& kps, const HeatmapConfig& cfg) {
  cfg.validate();
  for (const auto& kp : kps)
    if (kp.confidence >= cfg.confidence_threshold && in_frame(kp, cfg))
      return true;
  return false;
}

std::optional<GridCell> heatmap_argmax(const WristHeatmap& h) {
  double best = 0.0;
  int best_idx = -1;
  for (int i = 0; i < h.values.size(); ++i)
    if (h.values[i] > best) {
      best = h.values[i];
      best_idx = i;
    }
  if (best_idx < 0) return std::nullopt;  // all-zero: no wrist signal
  return GridCell{best_idx / h.grid, best_idx % h.grid};
}

}  // namespace ewm::feat
