#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "core/image.hpp"

namespace ewm::feat {

using LatentState = Eigen::VectorXd;

// Frozen observation encoder: mean luma over a square cell grid, scaled to
// [0,1]. Deterministic, so identical observations always share a latent.
struct EncoderConfig {
  int latent_dim = 64;     // must be a perfect square (cell grid = sqrt)
  int image_width = 224;   // expected input size
  int image_height = 224;

  int grid() const;
  void validate() const;
};

LatentState encode(const Image& img, const EncoderConfig& cfg);

struct Keypoint {
  double x = 0;  // pixels
  double y = 0;
  double confidence = 0;  // [0,1]
};

struct HeatmapConfig {
  int grid = 28;                // G
  double sigma_ref_px = 3.0;    // at the reference resolution
  double confidence_threshold = 0.3;
  double dedup_radius_px = 5.0;
  int image_width = 224;        // keypoint pixel space
  int image_height = 224;
  static constexpr int kRefPx = 224;

  double sigma_cells() const { return sigma_ref_px * grid / kRefPx; }
  void validate() const;
};

// G x G grid in [0,1], row-major. Unit peak whenever any wrist is rendered.
struct WristHeatmap {
  int grid = 0;
  Eigen::VectorXd values;  // grid*grid, row-major

  double at(int row, int col) const { return values[row * grid + col]; }
  double max_value() const { return values.size() ? values.maxCoeff() : 0.0; }
};

// Confidence-gates, de-duplicates (first keypoint wins inside the radius),
// snaps each survivor to its grid cell center, splats a unit-peak isotropic
// Gaussian per wrist, and combines channels by element-wise max.
WristHeatmap make_wrist_heatmap(const std::vector<Keypoint>& kps,
                                const HeatmapConfig& cfg);

// True iff at least one keypoint passes the confidence gate and lies inside
// the frame.
bool wrist_visible(const std::vector<Keypoint>& kps, const HeatmapConfig& cfg);

struct GridCell {
  int row = 0;
  int col = 0;
  bool operator==(const GridCell& o) const { return row == o.row && col == o.col; }
};

// Cell of maximum value, row-major tie-break; nullopt for an all-zero map.
std::optional<GridCell> heatmap_argmax(const WristHeatmap& h);

// Center of a grid cell in reference pixels.
inline double cell_center_px(int cell, int grid, double image_px) {
  return (cell + 0.5) * image_px / grid;
}

}  // namespace ewm::feat
