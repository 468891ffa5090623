#include <doctest.h>

#include "core/error.hpp"
#include "core/features.hpp"
#include "helpers.hpp"

using namespace ewm;
using namespace ewm::feat;

TEST_CASE("encode maps black to zeros and white to ones") {
  EncoderConfig cfg;
  LatentState black = encode(Image(224, 224, 0), cfg);
  LatentState white = encode(Image(224, 224, 255), cfg);
  CHECK(black.size() == 64);
  for (int i = 0; i < 64; ++i) {
    CHECK(black[i] == 0.0);
    CHECK(white[i] == 1.0);
  }
}

TEST_CASE("encode rejects mismatched dimensions") {
  EncoderConfig cfg;
  CHECK_THROWS_AS(encode(Image(100, 224), cfg), Error);
  EncoderConfig bad;
  bad.latent_dim = 63;  // not a perfect square
  CHECK_THROWS_AS(encode(Image(224, 224), bad), Error);
}

TEST_CASE("encode localizes a moved patch to exactly the affected cells") {
  EncoderConfig cfg;
  int cell = 224 / cfg.grid();  // 28 px
  auto paint_cell = [&](Image& img, int cx, int cy) {
    for (int y = cy * cell; y < (cy + 1) * cell; ++y)
      for (int x = cx * cell; x < (cx + 1) * cell; ++x) img.set(x, y, 255, 255, 255);
  };
  Image a(224, 224, 0), b(224, 224, 0);
  paint_cell(a, 2, 3);
  paint_cell(b, 5, 3);
  LatentState za = encode(a, cfg);
  LatentState zb = encode(b, cfg);
  for (int i = 0; i < 64; ++i) {
    int cy = i / 8, cx = i % 8;
    bool affected = (cy == 3 && (cx == 2 || cx == 5));
    if (affected)
      CHECK(za[i] != zb[i]);
    else
      CHECK(za[i] == zb[i]);
  }
}

TEST_CASE("encode is Lipschitz under single-pixel changes") {
  EncoderConfig cfg;
  Rng rng(31);
  Image img(224, 224);
  for (auto& byte : img.rgb) byte = static_cast<std::uint8_t>(rng.uniform_index(256));
  LatentState base = encode(img, cfg);
  double cell_pixels = 28.0 * 28.0;
  for (int trial = 0; trial < 20; ++trial) {
    Image mutated = img;
    int x = static_cast<int>(rng.uniform_index(224));
    int y = static_cast<int>(rng.uniform_index(224));
    mutated.set(x, y, 255, 255, 255);
    LatentState z = encode(mutated, cfg);
    int changed = 0;
    for (int i = 0; i < 64; ++i)
      if (z[i] != base[i]) {
        ++changed;
        CHECK(std::abs(z[i] - base[i]) <= 1.0 / cell_pixels + 1e-12);
      }
    CHECK(changed <= 1);
  }
}

TEST_CASE("heatmap has a unit peak at the keypoint cell") {
  HeatmapConfig cfg;
  double cell_px = 224.0 / cfg.grid;
  // Keypoint at the center of cell (10, 6).
  Keypoint kp{(6 + 0.5) * cell_px, (10 + 0.5) * cell_px, 1.0};
  WristHeatmap h = make_wrist_heatmap({kp}, cfg);
  CHECK(h.at(10, 6) == 1.0);
  CHECK(h.max_value() == 1.0);
  auto cell = heatmap_argmax(h);
  REQUIRE(cell.has_value());
  CHECK(cell->row == 10);
  CHECK(cell->col == 6);
}

TEST_CASE("co-located wrists keep the unit peak under max-combine") {
  HeatmapConfig cfg;
  Keypoint kp{100.0, 100.0, 1.0};
  WristHeatmap h = make_wrist_heatmap({kp, kp}, cfg);
  CHECK(h.max_value() == 1.0);
}

TEST_CASE("max-combine never falls below either input splat") {
  HeatmapConfig cfg;
  Keypoint a{40.0, 60.0, 1.0};
  Keypoint b{180.0, 150.0, 1.0};
  WristHeatmap ha = make_wrist_heatmap({a}, cfg);
  WristHeatmap hb = make_wrist_heatmap({b}, cfg);
  WristHeatmap both = make_wrist_heatmap({a, b}, cfg);
  for (int i = 0; i < both.values.size(); ++i) {
    CHECK(both.values[i] == std::max(ha.values[i], hb.values[i]));
    CHECK(both.values[i] >= 0.0);
    CHECK(both.values[i] <= 1.0);
  }
}

TEST_CASE("confidence gate discards keypoints below 0.3") {
  HeatmapConfig cfg;
  WristHeatmap h = make_wrist_heatmap({{100.0, 100.0, 0.29}}, cfg);
  CHECK(h.max_value() == 0.0);
  // Boundary value passes: only strictly-below is discarded.
  WristHeatmap kept = make_wrist_heatmap({{100.0, 100.0, 0.3}}, cfg);
  CHECK(kept.max_value() == 1.0);
}

TEST_CASE("nearby detections merge into the first") {
  HeatmapConfig cfg;
  Keypoint first{100.0, 100.0, 1.0};
  Keypoint close{103.0, 103.0, 1.0};  // 4.24 px away, merged
  Keypoint far{100.0, 107.0, 1.0};    // 7 px away, kept
  WristHeatmap merged = make_wrist_heatmap({first, close}, cfg);
  WristHeatmap single = make_wrist_heatmap({first}, cfg);
  CHECK(merged.values == single.values);
  WristHeatmap two = make_wrist_heatmap({first, far}, cfg);
  CHECK(two.values != single.values);
}

TEST_CASE("splat is radially symmetric") {
  HeatmapConfig cfg;
  double cell_px = 224.0 / cfg.grid;
  Keypoint kp{(14 + 0.5) * cell_px, (14 + 0.5) * cell_px, 1.0};
  WristHeatmap h = make_wrist_heatmap({kp}, cfg);
  for (int d = 1; d <= 4; ++d) {
    double up = h.at(14 - d, 14), down = h.at(14 + d, 14);
    double left = h.at(14, 14 - d), right = h.at(14, 14 + d);
    CHECK(std::abs(up - down) < 1e-9);
    CHECK(std::abs(left - right) < 1e-9);
    CHECK(std::abs(up - left) < 1e-9);
  }
}

TEST_CASE("wrist visibility needs confidence and an in-frame position") {
  HeatmapConfig cfg;
  CHECK(!wrist_visible({}, cfg));
  CHECK(wrist_visible({{50.0, 60.0, 1.0}}, cfg));
  CHECK(!wrist_visible({{50.0, 60.0, 0.2}}, cfg));
  CHECK(!wrist_visible({{-5.0, 60.0, 1.0}}, cfg));
  CHECK(!wrist_visible({{50.0, 224.0, 1.0}}, cfg));
}

TEST_CASE("argmax breaks ties by row-major order and flags empty maps") {
  WristHeatmap h;
  h.grid = 4;
  h.values = Eigen::VectorXd::Zero(16);
  CHECK(!heatmap_argmax(h).has_value());

  h.values[6] = 1.0;   // (1, 2)
  h.values[9] = 1.0;   // (2, 1), higher row-major index
  auto cell = heatmap_argmax(h);
  REQUIRE(cell.has_value());
  CHECK(cell->row == 1);
  CHECK(cell->col == 2);
}
