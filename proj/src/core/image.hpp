#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ewm {

// 8-bit RGB raster, row-major, origin top-left, +x right, +y down.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* at(int x, int y) {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && rgb == o.rgb;
  }
};

// Integer-weighted RGB-to-luma on the 0-255 scale (weights sum to 256).
inline int luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (77 * r + 150 * g + 29 * b) >> 8;
}
inline int luma(const std::uint8_t* px) { return luma(px[0], px[1], px[2]); }

// Lossless debug output, binary PPM (P6).
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

// FNV-1a content hash, used by determinism checks.
std::uint64_t image_hash(const Image& img);

}  // namespace ewm
