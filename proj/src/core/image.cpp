#include "core/image.hpp"

#include <cstdio>
#include <fstream>

#include "core/error.hpp"

namespace ewm {

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open for write: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  require(out.good(), ErrorCode::IoError, "short write: " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open: " + path);
  std::string magic;
  in >> magic;
  require(magic == "P6", ErrorCode::ParseError, "not a P6 ppm: " + path);
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  require(in.good() && w > 0 && h > 0 && maxval == 255, ErrorCode::ParseError,
          "bad ppm header: " + path);
  in.get();  // single whitespace after maxval
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  require(in.gcount() == static_cast<std::streamsize>(img.rgb.size()),
          ErrorCode::ParseError, "truncated ppm: " + path);
  return img;
}

std::uint64_t image_hash(const Image& img) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x00000100000001B3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(img.width));
  mix(static_cast<std::uint64_t>(img.height));
  for (std::uint8_t b : img.rgb) {
    h ^= b;
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

}  // namespace ewm
