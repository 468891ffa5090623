#include "core/datapipe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "core/binio.hpp"
#include "core/error.hpp"

namespace ewm::data {

namespace {

using LumaPlane = std::vector<int>;  // crop-sized luma values

struct CropRect {
  int x0 = 0, y0 = 0, w = 0, h = 0;
};

CropRect stats_crop(const Image& img, const QualityStatsConfig& cfg) {
  CropRect r;
  r.w = cfg.crop_px > 0 ? std::min(cfg.crop_px, img.width) : img.width;
  r.h = cfg.crop_px > 0 ? std::min(cfg.crop_px, img.height) : img.height;
  r.x0 = (img.width - r.w) / 2;
  r.y0 = (img.height - r.h) / 2;
  return r;
}

LumaPlane luma_plane(const Image& img, const CropRect& r) {
  LumaPlane plane(static_cast<std::size_t>(r.w) * r.h);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      plane[static_cast<std::size_t>(y) * r.w + x] =
          luma(img.at(r.x0 + x, r.y0 + y));
  return plane;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double laplacian_variance(const LumaPlane& plane, int w, int h) {
  if (w < 3 || h < 3) return 0.0;
  double sum = 0, sum_sq = 0;
  std::size_t count = 0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      double resp = plane[i - w] + plane[i + w] + plane[i - 1] + plane[i + 1] -
                    4.0 * plane[i];
      sum += resp;
      sum_sq += resp * resp;
      ++count;
    }
  double mean = sum / count;
  return sum_sq / count - mean * mean;
}

}  // namespace

ClipQualityStats compute_quality_stats(std::span<const Image> frames,
                                       const QualityStatsConfig& cfg) {
  require(frames.size() >= 2, ErrorCode::InvalidArgument,
          "quality stats: need at least two frames");
  for (const auto& f : frames)
    require(f.width == frames[0].width && f.height == frames[0].height &&
                f.width > 0,
            ErrorCode::InvalidArgument, "quality stats: frame size mismatch");

  CropRect crop = stats_crop(frames[0], cfg);
  double pixel_count = static_cast<double>(crop.w) * crop.h;

  double black_sum = 0, white_sum = 0;
  std::vector<double> blur_per_frame, motion_per_pair;
  LumaPlane prev;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    LumaPlane plane = luma_plane(frames[t], crop);
    std::size_t black = 0, white = 0;
    for (int v : plane) {
      if (v <= cfg.black_luma) ++black;
      if (v >= cfg.white_luma) ++white;
    }
    black_sum += black / pixel_count;
    white_sum += white / pixel_count;
    blur_per_frame.push_back(laplacian_variance(plane, crop.w, crop.h));
    if (t > 0) {
      double diff = 0;
      for (std::size_t i = 0; i < plane.size(); ++i)
        diff += std::abs(plane[i] - prev[i]);
      motion_per_pair.push_back(diff / pixel_count);
    }
    prev = std::move(plane);
  }

  ClipQualityStats s;
  s.black_fraction_mean = black_sum / frames.size();
  s.white_fraction_mean = white_sum / frames.size();
  s.blur_median = median(std::move(blur_per_frame));
  s.motion_median = median(std::move(motion_per_pair));
  return s;
}

bool passes_quality(const ClipQualityStats& s, const QualityThresholds& t) {
  return s.black_fraction_mean < t.black_fraction_max &&
         s.white_fraction_mean < t.white_fraction_max &&
         s.blur_median > t.blur_min && s.motion_median < t.motion_max;
}

QualityThresholds load_thresholds(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open: " + path);
  QualityThresholds t;
  std::string key;
  double value;
  while (in >> key >> value) {
    if (key == "black_fraction_max") t.black_fraction_max = value;
    else if (key == "white_fraction_max") t.white_fraction_max = value;
    else if (key == "blur_min") t.blur_min = value;
    else if (key == "motion_max") t.motion_max = value;
    else throw Error(ErrorCode::ParseError, path + ": unknown threshold '" + key + "'");
  }
  return t;
}

std::vector<Segment> detect_scene_cuts(std::span<const Image> frames,
                                       int min_duration, const CutConfig& cfg) {
  require(!frames.empty(), ErrorCode::InvalidArgument,
          "scene cuts: need at least one frame");
  require(cfg.histogram_bins > 0 && 256 % cfg.histogram_bins == 0,
          ErrorCode::InvalidArgument, "scene cuts: bins must divide 256");

  int n = static_cast<int>(frames.size());
  int shift = 256 / cfg.histogram_bins;
  auto histogram = [&](const Image& img) {
    std::vector<double> h(cfg.histogram_bins, 0.0);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3)
      h[luma(&img.rgb[i]) / shift] += 1.0;
    double total = static_cast<double>(img.width) * img.height;
    for (double& v : h) v /= total;
    return h;
  };

  std::vector<int> cuts;
  std::vector<double> recent;  // rolling window of past distances
  std::vector<double> prev_hist = histogram(frames[0]);
  for (int t = 1; t < n; ++t) {
    std::vector<double> hist = histogram(frames[t]);
    double d = 0;
    for (int b = 0; b < cfg.histogram_bins; ++b)
      d += std::abs(hist[b] - prev_hist[b]);
    double mean = 0, var = 0;
    if (!recent.empty()) {
      for (double v : recent) mean += v;
      mean /= recent.size();
      for (double v : recent) var += (v - mean) * (v - mean);
      var /= recent.size();
    }
    double threshold = std::max(mean + cfg.k * std::sqrt(var), cfg.min_distance);
    if (d > threshold) cuts.push_back(t);
    recent.push_back(d);
    if (static_cast<int>(recent.size()) > cfg.window)
      recent.erase(recent.begin());
    prev_hist = std::move(hist);
  }

  std::vector<Segment> segments;
  int begin = 0;
  for (int cut : cuts) {
    segments.push_back({begin, cut});
    begin = cut;
  }
  segments.push_back({begin, n});
  std::erase_if(segments,
                [&](const Segment& s) { return s.length() < min_duration; });
  return segments;
}

const char* const kValidatorPrompt =
    R"(Check these images and answer STRICTLY in JSON.

You are judging the scene across all provided images together.

Definitions:
- A "human action" means a visible person actively doing something.
- human_action should be true ONLY if a person is clearly performing
  a visible action in at least one image, and the scene overall appears
  to depict a human action.
  Examples: cutting, cooking, typing, walking, opening something,
  holding or manipulating objects, cleaning, assembling, playing.

- human_action should be false for:
  - static poses (standing, sitting without action)
  - portraits/selfies
  - empty scenes
  - landscapes
  - objects moving without human involvement
  - animals acting without humans
  - a person just talking to the camera (e.g. vlog-style, speaking, presenting)
  - a person facing the camera without clear interaction with objects

Overlay rules:
- An "overlay" is anything drawn on top of the main scene.
- overlay_is_photographic should be true ONLY if any image contains a
  natural photo or video image as an overlay (e.g. picture-in-picture, inset video).
- overlay_is_photographic should be false for logos, branding, text,
  subtitles, UI elements, icons, flat illustrations, watermarks.

Rules:
- human_action: true only if a clear human action is visible across the set
- overlay_pct: estimated percent (0-100) of the image covered by overlays;
  if images differ, use the highest / worst-case estimate
- passes = human_action AND overlay_pct < 20 AND (overlay_is_photographic == false)

Be conservative if unsure.)";

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  static const char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t chunk = std::uint32_t(data[i]) << 16;
    if (i + 1 < len) chunk |= std::uint32_t(data[i + 1]) << 8;
    if (i + 2 < len) chunk |= data[i + 2];
    out.push_back(alphabet[(chunk >> 18) & 63]);
    out.push_back(alphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < len ? alphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? alphabet[chunk & 63] : '=');
  }
  return out;
}

namespace {

std::string image_to_base64_ppm(const Image& img) {
  std::ostringstream header;
  header << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> bytes;
  const std::string& h = header.str();
  bytes.insert(bytes.end(), h.begin(), h.end());
  bytes.insert(bytes.end(), img.rgb.begin(), img.rgb.end());
  return base64_encode(bytes.data(), bytes.size());
}

}  // namespace

ValidatorVerdict vlm_validate(ValidatorClient& client,
                              std::span<const Image> sampled_frames,
                              const ValidatorConfig& cfg) {
  require(sampled_frames.size() == 3, ErrorCode::InvalidArgument,
          "validator: exactly three sampled frames required");

  nlohmann::json request;
  request["prompt"] = kValidatorPrompt;
  auto& frames = request["frames"] = nlohmann::json::array();
  for (const auto& img : sampled_frames) frames.push_back(image_to_base64_ppm(img));
  std::string body = request.dump();

  std::string response;
  bool got_response = false;
  int backoff = cfg.backoff_ms;
  for (int attempt = 0; attempt < cfg.attempts && !got_response; ++attempt) {
    try {
      response = client.post_json(body);
      got_response = true;
    } catch (const std::exception& e) {
      std::cerr << "validator: attempt " << attempt + 1 << " failed: "
                << e.what() << "\n";
      if (attempt + 1 < cfg.attempts) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
    }
  }
  if (!got_response)
    throw Error(ErrorCode::ClipRejected, "reason=validator_unavailable");

  ValidatorVerdict v;
  bool remote_passes = false;
  try {
    nlohmann::json j = nlohmann::json::parse(response);
    v.human_action = j.at("human_action").get<bool>();
    v.overlay_pct = j.at("overlay_pct").get<double>();
    v.overlay_is_photographic = j.at("overlay_is_photographic").get<bool>();
    remote_passes = j.at("passes").get<bool>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ClipRejected,
                std::string("reason=parse detail=") + e.what());
  }
  v.passes = v.human_action && v.overlay_pct < 20.0 && !v.overlay_is_photographic;
  if (v.passes != remote_passes)
    std::cerr << "validator: overriding remote passes=" << remote_passes
              << " with locally recomputed passes=" << v.passes << "\n";
  return v;
}

namespace {

class HttpValidatorClient final : public ValidatorClient {
 public:
  HttpValidatorClient(std::string host_port, std::string path, int timeout)
      : host_port_(std::move(host_port)), path_(std::move(path)),
        timeout_(timeout) {}

  std::string post_json(const std::string& body) override {
    httplib::Client client(host_port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    auto res = client.Post(path_, body, "application/json");
    if (!res)
      throw Error(ErrorCode::IoError,
                  "validator transport error: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw Error(ErrorCode::IoError,
                  "validator returned status " + std::to_string(res->status));
    return res->body;
  }

 private:
  std::string host_port_;
  std::string path_;
  int timeout_;
};

}  // namespace

std::unique_ptr<ValidatorClient> make_http_validator_client(
    const std::string& url, int timeout_seconds) {
  const std::string scheme = "http://";
  require(url.rfind(scheme, 0) == 0, ErrorCode::InvalidArgument,
          "validator url must start with http://");
  std::string rest = url.substr(scheme.size());
  auto slash = rest.find('/');
  std::string host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
  require(!host_port.empty(), ErrorCode::InvalidArgument,
          "validator url missing host");
  return std::make_unique<HttpValidatorClient>(scheme + host_port, path,
                                               timeout_seconds);
}

const char* to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::Real: return "real";
    case SourceTag::Converted: return "converted";
    case SourceTag::Synthetic: return "synthetic";
  }
  return "unknown";
}

void DatasetRecord::validate() const {
  require(images.empty() != latents.empty(), ErrorCode::InvalidArgument,
          "record: exactly one of images/latents must be present");
  int n = frames();
  require(n >= 1, ErrorCode::InvalidArgument, "record: needs at least one frame");
  require(static_cast<int>(actions.size()) == n - 1, ErrorCode::InvalidArgument,
          "record: actions count must equal frames - 1");
  require(static_cast<int>(keypoints.size()) == n, ErrorCode::InvalidArgument,
          "record: keypoints must cover every frame");
  for (const auto& img : images)
    require(img.width == images[0].width && img.height == images[0].height &&
                img.rgb.size() == static_cast<std::size_t>(img.width) *
                                      img.height * 3,
            ErrorCode::InvalidArgument, "record: inconsistent image dims");
  for (const auto& z : latents)
    require(z.size() == latents[0].size() && z.size() > 0,
            ErrorCode::InvalidArgument, "record: inconsistent latent dims");
}

bool DatasetRecord::operator==(const DatasetRecord& o) const {
  if (id != o.id || source != o.source || images.size() != o.images.size() ||
      latents.size() != o.latents.size() || actions.size() != o.actions.size() ||
      keypoints.size() != o.keypoints.size())
    return false;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (!(images[i] == o.images[i])) return false;
  for (std::size_t i = 0; i < latents.size(); ++i)
    if (latents[i] != o.latents[i]) return false;
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (!(actions[i] == o.actions[i])) return false;
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    if (keypoints[i].size() != o.keypoints[i].size()) return false;
    for (std::size_t k = 0; k < keypoints[i].size(); ++k) {
      const auto& a = keypoints[i][k];
      const auto& b = o.keypoints[i][k];
      if (a.x != b.x || a.y != b.y || a.confidence != b.confidence) return false;
    }
  }
  return true;
}

namespace {

constexpr char kDatasetMagic[8] = {'E', 'W', 'M', 'D', 'S', 'E', 'T', '1'};

std::vector<std::uint8_t> serialize_record(const DatasetRecord& rec) {
  ByteWriter w;
  w.u64(rec.id);
  w.u8(static_cast<std::uint8_t>(rec.source));
  w.u8(rec.images.empty() ? 1 : 0);  // payload kind: 0 images, 1 latents
  w.u32(static_cast<std::uint32_t>(rec.frames()));
  if (!rec.images.empty()) {
    w.u32(static_cast<std::uint32_t>(rec.images[0].width));
    w.u32(static_cast<std::uint32_t>(rec.images[0].height));
    for (const auto& img : rec.images) w.bytes(img.rgb.data(), img.rgb.size());
  } else {
    w.u32(static_cast<std::uint32_t>(rec.latents[0].size()));
    for (const auto& z : rec.latents)
      for (Eigen::Index i = 0; i < z.size(); ++i) w.f64(z[i]);
  }
  for (const auto& a : rec.actions)
    for (double v : kin::flatten_action(a)) w.f64(v);
  for (const auto& frame : rec.keypoints) {
    w.u32(static_cast<std::uint32_t>(frame.size()));
    for (const auto& kp : frame) {
      w.f64(kp.x);
      w.f64(kp.y);
      w.f64(kp.confidence);
    }
  }
  return w.data();
}

DatasetRecord deserialize_record(ByteReader& r) {
  DatasetRecord rec;
  rec.id = r.u64();
  rec.source = static_cast<SourceTag>(r.u8());
  std::uint8_t kind = r.u8();
  require(kind <= 1, ErrorCode::ParseError, "record: unknown payload kind");
  int frames = static_cast<int>(r.u32());
  require(frames >= 1, ErrorCode::ParseError, "record: bad frame count");
  if (kind == 0) {
    int w = static_cast<int>(r.u32());
    int h = static_cast<int>(r.u32());
    require(w > 0 && h > 0, ErrorCode::ParseError, "record: bad image dims");
    for (int f = 0; f < frames; ++f) {
      Image img(w, h);
      r.bytes(img.rgb.data(), img.rgb.size());
      rec.images.push_back(std::move(img));
    }
  } else {
    int dim = static_cast<int>(r.u32());
    require(dim > 0, ErrorCode::ParseError, "record: bad latent dim");
    for (int f = 0; f < frames; ++f) {
      Eigen::VectorXd z(dim);
      for (int i = 0; i < dim; ++i) z[i] = r.f64();
      rec.latents.push_back(std::move(z));
    }
  }
  for (int f = 0; f < frames - 1; ++f) {
    kin::ActionVec v{};
    for (double& x : v) x = r.f64();
    rec.actions.push_back(kin::unflatten_action(v));
  }
  for (int f = 0; f < frames; ++f) {
    std::uint32_t count = r.u32();
    std::vector<feat::Keypoint> kps(count);
    for (auto& kp : kps) {
      kp.x = r.f64();
      kp.y = r.f64();
      kp.confidence = r.f64();
    }
    rec.keypoints.push_back(std::move(kps));
  }
  return rec;
}

}  // namespace

void write_dataset(std::span<const DatasetRecord> records,
                   const std::string& path, const std::string& config_echo) {
  for (const auto& rec : records) rec.validate();

  ByteWriter w;
  w.bytes(kDatasetMagic, 8);
  w.u32(1);  // format version
  w.str(config_echo);
  w.u64(records.size());
  std::size_t index_at = w.size();
  for (std::size_t i = 0; i < records.size(); ++i) w.u64(0);  // patched below

  std::vector<std::uint64_t> offsets;
  for (const auto& rec : records) {
    offsets.push_back(w.size());
    auto body = serialize_record(rec);
    w.u64(body.size());
    w.bytes(body.data(), body.size());
    w.u32(crc32(body.data(), body.size()));
  }
  for (std::size_t i = 0; i < offsets.size(); ++i)
    w.patch_u64(index_at + 8 * i, offsets[i]);
  write_file_bytes(path, w.data());
}

Dataset read_dataset(const std::string& path) {
  auto bytes = read_file_bytes(path);
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), kDatasetMagic, 8) == 0,
          ErrorCode::ParseError, "dataset: bad magic: " + path);
  ByteReader r(bytes.data(), bytes.size());
  r.seek(8);
  std::uint32_t version = r.u32();
  require(version == 1, ErrorCode::ParseError,
          "dataset: unsupported format version " + std::to_string(version));

  Dataset ds;
  ds.config_echo = r.str();
  std::uint64_t count = r.u64();
  std::vector<std::uint64_t> offsets(count);
  for (auto& off : offsets) off = r.u64();

  for (std::uint64_t i = 0; i < count; ++i) {
    r.seek(offsets[i]);
    std::uint64_t body_len = r.u64();
    require(r.offset() + body_len + 4 <= bytes.size(), ErrorCode::ParseError,
            "dataset: record " + std::to_string(i) + " overruns the file");
    const std::uint8_t* body = bytes.data() + r.offset();
    ByteReader body_reader(body, body_len);
    r.seek(r.offset() + body_len);
    std::uint32_t stored = r.u32();
    require(stored == crc32(body, body_len), ErrorCode::CorruptRecord,
            "dataset: checksum mismatch in record " + std::to_string(i));
    DatasetRecord rec = deserialize_record(body_reader);
    rec.validate();
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

feat::Keypoint transform_keypoint(const feat::Keypoint& kp, int in_w, int in_h,
                                  const PostprocessConfig& cfg) {
  int cw = static_cast<int>(std::llround(cfg.crop_fraction * in_w));
  int ch = static_cast<int>(std::llround(cfg.crop_fraction * in_h));
  int ox = (in_w - cw) / 2;
  int oy = (in_h - ch) / 2;
  feat::Keypoint out;
  out.x = (kp.x - ox) * cfg.out_size / cw;
  out.y = (kp.y - oy) * cfg.out_size / ch;
  bool in_crop = kp.x >= ox && kp.x < ox + cw && kp.y >= oy && kp.y < oy + ch;
  out.confidence = in_crop ? kp.confidence : 0.0;
  return out;
}

namespace {

Image crop_resize(const Image& src, const PostprocessConfig& cfg) {
  int cw = static_cast<int>(std::llround(cfg.crop_fraction * src.width));
  int ch = static_cast<int>(std::llround(cfg.crop_fraction * src.height));
  int ox = (src.width - cw) / 2;
  int oy = (src.height - ch) / 2;
  Image dst(cfg.out_size, cfg.out_size);
  for (int y = 0; y < cfg.out_size; ++y) {
    double sy = (y + 0.5) * ch / cfg.out_size - 0.5 + oy;
    int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, src.height - 1);
    int y1 = std::min(y0 + 1, src.height - 1);
    double fy = std::clamp(sy - y0, 0.0, 1.0);
    for (int x = 0; x < cfg.out_size; ++x) {
      double sx = (x + 0.5) * cw / cfg.out_size - 0.5 + ox;
      int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, src.width - 1);
      int x1 = std::min(x0 + 1, src.width - 1);
      double fx = std::clamp(sx - x0, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        double top = src.at(x0, y0)[c] * (1 - fx) + src.at(x1, y0)[c] * fx;
        double bottom = src.at(x0, y1)[c] * (1 - fx) + src.at(x1, y1)[c] * fx;
        dst.at(x, y)[c] =
            static_cast<std::uint8_t>(std::lround(top * (1 - fy) + bottom * fy));
      }
    }
  }
  return dst;
}

}  // namespace

DatasetRecord postprocess_clip(std::span<const Image> frames,
                               std::span<const std::vector<feat::Keypoint>> keypoints,
                               std::span<const kin::Action> actions,
                               const PostprocessConfig& cfg) {
  require(static_cast<int>(frames.size()) == cfg.expected_frames,
          ErrorCode::InvalidArgument,
          "postprocess: expected " + std::to_string(cfg.expected_frames) +
              " frames, got " + std::to_string(frames.size()));
  require(keypoints.size() == frames.size(), ErrorCode::InvalidArgument,
          "postprocess: keypoints must cover every frame");
  require(actions.empty() || actions.size() + 1 == frames.size(),
          ErrorCode::InvalidArgument,
          "postprocess: action trajectory must have frames - 1 entries");

  DatasetRecord rec;
  rec.source = SourceTag::Converted;
  std::vector<int> kept;
  for (int f = 0; f < cfg.expected_frames; f += cfg.temporal_stride)
    kept.push_back(f);

  for (int f : kept) {
    rec.images.push_back(crop_resize(frames[f], cfg));
    std::vector<feat::Keypoint> kps;
    for (const auto& kp : keypoints[f])
      kps.push_back(transform_keypoint(kp, frames[f].width, frames[f].height, cfg));
    rec.keypoints.push_back(std::move(kps));
  }

  for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
    kin::Action step;  // composed delta between kept frames
    if (!actions.empty()) {
      for (int f = kept[k]; f < kept[k + 1]; ++f) {
        step.delta_root += actions[f].delta_root;
        for (int j = 0; j < kin::kBodyJoints; ++j)
          step.delta_joint_euler[j] += actions[f].delta_joint_euler[j];
      }
    }
    rec.actions.push_back(step);
  }
  rec.validate();
  return rec;
}

void write_keypoint_sidecar(std::span<const std::vector<feat::Keypoint>> frames,
                            const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open for write: " + path);
  out.precision(17);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    require(frames[f].size() <= 2, ErrorCode::InvalidArgument,
            "sidecar: at most two wrists per frame");
    for (std::size_t k = 0; k < frames[f].size(); ++k) {
      const auto& kp = frames[f][k];
      out << f << " " << (k == 0 ? "left" : "right") << " " << kp.x << " "
          << kp.y << " " << kp.confidence << "\n";
    }
  }
  require(out.good(), ErrorCode::IoError, "short write: " + path);
}

std::vector<std::vector<feat::Keypoint>> read_keypoint_sidecar(
    const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open: " + path);
  std::vector<std::vector<feat::Keypoint>> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long frame;
    std::string wrist;
    feat::Keypoint kp;
    require(static_cast<bool>(ss >> frame >> wrist >> kp.x >> kp.y >>
                              kp.confidence),
            ErrorCode::ParseError,
            path + ":" + std::to_string(lineno) + ": bad keypoint line");
    require(frame >= 0 && (wrist == "left" || wrist == "right"),
            ErrorCode::ParseError,
            path + ":" + std::to_string(lineno) + ": bad frame or wrist field");
    if (static_cast<std::size_t>(frame) >= frames.size())
      frames.resize(frame + 1);
    frames[frame].push_back(kp);
  }
  return frames;
}

}  // namespace ewm::data
