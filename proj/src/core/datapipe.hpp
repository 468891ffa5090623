#pragma once

#include <span>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/features.hpp"
#include "core/image.hpp"
#include "core/kinematics.hpp"

namespace ewm::data {

// ---------- clip quality filter ----------

struct ClipQualityStats {
  double black_fraction_mean = 0;  // [0,1]
  double white_fraction_mean = 0;  // [0,1]
  double blur_median = 0;          // Laplacian variance
  double motion_median = 0;        // mean |luma delta|, 0-255 scale
};

struct QualityStatsConfig {
  int black_luma = 10;   // luma <= black_luma counts as near-black
  int white_luma = 245;  // luma >= white_luma counts as near-white
  int crop_px = 326;     // square center crop; clamped to the frame, 0 = full
};

// Four scalar statistics over the clip: time-averaged near-black and
// near-white pixel fractions, per-frame Laplacian variance (median over
// frames, 4-neighbor kernel), and mean absolute luma difference between
// consecutive frames (median over pairs).
ClipQualityStats compute_quality_stats(std::span<const Image> frames,
                                       const QualityStatsConfig& cfg = {});

struct QualityThresholds {
  double black_fraction_max = 0.30;
  double white_fraction_max = 0.20;
  double blur_min = 50.0;
  double motion_max = 32.5;
};

// All four comparisons are strict; boundary values fail.
bool passes_quality(const ClipQualityStats& s, const QualityThresholds& t = {});

QualityThresholds load_thresholds(const std::string& path);

// ---------- scene segmentation ----------

struct CutConfig {
  int histogram_bins = 32;
  int window = 16;           // rolling statistics window over past distances
  double k = 3.0;            // threshold = mean + k * std over the window
  double min_distance = 0.2; // absolute floor on the adaptive threshold
};

struct Segment {
  int begin = 0;
  int end = 0;  // exclusive
  int length() const { return end - begin; }
  bool operator==(const Segment& o) const { return begin == o.begin && end == o.end; }
};

// Declares a cut where the L1 distance between consecutive normalized luma
// histograms exceeds the adaptive threshold; segments shorter than
// min_duration are dropped.
std::vector<Segment> detect_scene_cuts(std::span<const Image> frames,
                                       int min_duration,
                                       const CutConfig& cfg = {});

// Optional camera-motion gate. No estimator ships; plugging one in lets the
// filter reject segments with noticeable zoom, translation, or rotation.
class CameraMotionGate {
 public:
  virtual ~CameraMotionGate() = default;
  virtual bool excessive_motion(std::span<const Image> frames) = 0;
};

// ---------- VLM validator ----------

struct ValidatorVerdict {
  bool human_action = false;
  double overlay_pct = 0;  // 0-100
  bool overlay_is_photographic = false;
  bool passes = false;
};

// Prompt sent verbatim with every validation request.
extern const char* const kValidatorPrompt;

// Transport abstraction; throws on network failure.
class ValidatorClient {
 public:
  virtual ~ValidatorClient() = default;
  // Posts a JSON request body, returns the JSON response body.
  virtual std::string post_json(const std::string& body) = 0;
};

// POSTs to an HTTP endpoint, e.g. "http://127.0.0.1:8080/validate".
std::unique_ptr<ValidatorClient> make_http_validator_client(
    const std::string& url, int timeout_seconds = 10);

struct ValidatorConfig {
  int attempts = 3;
  int backoff_ms = 100;  // doubles per retry
};

// Sends the prompt plus exactly three base64 frames, parses the four-field
// verdict, and recomputes `passes` locally (the local value wins and a
// disagreement is logged). Network exhaustion and malformed responses raise
// ClipRejected with reason=validator_unavailable / reason=parse.
ValidatorVerdict vlm_validate(ValidatorClient& client,
                              std::span<const Image> sampled_frames,
                              const ValidatorConfig& cfg = {});

std::string base64_encode(const std::uint8_t* data, std::size_t len);

// ---------- dataset records ----------

enum class SourceTag : std::uint8_t { Real = 0, Converted = 1, Synthetic = 2 };

const char* to_string(SourceTag tag);

// One observation-action sequence in the shared format: frames (raw images
// or precomputed latents), frames-1 actions, wrist keypoints per frame.
struct DatasetRecord {
  std::uint64_t id = 0;
  SourceTag source = SourceTag::Synthetic;
  std::vector<Image> images;                          // exactly one payload
  std::vector<Eigen::VectorXd> latents;               // kind is non-empty
  std::vector<kin::Action> actions;
  std::vector<std::vector<feat::Keypoint>> keypoints;

  int frames() const {
    return static_cast<int>(images.empty() ? latents.size() : images.size());
  }
  void validate() const;
  bool operator==(const DatasetRecord& o) const;
};

// Binary dataset file with magic, format version, config echo, record index,
// and a per-record checksum (see docs/formats.md). Readers reject unknown
// versions; a checksum mismatch raises CorruptRecord naming the record.
void write_dataset(std::span<const DatasetRecord> records,
                   const std::string& path, const std::string& config_echo);

struct Dataset {
  std::string config_echo;
  std::vector<DatasetRecord> records;
};

Dataset read_dataset(const std::string& path);

// ---------- post-processing ----------

struct PostprocessConfig {
  int expected_frames = 49;
  double crop_fraction = 0.85;
  int out_size = 224;
  int temporal_stride = 2;  // keeps frames 0, stride, 2*stride, ...
};

// Center crop, bilinear resize, temporal downsample (first frame always
// kept), with keypoints pushed through the same crop/resize transform
// (out-of-crop keypoints keep their mapped coordinates but drop to
// confidence 0) and the action trajectory resampled by composing the deltas
// between kept frames.
DatasetRecord postprocess_clip(std::span<const Image> frames,
                               std::span<const std::vector<feat::Keypoint>> keypoints,
                               std::span<const kin::Action> actions = {},
                               const PostprocessConfig& cfg = {});

// Affine keypoint transform used by postprocess_clip, exposed for tests.
feat::Keypoint transform_keypoint(const feat::Keypoint& kp, int in_w, int in_h,
                                  const PostprocessConfig& cfg);

// ---------- keypoint sidecar files ----------

// Line-delimited text: "<frame> <left|right> <x> <y> <confidence>".
void write_keypoint_sidecar(std::span<const std::vector<feat::Keypoint>> frames,
                            const std::string& path);
std::vector<std::vector<feat::Keypoint>> read_keypoint_sidecar(
    const std::string& path);

}  // namespace ewm::data
