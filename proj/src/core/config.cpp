#include "core/config.hpp"

#include <cmath>
#include <fstream>

#include "core/error.hpp"
#include "core/rng.hpp"

#ifndef EWM_BUILD_STAMP
#define EWM_BUILD_STAMP "unknown"
#endif
#ifndef EWM_VERSION
#define EWM_VERSION "0.0.0"
#endif

namespace ewm {

namespace {

nlohmann::json default_json() {
  using json = nlohmann::json;
  json j;
  j["kinematics"] = {
      {"topology_path", ""},   // empty = built-in humanoid
      {"joint_map_path", ""},  // empty = built-in table
      {"joint_limit_rad", M_PI},
  };
  j["camera"] = {
      {"image_width", 224},
      {"image_height", 224},
      {"vertical_fov_deg", 90.0},
      {"near_plane_m", 0.1},
  };
  j["encoder"] = {
      {"latent_dim", 64},
  };
  j["heatmap"] = {
      {"grid", 28},
      {"sigma_px", 3.0},
      {"confidence_threshold", 0.3},
      {"dedup_px", 5.0},
  };
  j["scene"] = {
      {"landmark_count", 40},
      {"bounds_x", 6.0},
      {"bounds_y", 3.0},
      {"bounds_z", 6.0},
      {"radius_min", 0.12},
      {"radius_max", 0.35},
  };
  j["motion_prior"] = {
      {"joint_vel_std", 0.02},
      {"root_vel_std", 0.04},
      {"smoothing", 0.75},
  };
  j["episode"] = {
      {"frames", 25},
  };
  j["model"] = {
      {"context_len", 3},
      {"hidden", json::array({256, 256})},
  };
  j["train"] = {
      // Reference setting for the full-scale run is 8e-5; the shipped
      // default suits the small model (see docs/config.md).
      {"lambda", 1.0},
      {"learning_rate", 1e-3},
      {"beta1", 0.9},
      {"beta2", 0.95},
      {"weight_decay", 0.0},
      {"clip_norm", 10.0},
      {"batch_size", 64},
      {"iterations", 5000},
      {"ema_decay", 0.99},
  };
  j["planner"] = {
      {"num_candidates", 4},
      {"horizon", 8},
      {"cost_mode", "final"},
  };
  j["filter"] = {
      {"black_fraction_max", 0.30},
      {"white_fraction_max", 0.20},
      {"blur_min", 50.0},
      {"motion_max", 32.5},
      {"black_luma", 10},
      {"white_luma", 245},
      {"crop_px", 326},
      {"min_duration", 8},
      {"histogram_bins", 32},
      {"cut_k", 3.0},
      {"cut_window", 16},
      {"min_cut_distance", 0.2},
      {"validator_url", ""},
      {"validator_attempts", 3},
      {"validator_backoff_ms", 100},
  };
  j["postprocess"] = {
      {"expected_frames", 49},
      {"crop_fraction", 0.85},
      {"out_size", 224},
      {"temporal_stride", 2},
  };
  j["run"] = {
      {"seed", 12345},
  };
  return j;
}

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

void merge_checked(nlohmann::json& base, const nlohmann::json& overlay,
                   const std::string& prefix) {
  require(overlay.is_object(), ErrorCode::ParseError,
          "config: expected an object at '" + prefix + "'");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    require(base.contains(it.key()), ErrorCode::ParseError,
            "config: unknown key '" + key + "'");
    nlohmann::json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else {
      require(same_kind(slot, it.value()), ErrorCode::ParseError,
              "config: wrong type for '" + key + "'");
      slot = it.value();
    }
  }
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.data_ = default_json();
  return cfg;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg = defaults();
  merge_checked(cfg.data_, j, "");
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError,
                "config: invalid JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  auto dot = dotted_key.find('.');
  require(dot != std::string::npos && dot > 0 && dot + 1 < dotted_key.size(),
          ErrorCode::InvalidArgument,
          "config: expected section.key, got '" + dotted_key + "'");
  std::string section = dotted_key.substr(0, dot);
  std::string key = dotted_key.substr(dot + 1);
  require(data_.contains(section) && data_[section].contains(key),
          ErrorCode::InvalidArgument,
          "config: unknown key '" + dotted_key + "'");
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // plain string
  require(same_kind(data_[section][key], parsed), ErrorCode::InvalidArgument,
          "config: wrong type for '" + dotted_key + "'");
  data_[section][key] = parsed;
}

std::string RunConfig::echo() const { return data_.dump(); }
std::string RunConfig::pretty() const { return data_.dump(2) + "\n"; }

std::vector<std::string> RunConfig::flat_keys() const {
  std::vector<std::string> out;
  for (auto sec = data_.begin(); sec != data_.end(); ++sec)
    for (auto it = sec.value().begin(); it != sec.value().end(); ++it)
      out.push_back(sec.key() + "." + it.key() + " = " + it.value().dump());
  return out;
}

kin::SkeletonTopology RunConfig::topology() const {
  std::string path = data_["kinematics"]["topology_path"].get<std::string>();
  if (path.empty()) return kin::default_topology();
  return kin::load_topology(path);
}

kin::JointMap RunConfig::joint_map() const {
  std::string path = data_["kinematics"]["joint_map_path"].get<std::string>();
  if (path.empty()) return kin::default_joint_map();
  return kin::load_joint_map(path);
}

kin::JointLimits RunConfig::joint_limits() const {
  double limit = data_["kinematics"]["joint_limit_rad"].get<double>();
  require(limit > 0, ErrorCode::InvalidArgument,
          "config: joint_limit_rad must be positive");
  return {-limit, limit};
}

cam::Intrinsics RunConfig::intrinsics() const {
  cam::Intrinsics intr;
  intr.image_width = data_["camera"]["image_width"].get<int>();
  intr.image_height = data_["camera"]["image_height"].get<int>();
  intr.vertical_fov =
      data_["camera"]["vertical_fov_deg"].get<double>() * M_PI / 180.0;
  intr.near_plane = data_["camera"]["near_plane_m"].get<double>();
  intr.validate();
  return intr;
}

feat::EncoderConfig RunConfig::encoder() const {
  feat::EncoderConfig enc;
  enc.latent_dim = data_["encoder"]["latent_dim"].get<int>();
  enc.image_width = data_["camera"]["image_width"].get<int>();
  enc.image_height = data_["camera"]["image_height"].get<int>();
  enc.validate();
  return enc;
}

feat::HeatmapConfig RunConfig::heatmap() const {
  feat::HeatmapConfig h;
  h.grid = data_["heatmap"]["grid"].get<int>();
  h.sigma_ref_px = data_["heatmap"]["sigma_px"].get<double>();
  h.confidence_threshold = data_["heatmap"]["confidence_threshold"].get<double>();
  h.dedup_radius_px = data_["heatmap"]["dedup_px"].get<double>();
  h.image_width = data_["camera"]["image_width"].get<int>();
  h.image_height = data_["camera"]["image_height"].get<int>();
  h.validate();
  return h;
}

sim::SceneConfig RunConfig::scene() const {
  sim::SceneConfig s;
  s.landmark_count = data_["scene"]["landmark_count"].get<int>();
  s.bounds_size = Vec3(data_["scene"]["bounds_x"].get<double>(),
                       data_["scene"]["bounds_y"].get<double>(),
                       data_["scene"]["bounds_z"].get<double>());
  s.radius_min = data_["scene"]["radius_min"].get<double>();
  s.radius_max = data_["scene"]["radius_max"].get<double>();
  return s;
}

sim::MotionPriorConfig RunConfig::motion_prior() const {
  sim::MotionPriorConfig m;
  m.joint_vel_std = data_["motion_prior"]["joint_vel_std"].get<double>();
  m.root_vel_std = data_["motion_prior"]["root_vel_std"].get<double>();
  m.smoothing = data_["motion_prior"]["smoothing"].get<double>();
  m.limits = joint_limits();
  m.seed = seed();
  m.validate();
  return m;
}

int RunConfig::episode_frames() const {
  int frames = data_["episode"]["frames"].get<int>();
  require(frames >= 1, ErrorCode::InvalidArgument,
          "config: episode.frames must be >= 1");
  return frames;
}

wm::ModelConfig RunConfig::model() const {
  wm::ModelConfig m;
  m.latent_dim = data_["encoder"]["latent_dim"].get<int>();
  m.context_len = data_["model"]["context_len"].get<int>();
  m.hidden = data_["model"]["hidden"].get<std::vector<int>>();
  m.validate();
  return m;
}

wm::TrainConfig RunConfig::train() const {
  wm::TrainConfig t;
  t.lambda = data_["train"]["lambda"].get<double>();
  t.learning_rate = data_["train"]["learning_rate"].get<double>();
  t.beta1 = data_["train"]["beta1"].get<double>();
  t.beta2 = data_["train"]["beta2"].get<double>();
  t.weight_decay = data_["train"]["weight_decay"].get<double>();
  t.clip_norm = data_["train"]["clip_norm"].get<double>();
  t.batch_size = data_["train"]["batch_size"].get<int>();
  t.iterations = data_["train"]["iterations"].get<int>();
  t.ema_decay = data_["train"]["ema_decay"].get<double>();
  t.seed = mix_seed(seed(), "train");
  t.validate();
  return t;
}

int RunConfig::planner_candidates() const {
  return data_["planner"]["num_candidates"].get<int>();
}

int RunConfig::planner_horizon() const {
  return data_["planner"]["horizon"].get<int>();
}

plan::CostMode RunConfig::planner_cost_mode() const {
  return plan::cost_mode_from_string(
      data_["planner"]["cost_mode"].get<std::string>());
}

data::QualityStatsConfig RunConfig::quality_stats() const {
  data::QualityStatsConfig q;
  q.black_luma = data_["filter"]["black_luma"].get<int>();
  q.white_luma = data_["filter"]["white_luma"].get<int>();
  q.crop_px = data_["filter"]["crop_px"].get<int>();
  return q;
}

data::QualityThresholds RunConfig::quality_thresholds() const {
  data::QualityThresholds t;
  t.black_fraction_max = data_["filter"]["black_fraction_max"].get<double>();
  t.white_fraction_max = data_["filter"]["white_fraction_max"].get<double>();
  t.blur_min = data_["filter"]["blur_min"].get<double>();
  t.motion_max = data_["filter"]["motion_max"].get<double>();
  return t;
}

data::CutConfig RunConfig::cut_config() const {
  data::CutConfig c;
  c.histogram_bins = data_["filter"]["histogram_bins"].get<int>();
  c.k = data_["filter"]["cut_k"].get<double>();
  c.window = data_["filter"]["cut_window"].get<int>();
  c.min_distance = data_["filter"]["min_cut_distance"].get<double>();
  return c;
}

int RunConfig::filter_min_duration() const {
  return data_["filter"]["min_duration"].get<int>();
}

std::string RunConfig::validator_url() const {
  return data_["filter"]["validator_url"].get<std::string>();
}

data::ValidatorConfig RunConfig::validator() const {
  data::ValidatorConfig v;
  v.attempts = data_["filter"]["validator_attempts"].get<int>();
  v.backoff_ms = data_["filter"]["validator_backoff_ms"].get<int>();
  return v;
}

data::PostprocessConfig RunConfig::postprocess() const {
  data::PostprocessConfig p;
  p.expected_frames = data_["postprocess"]["expected_frames"].get<int>();
  p.crop_fraction = data_["postprocess"]["crop_fraction"].get<double>();
  p.out_size = data_["postprocess"]["out_size"].get<int>();
  p.temporal_stride = data_["postprocess"]["temporal_stride"].get<int>();
  return p;
}

metrics::PckConfig RunConfig::pck() const {
  metrics::PckConfig p;
  p.grid = data_["heatmap"]["grid"].get<int>();
  p.image_scale =
      data_["camera"]["image_width"].get<double>() / metrics::PckConfig::kRefPx;
  return p;
}

std::uint64_t RunConfig::seed() const {
  return data_["run"]["seed"].get<std::uint64_t>();
}

const char* version_string() { return EWM_VERSION; }
const char* build_stamp() { return EWM_BUILD_STAMP; }

}  // namespace ewm
