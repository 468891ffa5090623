#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "core/datapipe.hpp"
#include "core/egocam.hpp"
#include "core/features.hpp"
#include "core/kinematics.hpp"
#include "core/metrics.hpp"
#include "core/planner.hpp"
#include "core/simulator.hpp"
#include "core/worldmodel.hpp"

namespace ewm {

// Sectioned run configuration. Backed by a JSON document validated against
// the built-in defaults: unknown keys are rejected, and every key carries the
// shipped default unless a config file or --set override supplies it.
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig load(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);

  // Dotted override, e.g. set("planner.horizon", "8"); values are parsed as
  // JSON, falling back to a plain string.
  void set(const std::string& dotted_key, const std::string& value);

  // Canonical single-line echo embedded into every output artifact.
  std::string echo() const;
  std::string pretty() const;
  // "section.key = default" lines for --help.
  std::vector<std::string> flat_keys() const;

  // Typed views used by the pipeline.
  kin::SkeletonTopology topology() const;
  kin::JointMap joint_map() const;
  kin::JointLimits joint_limits() const;
  cam::Intrinsics intrinsics() const;
  feat::EncoderConfig encoder() const;
  feat::HeatmapConfig heatmap() const;
  sim::SceneConfig scene() const;
  sim::MotionPriorConfig motion_prior() const;
  int episode_frames() const;
  wm::ModelConfig model() const;
  wm::TrainConfig train() const;
  int planner_candidates() const;
  int planner_horizon() const;
  plan::CostMode planner_cost_mode() const;
  data::QualityStatsConfig quality_stats() const;
  data::QualityThresholds quality_thresholds() const;
  data::CutConfig cut_config() const;
  int filter_min_duration() const;
  std::string validator_url() const;
  data::ValidatorConfig validator() const;
  data::PostprocessConfig postprocess() const;
  metrics::PckConfig pck() const;
  std::uint64_t seed() const;

  const nlohmann::json& json() const { return data_; }

 private:
  nlohmann::json data_;
};

const char* version_string();
const char* build_stamp();

}  // namespace ewm
