#pragma once

#include <cstdint>
#include <string>

#include "core/config.hpp"

namespace ewm::pipe {

struct GenDataArgs {
  std::string out_path;
  int episodes = 50;
  int frames = 0;          // 0 = config episode.frames
  std::uint64_t seed = 0;  // 0 = config run.seed
  bool store_latents = false;
};
void cmd_gen_data(const RunConfig& cfg, const GenDataArgs& args);

struct FilterArgs {
  std::string in_dir;
  std::string out_manifest;
  int min_duration = -1;         // -1 = config filter.min_duration
  std::string thresholds_path;   // optional override file
  std::string validator_url;     // optional; empty falls back to config
  data::CameraMotionGate* motion_gate = nullptr;  // optional, in-process only
};
void cmd_filter(const RunConfig& cfg, const FilterArgs& args);

struct TrainArgs {
  std::string dataset_path;
  std::string checkpoint_out;
  std::string log_out;     // optional JSONL training log
  int iterations = 0;      // 0 = config train.iterations
  std::uint64_t seed = 0;  // 0 = config run.seed
};
void cmd_train(const RunConfig& cfg, const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint_path;
  std::string dataset_path;
  std::string report_out;
  std::string csv_out;  // optional per-step CSV
  int horizon = 0;      // 0 = config planner.horizon
};
void cmd_eval_rollout(const RunConfig& cfg, const EvalArgs& args);

struct PlanArgs {
  std::string checkpoint_path;
  std::string report_out;
  int episodes = 20;
  int runs = 1;
  // 0 = single-shot ranking; K > 0 replans every step for K steps, executing
  // the first action of each chosen sequence (receding horizon).
  int replan = 0;
  std::uint64_t seed = 0;  // 0 = config run.seed
};
void cmd_plan(const RunConfig& cfg, const PlanArgs& args);

struct ReportArgs {
  std::string in_path;
  std::string out_csv;
};
void cmd_report(const ReportArgs& args);

// Shared plumbing, used by commands and the acceptance suite.

// Synthetic episodes in dataset-record form; record e uses scene and motion
// seeds derived from (seed, e).
std::vector<data::DatasetRecord> generate_records(const RunConfig& cfg,
                                                  int episodes, int frames,
                                                  std::uint64_t seed,
                                                  bool store_latents);

// Builds teacher-forcing transitions from dataset records: contexts of H
// ground-truth latents, the next action, the next latent, the next frame's
// wrist heatmap, and the visibility mask.
wm::TrainSet make_transitions(const data::Dataset& ds, const RunConfig& cfg);

std::vector<metrics::EvalEpisode> eval_episodes_from_dataset(
    const data::Dataset& ds, const RunConfig& cfg);

// Exclusive-ownership guard on an output path ("<path>.lock").
class LockFile {
 public:
  explicit LockFile(const std::string& target);
  ~LockFile();
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
};

}  // namespace ewm::pipe
