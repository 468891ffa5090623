#pragma once

#include <span>
#include <optional>
#include <vector>

#include "core/features.hpp"
#include "core/kinematics.hpp"
#include "core/worldmodel.hpp"

namespace ewm::metrics {

// Per-vector Euclidean norm of the difference (not a per-dimension mean), so
// reported magnitudes are comparable across latent sizes.
double latent_l2(const wm::LatentState& a, const wm::LatentState& b);

struct PckConfig {
  int grid = 28;              // heatmap cells
  double threshold_px = 20.0; // at the reference resolution
  double image_scale = 1.0;   // multiplies the 224-px reference frame
  static constexpr double kRefPx = 224.0;
};

struct FramePrediction {
  std::optional<feat::GridCell> cell;          // argmax, nullopt = no signal
  std::vector<feat::Keypoint> ground_truth;    // visible iff confidence >= 0.3
};

// Fraction of frames whose predicted wrist lands within the threshold
// (inclusive) of any visible ground-truth wrist; frames with no visible
// ground truth are excluded from the denominator. Returns nullopt when
// no frame counts.
std::optional<double> pck_at_20(std::span<const FramePrediction> frames,
                                const PckConfig& cfg);

// Mean over frames and joints of the Euclidean FK position error.
double mpjpe(std::span<const kin::BodyPose> pred,
             std::span<const kin::BodyPose> gt,
             const kin::SkeletonTopology& topo);

// Same, restricted to the two wrist joints.
double wrist_mpjpe(std::span<const kin::BodyPose> pred,
                   std::span<const kin::BodyPose> gt,
                   const kin::SkeletonTopology& topo);

struct EvalEpisode {
  std::vector<wm::LatentState> latents;                  // ground truth per frame
  std::vector<kin::Action> actions;                      // frames - 1
  std::vector<std::vector<feat::Keypoint>> keypoints;    // per frame
};

struct RolloutReport {
  std::vector<double> step_l2;   // horizon entries, mean over episodes
  double final_l2 = 0;
  double avg_l2 = 0;
  std::vector<double> step_pck;  // -1 marks steps with no countable frame
  double final_pck = -1;
  double avg_pck = -1;
  int episodes_used = 0;
  int episodes_skipped = 0;
};

// Open-loop evaluation: seed the context with H ground-truth latents, roll
// the model out `horizon` steps under the ground-truth actions, and score
// each step. Wrist PCK comes from the head applied to predicted latents.
// Episodes shorter than H + horizon frames are skipped with a warning on
// stderr.
RolloutReport eval_rollout(const wm::RolloutModel& model,
                           const wm::WristHead* head, int context_len,
                           std::span<const EvalEpisode> episodes, int horizon,
                           const PckConfig& pck);

}  // namespace ewm::metrics
