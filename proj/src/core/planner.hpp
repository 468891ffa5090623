#pragma once

#include <span>
#include <cstdint>
#include <vector>

#include "core/simulator.hpp"
#include "core/worldmodel.hpp"

namespace ewm::plan {

enum class CostMode { Final, MinOverHorizon };

CostMode cost_mode_from_string(const std::string& s);
const char* to_string(CostMode mode);

struct PlanRequest {
  std::vector<wm::LatentState> context;  // H ground-truth latents
  kin::BodyPose current_pose;
  wm::LatentState goal_latent;
  int horizon = 8;
  int num_candidates = 4;
  sim::MotionPriorConfig sampler;
  CostMode cost_mode = CostMode::Final;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlanResult {
  int chosen_index = 0;
  sim::MotionSequence chosen_actions;
  std::vector<double> costs;
  std::vector<wm::LatentState> predicted_final_latents;
};

// Squared Euclidean distance between the final rollout latent and the goal.
double score_candidate(const wm::RolloutModel& model,
                       std::span<const wm::LatentState> context,
                       std::span<const kin::Action> actions,
                       const wm::LatentState& goal_latent);

// Samples num_candidates motion sequences (candidate i's seed derives from
// request seed and i, so earlier candidates are stable as N grows), scores
// each under the model, and returns the argmin with lowest-index tie-break.
PlanResult plan(const wm::RolloutModel& model, const PlanRequest& req);

// Per-metric mean and sample standard deviation across runs.
struct RunSummary {
  double mean = 0;
  double stddev = 0;     // 0 by convention for a single run
  bool single_run = false;
};

RunSummary plan_report(std::span<const double> per_run_values);

}  // namespace ewm::plan
