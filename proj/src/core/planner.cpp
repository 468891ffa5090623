#include "core/planner.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ewm::plan {

CostMode cost_mode_from_string(const std::string& s) {
  if (s == "final") return CostMode::Final;
  if (s == "min_over_horizon") return CostMode::MinOverHorizon;
  throw Error(ErrorCode::InvalidArgument, "unknown cost_mode: " + s);
}

const char* to_string(CostMode mode) {
  return mode == CostMode::Final ? "final" : "min_over_horizon";
}

void PlanRequest::validate() const {
  require(horizon >= 1, ErrorCode::InvalidArgument, "plan: horizon must be >= 1");
  require(num_candidates >= 1, ErrorCode::InvalidArgument,
          "plan: need at least one candidate");
  require(!context.empty(), ErrorCode::InvalidArgument, "plan: empty context");
  require(goal_latent.size() > 0, ErrorCode::InvalidArgument,
          "plan: empty goal latent");
  sampler.validate();  // degenerate sampler config rejected here
}

namespace {

double cost_of(std::span<const wm::LatentState> latents,
               const wm::LatentState& goal, CostMode mode) {
  require(!latents.empty(), ErrorCode::Internal, "plan: empty rollout");
  if (mode == CostMode::Final) return (latents.back() - goal).squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : latents) best = std::min(best, (z - goal).squaredNorm());
  return best;
}

}  // namespace

double score_candidate(const wm::RolloutModel& model,
                       std::span<const wm::LatentState> context,
                       std::span<const kin::Action> actions,
                       const wm::LatentState& goal_latent) {
  auto latents = model.rollout(context, actions);
  return cost_of(latents, goal_latent, CostMode::Final);
}

PlanResult plan(const wm::RolloutModel& model, const PlanRequest& req) {
  req.validate();
  PlanResult result;
  result.costs.reserve(req.num_candidates);
  result.predicted_final_latents.reserve(req.num_candidates);

  std::vector<sim::MotionSequence> candidates;
  candidates.reserve(req.num_candidates);
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < req.num_candidates; ++i) {
    std::uint64_t candidate_seed = mix_seed(req.seed, static_cast<std::uint64_t>(i));
    candidates.push_back(sim::sample_motion(req.sampler, req.current_pose,
                                            req.horizon, candidate_seed));
    auto latents = model.rollout(req.context, candidates.back());
    double cost = cost_of(latents, req.goal_latent, req.cost_mode);
    result.costs.push_back(cost);
    result.predicted_final_latents.push_back(latents.back());
    if (cost < best_cost) {  // strict: ties keep the lowest index
      best_cost = cost;
      result.chosen_index = i;
    }
  }
  result.chosen_actions = candidates[result.chosen_index];
  return result;
}

RunSummary plan_report(std::span<const double> per_run_values) {
  require(!per_run_values.empty(), ErrorCode::InvalidArgument,
          "plan_report: need at least one run");
  RunSummary s;
  s.single_run = per_run_values.size() == 1;
  double sum = 0;
  for (double v : per_run_values) sum += v;
  s.mean = sum / per_run_values.size();
  if (!s.single_run) {
    double sq = 0;
    for (double v : per_run_values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / (per_run_values.size() - 1));
  }
  return s;
}

}  // namespace ewm::plan
