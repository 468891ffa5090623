#include <doctest.h>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/planner.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using namespace ewm;
using namespace ewm::plan;

namespace {

// Deterministic toy dynamics: decays the last latent and folds the action in.
struct ToyRollout final : wm::RolloutModel {
  int dim;
  explicit ToyRollout(int d) : dim(d) {}
  std::vector<wm::LatentState> rollout(
      std::span<const wm::LatentState> context,
      std::span<const kin::Action> actions) const override {
    wm::LatentState z = context.back();
    std::vector<wm::LatentState> out;
    for (const auto& a : actions) {
      auto flat = kin::flatten_action(a);
      wm::LatentState next(dim);
      for (int i = 0; i < dim; ++i)
        next[i] = 0.9 * z[i] + 0.1 * flat[i % kin::kActionDim];
      z = next;
      out.push_back(z);
    }
    return out;
  }
};

// Ignores actions entirely; every candidate scores the same.
struct ConstantRollout final : wm::RolloutModel {
  wm::LatentState value;
  std::vector<wm::LatentState> rollout(
      std::span<const wm::LatentState>,
      std::span<const kin::Action> actions) const override {
    return std::vector<wm::LatentState>(actions.size(), value);
  }
};

PlanRequest basic_request(int dim, std::uint64_t seed) {
  PlanRequest req;
  Rng rng(seed);
  wm::LatentState z(dim);
  for (int i = 0; i < dim; ++i) z[i] = rng.uniform();
  req.context = {z, z, z};
  req.goal_latent = wm::LatentState::Zero(dim);
  req.current_pose = kin::BodyPose{};
  req.horizon = 8;
  req.num_candidates = 4;
  req.sampler.seed = seed;
  req.seed = seed;
  return req;
}

}  // namespace

TEST_CASE("score_candidate is zero when the goal equals the final latent") {
  ToyRollout model(16);
  PlanRequest req = basic_request(16, 5);
  auto actions = sim::sample_motion(req.sampler, req.current_pose, 8, 9);
  auto latents = model.rollout(req.context, actions);
  double cost = score_candidate(model, req.context, actions, latents.back());
  CHECK(cost == 0.0);
}

TEST_CASE("score_candidate matches an independent recomputation") {
  ToyRollout model(16);
  PlanRequest req = basic_request(16, 6);
  auto actions = sim::sample_motion(req.sampler, req.current_pose, 8, 10);
  double cost = score_candidate(model, req.context, actions, req.goal_latent);

  auto latents = model.rollout(req.context, actions);
  long double acc = 0;  // separate dot-product route
  for (int i = 0; i < latents.back().size(); ++i) {
    long double d = latents.back()[i] - req.goal_latent[i];
    acc += d * d;
  }
  CHECK(std::abs(cost - static_cast<double>(acc)) < 1e-12);
}

TEST_CASE("plan with a single candidate chooses index zero") {
  ToyRollout model(8);
  PlanRequest req = basic_request(8, 7);
  req.num_candidates = 1;
  PlanResult result = plan::plan(model, req);
  CHECK(result.chosen_index == 0);
  CHECK(result.costs.size() == 1);
}

TEST_CASE("bit-equal costs break ties toward the lowest index") {
  ConstantRollout model;
  model.value = wm::LatentState::Constant(8, 0.25);
  PlanRequest req = basic_request(8, 8);
  PlanResult result = plan::plan(model, req);
  for (double c : result.costs) CHECK(c == result.costs[0]);
  CHECK(result.chosen_index == 0);
}

TEST_CASE("plan is deterministic and the chosen index is the argmin") {
  ToyRollout model(16);
  PlanRequest req = basic_request(16, 9);
  PlanResult a = plan::plan(model, req);
  PlanResult b = plan::plan(model, req);
  CHECK(a.chosen_index == b.chosen_index);
  CHECK(a.costs == b.costs);

  // Brute-force argmin with lowest-index tie-break.
  int best = 0;
  for (std::size_t i = 1; i < a.costs.size(); ++i)
    if (a.costs[i] < a.costs[best]) best = static_cast<int>(i);
  CHECK(a.chosen_index == best);

  // Argmin is invariant under any strictly monotone transform of the costs.
  int best_exp = 0;
  for (std::size_t i = 1; i < a.costs.size(); ++i)
    if (std::exp(a.costs[i]) < std::exp(a.costs[best_exp]))
      best_exp = static_cast<int>(i);
  CHECK(best_exp == best);
}

TEST_CASE("adding candidates never changes earlier ones") {
  ToyRollout model(16);
  PlanRequest req = basic_request(16, 10);
  req.num_candidates = 3;
  PlanResult small = plan::plan(model, req);
  req.num_candidates = 6;
  PlanResult large = plan::plan(model, req);
  for (int i = 0; i < 3; ++i) CHECK(small.costs[i] == large.costs[i]);
}

TEST_CASE("min_over_horizon scores the closest rollout state") {
  ToyRollout model(8);
  PlanRequest req = basic_request(8, 11);
  req.cost_mode = CostMode::MinOverHorizon;
  PlanResult result = plan::plan(model, req);
  // Recompute: the cost must equal the minimum over the predicted latents.
  for (int i = 0; i < req.num_candidates; ++i) {
    auto actions = sim::sample_motion(req.sampler, req.current_pose, req.horizon,
                                      mix_seed(req.seed, (std::uint64_t)i));
    auto latents = model.rollout(req.context, actions);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : latents)
      best = std::min(best, (z - req.goal_latent).squaredNorm());
    CHECK(result.costs[i] == best);
  }
}

TEST_CASE("a degenerate sampler config is rejected") {
  ToyRollout model(8);
  PlanRequest req = basic_request(8, 12);
  req.sampler.smoothing = 1.0;
  CHECK_THROWS_AS(plan::plan(model, req), Error);
  req = basic_request(8, 12);
  req.horizon = 0;
  CHECK_THROWS_AS(plan::plan(model, req), Error);
}

TEST_CASE("plan_report computes mean and sample deviation") {
  auto single = plan_report(std::vector<double>{1.5});
  CHECK(single.mean == 1.5);
  CHECK(single.stddev == 0.0);
  CHECK(single.single_run);

  auto constant = plan_report(std::vector<double>{2.0, 2.0, 2.0, 2.0, 2.0});
  CHECK(constant.mean == 2.0);
  CHECK(constant.stddev == 0.0);
  CHECK(!constant.single_run);

  // Spreadsheet-style recomputation on five random values.
  Rng rng(13);
  std::vector<double> values;
  for (int i = 0; i < 5; ++i) values.push_back(rng.uniform(0.0, 10.0));
  auto summary = plan_report(values);
  long double mean = 0;
  for (double v : values) mean += v;
  mean /= values.size();
  long double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  long double sd = std::sqrt(static_cast<double>(sq / (values.size() - 1)));
  CHECK(std::abs(summary.mean - static_cast<double>(mean)) < 1e-12);
  CHECK(std::abs(summary.stddev - static_cast<double>(sd)) < 1e-12);
}

TEST_CASE("oracle dynamics recover the goal-generating candidate") {
  // Small-scale version of the planner acceptance check (10 seeds here).
  RunConfig cfg = RunConfig::defaults();
  auto topo = cfg.topology();
  auto intr = cfg.intrinsics();
  auto enc = cfg.encoder();
  auto prior = cfg.motion_prior();

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SceneSpec scene = sim::make_scene(cfg.scene(), 300 + seed);
    kin::BodyPose start = sim::sample_start_pose(scene, topo, 400 + seed);
    sim::OracleRollout oracle(scene, start, topo, intr, enc, prior.limits);

    PlanRequest req;
    kin::FkResult fk = kin::forward_kinematics(start, topo);
    auto z0 = feat::encode(
        cam::render_observation(scene, cam::build_ego_camera(fk), intr), enc);
    req.context = {z0, z0, z0};
    req.current_pose = start;
    req.horizon = 8;
    req.num_candidates = 4;
    req.sampler = prior;
    req.seed = 500 + seed;

    for (int j = 0; j < req.num_candidates; ++j) {
      auto actions_j = sim::sample_motion(prior, start, req.horizon,
                                          mix_seed(req.seed, (std::uint64_t)j));
      req.goal_latent = oracle.rollout(req.context, actions_j).back();
      PlanResult result = plan::plan(oracle, req);
      CHECK(result.chosen_index == j);
      CHECK(result.costs[j] == 0.0);
    }
  }
}
