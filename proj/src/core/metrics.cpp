#include "core/metrics.hpp"

#include <cmath>
#include <iostream>

#include "core/error.hpp"

namespace ewm::metrics {

double latent_l2(const wm::LatentState& a, const wm::LatentState& b) {
  require(a.size() == b.size(), ErrorCode::InvalidArgument,
          "latent_l2: dimension mismatch");
  return (a - b).norm();
}

std::optional<double> pck_at_20(std::span<const FramePrediction> frames,
                                const PckConfig& cfg) {
  require(cfg.grid > 0 && cfg.image_scale > 0, ErrorCode::InvalidArgument,
          "pck: bad config");
  double image_px = PckConfig::kRefPx * cfg.image_scale;
  double threshold = cfg.threshold_px * cfg.image_scale;
  int counted = 0, correct = 0;
  for (const auto& frame : frames) {
    bool any_visible = false;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& kp : frame.ground_truth) {
      if (kp.confidence < 0.3) continue;
      any_visible = true;
      if (frame.cell) {
        double px = feat::cell_center_px(frame.cell->col, cfg.grid, image_px);
        double py = feat::cell_center_px(frame.cell->row, cfg.grid, image_px);
        best = std::min(best, std::hypot(px - kp.x, py - kp.y));
      }
    }
    if (!any_visible) continue;  // excluded from the denominator
    ++counted;
    if (best <= threshold) ++correct;
  }
  if (counted == 0) return std::nullopt;
  return static_cast<double>(correct) / counted;
}

namespace {

double joint_error_mean(std::span<const kin::BodyPose> pred,
                        std::span<const kin::BodyPose> gt,
                        const kin::SkeletonTopology& topo,
                        std::span<const int> joints) {
  require(pred.size() == gt.size(), ErrorCode::InvalidArgument,
          "mpjpe: sequence lengths differ");
  require(!pred.empty(), ErrorCode::InvalidArgument, "mpjpe: empty sequences");
  double total = 0;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    kin::FkResult a = kin::forward_kinematics(pred[f], topo);
    kin::FkResult b = kin::forward_kinematics(gt[f], topo);
    for (int j : joints) total += (a.position[j] - b.position[j]).norm();
  }
  return total / (static_cast<double>(pred.size()) * joints.size());
}

}  // namespace

double mpjpe(std::span<const kin::BodyPose> pred,
             std::span<const kin::BodyPose> gt,
             const kin::SkeletonTopology& topo) {
  std::vector<int> all(topo.joint_count);
  for (int j = 0; j < topo.joint_count; ++j) all[j] = j;
  return joint_error_mean(pred, gt, topo, all);
}

double wrist_mpjpe(std::span<const kin::BodyPose> pred,
                   std::span<const kin::BodyPose> gt,
                   const kin::SkeletonTopology& topo) {
  const int wrists[2] = {topo.left_wrist_index, topo.right_wrist_index};
  return joint_error_mean(pred, gt, topo, wrists);
}

RolloutReport eval_rollout(const wm::RolloutModel& model,
                           const wm::WristHead* head, int context_len,
                           std::span<const EvalEpisode> episodes, int horizon,
                           const PckConfig& pck) {
  require(horizon >= 1 && context_len >= 1, ErrorCode::InvalidArgument,
          "eval_rollout: horizon and context must be >= 1");
  RolloutReport report;
  report.step_l2.assign(horizon, 0.0);
  std::vector<std::vector<FramePrediction>> step_frames(horizon);

  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const EvalEpisode& ep = episodes[e];
    int frames = static_cast<int>(ep.latents.size());
    if (frames < context_len + horizon) {
      std::cerr << "eval_rollout: skipping episode " << e << " with " << frames
                << " frames (need " << context_len + horizon << ")\n";
      ++report.episodes_skipped;
      continue;
    }
    require(ep.actions.size() + 1 == ep.latents.size(),
            ErrorCode::InvalidArgument, "eval_rollout: action count mismatch");

    std::span<const wm::LatentState> ctx(ep.latents.data(), context_len);
    std::span<const kin::Action> acts(ep.actions.data() + context_len - 1,
                                      horizon);
    auto preds = model.rollout(ctx, acts);

    for (int t = 0; t < horizon; ++t) {
      int frame = context_len + t;  // frame predicted at step t+1
      report.step_l2[t] += latent_l2(preds[t], ep.latents[frame]);
      if (head) {
        FramePrediction fp;
        fp.cell = feat::heatmap_argmax(head->predict_heatmap(preds[t]));
        if (frame < static_cast<int>(ep.keypoints.size()))
          fp.ground_truth = ep.keypoints[frame];
        step_frames[t].push_back(std::move(fp));
      }
    }
    ++report.episodes_used;
  }

  require(report.episodes_used > 0, ErrorCode::InvalidArgument,
          "eval_rollout: no usable episodes");
  double sum = 0;
  for (double& v : report.step_l2) {
    v /= report.episodes_used;
    sum += v;
  }
  report.final_l2 = report.step_l2.back();
  report.avg_l2 = sum / horizon;

  if (head) {
    report.step_pck.assign(horizon, -1.0);
    double pck_sum = 0;
    int pck_steps = 0;
    for (int t = 0; t < horizon; ++t) {
      auto v = pck_at_20(step_frames[t], pck);
      if (v) {
        report.step_pck[t] = *v;
        pck_sum += *v;
        ++pck_steps;
      }
    }
    if (report.step_pck.back() >= 0) report.final_pck = report.step_pck.back();
    if (pck_steps > 0) report.avg_pck = pck_sum / pck_steps;
  }
  return report;
}

}  // namespace ewm::metrics
