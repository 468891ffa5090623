#include "ewm/ewm.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

ewm_status map_code(ewm::ErrorCode code) {
  using ewm::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return EWM_ERROR_USAGE;
    case ErrorCode::ParseError: return EWM_ERROR_DATA;
    case ErrorCode::IoError: return EWM_ERROR_IO;
    case ErrorCode::DegenerateCamera: return EWM_ERROR_DEGENERATE_CAMERA;
    case ErrorCode::CorruptRecord: return EWM_ERROR_CORRUPT_RECORD;
    case ErrorCode::ClipRejected: return EWM_ERROR_CLIP_REJECTED;
    case ErrorCode::Internal: return EWM_ERROR_INTERNAL;
  }
  return EWM_ERROR_INTERNAL;
}

template <typename Fn>
ewm_status guarded(Fn&& fn) {
  try {
    fn();
    return EWM_OK;
  } catch (const ewm::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EWM_ERROR_INTERNAL;
  }
}

ewm_status fail_usage(const char* msg) {
  g_last_error = msg;
  return EWM_ERROR_USAGE;
}

const ewm::RunConfig& as_config(const ewm_config* cfg) {
  return *reinterpret_cast<const ewm::RunConfig*>(cfg);
}

ewm::RunConfig& as_config(ewm_config* cfg) {
  return *reinterpret_cast<ewm::RunConfig*>(cfg);
}

std::string opt_str(const char* s) { return s ? s : ""; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void pose_from_array(const double v[EWM_POSE_DIM], ewm::kin::BodyPose& pose) {
  ewm::kin::ActionVec packed{};
  std::memcpy(packed.data(), v, sizeof(packed));
  ewm::kin::Action as_action = ewm::kin::unflatten_action(packed);
  pose.root_translation = as_action.delta_root;
  pose.joint_euler = as_action.delta_joint_euler;
}

void pose_to_array(const ewm::kin::BodyPose& pose, double v[EWM_POSE_DIM]) {
  ewm::kin::Action as_action;
  as_action.delta_root = pose.root_translation;
  as_action.delta_joint_euler = pose.joint_euler;
  auto packed = ewm::kin::flatten_action(as_action);
  std::memcpy(v, packed.data(), sizeof(packed));
}

struct ModelHandle {
  ewm::wm::Checkpoint ckpt;
};

}  // namespace

extern "C" {

const char* ewm_version(void) { return ewm::version_string(); }
const char* ewm_build_stamp(void) { return ewm::build_stamp(); }
const char* ewm_last_error(void) { return g_last_error.c_str(); }
void ewm_string_free(char* s) { std::free(s); }

ewm_status ewm_config_create_default(ewm_config** out) {
  if (!out) return fail_usage("null output pointer");
  return guarded([&] {
    *out = reinterpret_cast<ewm_config*>(
        new ewm::RunConfig(ewm::RunConfig::defaults()));
  });
}

ewm_status ewm_config_load(const char* path, ewm_config** out) {
  if (!path || !out) return fail_usage("null path or output pointer");
  return guarded([&] {
    *out = reinterpret_cast<ewm_config*>(
        new ewm::RunConfig(ewm::RunConfig::load(path)));
  });
}

ewm_status ewm_config_set(ewm_config* cfg, const char* dotted_key,
                          const char* value) {
  if (!cfg || !dotted_key || !value) return fail_usage("null argument");
  return guarded([&] { as_config(cfg).set(dotted_key, value); });
}

char* ewm_config_dump(const ewm_config* cfg) {
  if (!cfg) return nullptr;
  return dup_string(as_config(cfg).pretty());
}

char* ewm_config_keys(const ewm_config* cfg) {
  if (!cfg) return nullptr;
  std::string out;
  for (const auto& line : as_config(cfg).flat_keys()) {
    out += line;
    out += '\n';
  }
  return dup_string(out);
}

void ewm_config_free(ewm_config* cfg) {
  delete reinterpret_cast<ewm::RunConfig*>(cfg);
}

ewm_status ewm_run_gen_data(const ewm_config* cfg, const char* out_path,
                            int episodes, int frames, uint64_t seed,
                            int store_latents) {
  if (!cfg || !out_path) return fail_usage("null config or output path");
  return guarded([&] {
    ewm::pipe::GenDataArgs args;
    args.out_path = out_path;
    args.episodes = episodes;
    args.frames = frames;
    args.seed = seed;
    args.store_latents = store_latents != 0;
    ewm::pipe::cmd_gen_data(as_config(cfg), args);
  });
}

ewm_status ewm_run_filter(const ewm_config* cfg, const char* in_dir,
                          const char* out_manifest, int min_duration,
                          const char* thresholds_path,
                          const char* validator_url) {
  if (!cfg || !in_dir || !out_manifest)
    return fail_usage("null config or paths");
  return guarded([&] {
    ewm::pipe::FilterArgs args;
    args.in_dir = in_dir;
    args.out_manifest = out_manifest;
    args.min_duration = min_duration;
    args.thresholds_path = opt_str(thresholds_path);
    args.validator_url = opt_str(validator_url);
    ewm::pipe::cmd_filter(as_config(cfg), args);
  });
}

ewm_status ewm_run_train(const ewm_config* cfg, const char* dataset_path,
                         const char* checkpoint_out, const char* log_out,
                         int iterations, uint64_t seed) {
  if (!cfg || !dataset_path || !checkpoint_out)
    return fail_usage("null config or paths");
  return guarded([&] {
    ewm::pipe::TrainArgs args;
    args.dataset_path = dataset_path;
    args.checkpoint_out = checkpoint_out;
    args.log_out = opt_str(log_out);
    args.iterations = iterations;
    args.seed = seed;
    ewm::pipe::cmd_train(as_config(cfg), args);
  });
}

ewm_status ewm_run_eval_rollout(const ewm_config* cfg,
                                const char* checkpoint_path,
                                const char* dataset_path,
                                const char* report_out, const char* csv_out,
                                int horizon) {
  if (!cfg || !checkpoint_path || !dataset_path || !report_out)
    return fail_usage("null config or paths");
  return guarded([&] {
    ewm::pipe::EvalArgs args;
    args.checkpoint_path = checkpoint_path;
    args.dataset_path = dataset_path;
    args.report_out = report_out;
    args.csv_out = opt_str(csv_out);
    args.horizon = horizon;
    ewm::pipe::cmd_eval_rollout(as_config(cfg), args);
  });
}

ewm_status ewm_run_plan(const ewm_config* cfg, const char* checkpoint_path,
                        const char* report_out, int episodes, int runs,
                        int replan_steps, uint64_t seed) {
  if (!cfg || !checkpoint_path || !report_out)
    return fail_usage("null config or paths");
  return guarded([&] {
    ewm::pipe::PlanArgs args;
    args.checkpoint_path = checkpoint_path;
    args.report_out = report_out;
    args.episodes = episodes;
    args.runs = runs;
    args.replan = replan_steps;
    args.seed = seed;
    ewm::pipe::cmd_plan(as_config(cfg), args);
  });
}

ewm_status ewm_run_report(const char* in_path, const char* out_csv) {
  if (!in_path || !out_csv) return fail_usage("null paths");
  return guarded([&] {
    ewm::pipe::ReportArgs args;
    args.in_path = in_path;
    args.out_csv = out_csv;
    ewm::pipe::cmd_report(args);
  });
}

ewm_status ewm_apply_action(const double pose[EWM_POSE_DIM],
                            const double action[EWM_ACTION_DIM],
                            double joint_limit_rad,
                            double out_pose[EWM_POSE_DIM]) {
  if (!pose || !action || !out_pose) return fail_usage("null array");
  return guarded([&] {
    ewm::kin::BodyPose p;
    pose_from_array(pose, p);
    ewm::kin::ActionVec packed{};
    std::memcpy(packed.data(), action, sizeof(packed));
    ewm::kin::JointLimits limits{-joint_limit_rad, joint_limit_rad};
    ewm::kin::BodyPose next =
        ewm::kin::apply_action(p, ewm::kin::unflatten_action(packed), limits);
    pose_to_array(next, out_pose);
  });
}

ewm_status ewm_action_between(const double pose_a[EWM_POSE_DIM],
                              const double pose_b[EWM_POSE_DIM],
                              double out_action[EWM_ACTION_DIM]) {
  if (!pose_a || !pose_b || !out_action) return fail_usage("null array");
  return guarded([&] {
    ewm::kin::BodyPose a, b;
    pose_from_array(pose_a, a);
    pose_from_array(pose_b, b);
    auto packed = ewm::kin::flatten_action(ewm::kin::action_between(a, b));
    std::memcpy(out_action, packed.data(), sizeof(packed));
  });
}

ewm_status ewm_encode_ppm(const ewm_config* cfg, const char* ppm_path,
                          double* out_latent, size_t latent_len) {
  if (!cfg || !ppm_path || !out_latent) return fail_usage("null argument");
  return guarded([&] {
    auto enc = as_config(cfg).encoder();
    ewm::require(latent_len == static_cast<size_t>(enc.latent_dim),
                 ewm::ErrorCode::InvalidArgument,
                 "latent_len does not match the configured latent dimension");
    auto z = ewm::feat::encode(ewm::read_ppm(ppm_path), enc);
    std::memcpy(out_latent, z.data(), sizeof(double) * latent_len);
  });
}

ewm_status ewm_quality_stats_dir(const ewm_config* cfg, const char* clip_dir,
                                 double out_stats[4]) {
  if (!cfg || !clip_dir || !out_stats) return fail_usage("null argument");
  return guarded([&] {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(clip_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".ppm")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<ewm::Image> frames;
    for (const auto& f : files) frames.push_back(ewm::read_ppm(f.string()));
    auto stats =
        ewm::data::compute_quality_stats(frames, as_config(cfg).quality_stats());
    out_stats[0] = stats.black_fraction_mean;
    out_stats[1] = stats.white_fraction_mean;
    out_stats[2] = stats.blur_median;
    out_stats[3] = stats.motion_median;
  });
}

ewm_status ewm_passes_quality(const ewm_config* cfg, const double stats[4],
                              int* out_pass) {
  if (!cfg || !stats || !out_pass) return fail_usage("null argument");
  return guarded([&] {
    ewm::data::ClipQualityStats s;
    s.black_fraction_mean = stats[0];
    s.white_fraction_mean = stats[1];
    s.blur_median = stats[2];
    s.motion_median = stats[3];
    *out_pass =
        ewm::data::passes_quality(s, as_config(cfg).quality_thresholds()) ? 1 : 0;
  });
}

ewm_status ewm_model_load(const char* checkpoint_path, ewm_model** out) {
  if (!checkpoint_path || !out) return fail_usage("null argument");
  return guarded([&] {
    auto* handle = new ModelHandle{ewm::wm::load_checkpoint(checkpoint_path)};
    *out = reinterpret_cast<ewm_model*>(handle);
  });
}

int ewm_model_latent_dim(const ewm_model* m) {
  if (!m) return 0;
  return reinterpret_cast<const ModelHandle*>(m)->ckpt.model_config.latent_dim;
}

int ewm_model_context_len(const ewm_model* m) {
  if (!m) return 0;
  return reinterpret_cast<const ModelHandle*>(m)->ckpt.model_config.context_len;
}

ewm_status ewm_model_rollout(const ewm_model* m, const double* context,
                             const double* actions, int num_actions,
                             int use_ema, double* out_latents) {
  if (!m || !context || !actions || !out_latents)
    return fail_usage("null argument");
  if (num_actions < 1) return fail_usage("num_actions must be >= 1");
  return guarded([&] {
    const auto& ckpt = reinterpret_cast<const ModelHandle*>(m)->ckpt;
    int latent_dim = ckpt.model_config.latent_dim;
    int H = ckpt.model_config.context_len;
    std::vector<ewm::wm::LatentState> ctx;
    for (int h = 0; h < H; ++h)
      ctx.push_back(Eigen::Map<const Eigen::VectorXd>(context + h * latent_dim,
                                                      latent_dim));
    std::vector<ewm::kin::Action> acts;
    for (int t = 0; t < num_actions; ++t) {
      ewm::kin::ActionVec packed{};
      std::memcpy(packed.data(), actions + t * EWM_ACTION_DIM, sizeof(packed));
      acts.push_back(ewm::kin::unflatten_action(packed));
    }
    auto latents =
        ewm::wm::rollout(use_ema ? ckpt.ema_model : ckpt.model, ctx, acts);
    for (int t = 0; t < num_actions; ++t)
      std::memcpy(out_latents + t * latent_dim, latents[t].data(),
                  sizeof(double) * latent_dim);
  });
}

void ewm_model_free(ewm_model* m) { delete reinterpret_cast<ModelHandle*>(m); }

}  // extern "C"
