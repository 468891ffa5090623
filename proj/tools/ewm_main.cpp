// Command-line front end for the ewm pipeline. Everything goes through the
// public C API in ewm/ewm.h; this file owns only argument parsing and exit
// codes.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewm/ewm.h"

namespace {

const char* status_name(ewm_status s) {
  switch (s) {
    case EWM_OK: return "ok";
    case EWM_ERROR_USAGE: return "usage";
    case EWM_ERROR_DATA: return "data";
    case EWM_ERROR_IO: return "io";
    case EWM_ERROR_DEGENERATE_CAMERA: return "degenerate_camera";
    case EWM_ERROR_CORRUPT_RECORD: return "corrupt_record";
    case EWM_ERROR_CLIP_REJECTED: return "clip_rejected";
    case EWM_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

// One-line machine-parsable error record; the status value is the exit code.
int fail(ewm_status s, const std::string& message) {
  std::fprintf(stderr, "ewm-error: code=%s message=\"%s\"\n", status_name(s),
               message.c_str());
  return static_cast<int>(s);
}

int fail(ewm_status s) { return fail(s, ewm_last_error()); }

struct ConfigHandle {
  ewm_config* cfg = nullptr;
  ~ConfigHandle() { ewm_config_free(cfg); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ewm - synthetic egocentric world-model pipeline"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Run configuration file (JSON)");
  app.add_option("--set", overrides,
                 "Override a config key, e.g. --set planner.horizon=4");
  app.set_version_flag("--version", [] {
    return std::string(ewm_version()) + " (" + ewm_build_stamp() + ")";
  });

  {
    ConfigHandle defaults;
    if (ewm_config_create_default(&defaults.cfg) == EWM_OK) {
      char* keys = ewm_config_keys(defaults.cfg);
      app.footer(std::string("Configuration keys and defaults:\n") + keys);
      ewm_string_free(keys);
    }
  }

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_out;
  int gen_episodes = 50, gen_frames = 0;
  std::uint64_t gen_seed = 0;
  bool gen_latents = false;
  gen->add_option("--out", gen_out, "Output dataset file")->required();
  gen->add_option("--episodes", gen_episodes, "Episode count");
  gen->add_option("--frames", gen_frames, "Frames per episode (0 = config)");
  gen->add_option("--seed", gen_seed, "Seed override (0 = config)");
  gen->add_flag("--latents", gen_latents, "Store encoded latents instead of images");

  // filter
  auto* filter = app.add_subcommand("filter", "Segment and quality-filter clips");
  std::string filter_in, filter_out, filter_thresholds, filter_validator;
  int filter_min_duration = -1;
  filter->add_option("--in", filter_in, "Directory of clip subdirectories")->required();
  filter->add_option("--out", filter_out, "Manifest output path")->required();
  filter->add_option("--min-duration", filter_min_duration,
                     "Minimum segment length in frames (-1 = config)");
  filter->add_option("--thresholds", filter_thresholds, "Threshold override file");
  filter->add_option("--validator", filter_validator,
                     "Validator endpoint, e.g. http://127.0.0.1:8080/validate");

  // train
  auto* train = app.add_subcommand("train", "Train the latent dynamics model");
  std::string train_data, train_out, train_log;
  int train_iters = 0;
  std::uint64_t train_seed = 0;
  train->add_option("--data", train_data, "Training dataset")->required();
  train->add_option("--out", train_out, "Checkpoint output path")->required();
  train->add_option("--log", train_log, "Training log (JSONL)");
  train->add_option("--iters", train_iters, "Iteration override (0 = config)");
  train->add_option("--seed", train_seed, "Seed override (0 = config)");

  // eval-rollout
  auto* eval = app.add_subcommand("eval-rollout", "Open-loop rollout evaluation");
  std::string eval_model, eval_data, eval_out, eval_csv;
  int eval_horizon = 0;
  eval->add_option("--model", eval_model, "Checkpoint path")->required();
  eval->add_option("--data", eval_data, "Evaluation dataset")->required();
  eval->add_option("--out", eval_out, "Report output path")->required();
  eval->add_option("--csv", eval_csv, "Optional per-step CSV");
  eval->add_option("--horizon", eval_horizon, "Rollout length (0 = config)");

  // plan
  auto* plan = app.add_subcommand("plan", "Goal-conditioned candidate ranking");
  std::string plan_model, plan_out;
  int plan_episodes = 20, plan_runs = 1, plan_replan = 0;
  std::uint64_t plan_seed = 0;
  plan->add_option("--model", plan_model, "Checkpoint path")->required();
  plan->add_option("--out", plan_out, "Report output path")->required();
  plan->add_option("--episodes", plan_episodes, "Evaluation episodes");
  plan->add_option("--runs", plan_runs, "Independent planner runs");
  plan->add_option("--replan", plan_replan,
                   "Receding-horizon steps (0 = single-shot ranking)");
  plan->add_option("--seed", plan_seed, "Seed override (0 = config)");

  // report
  auto* report = app.add_subcommand("report", "Convert a report to plot-ready CSV");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "Report or manifest file")->required();
  report->add_option("--out", report_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(EWM_ERROR_USAGE, e.what());
  }

  if (app.get_subcommands().empty())
    return fail(EWM_ERROR_USAGE, "missing subcommand (see --help)");

  ConfigHandle cfg;
  ewm_status st = config_path.empty()
                      ? ewm_config_create_default(&cfg.cfg)
                      : ewm_config_load(config_path.c_str(), &cfg.cfg);
  if (st != EWM_OK) return fail(st);
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      return fail(EWM_ERROR_USAGE, "--set expects key=value, got '" + kv + "'");
    st = ewm_config_set(cfg.cfg, kv.substr(0, eq).c_str(),
                        kv.substr(eq + 1).c_str());
    if (st != EWM_OK) return fail(st);
  }

  if (gen->parsed()) {
    st = ewm_run_gen_data(cfg.cfg, gen_out.c_str(), gen_episodes, gen_frames,
                          gen_seed, gen_latents ? 1 : 0);
  } else if (filter->parsed()) {
    st = ewm_run_filter(cfg.cfg, filter_in.c_str(), filter_out.c_str(),
                        filter_min_duration,
                        filter_thresholds.empty() ? nullptr : filter_thresholds.c_str(),
                        filter_validator.empty() ? nullptr : filter_validator.c_str());
  } else if (train->parsed()) {
    st = ewm_run_train(cfg.cfg, train_data.c_str(), train_out.c_str(),
                       train_log.empty() ? nullptr : train_log.c_str(),
                       train_iters, train_seed);
  } else if (eval->parsed()) {
    st = ewm_run_eval_rollout(cfg.cfg, eval_model.c_str(), eval_data.c_str(),
                              eval_out.c_str(),
                              eval_csv.empty() ? nullptr : eval_csv.c_str(),
                              eval_horizon);
  } else if (plan->parsed()) {
    st = ewm_run_plan(cfg.cfg, plan_model.c_str(), plan_out.c_str(),
                      plan_episodes, plan_runs, plan_replan, plan_seed);
  } else if (report->parsed()) {
    st = ewm_run_report(report_in.c_str(), report_out.c_str());
  }

  if (st != EWM_OK) return fail(st);
  return 0;
}
