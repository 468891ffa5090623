#include "core/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "core/binio.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace ewm::pipe {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string artifact_header(const char* kind, const RunConfig& cfg) {
  std::ostringstream out;
  out << "# " << kind << " v1\n"
      << "# build " << version_string() << " " << build_stamp() << "\n"
      << "# config " << cfg.echo() << "\n";
  return out.str();
}

}  // namespace

LockFile::LockFile(const std::string& target) : path_(target + ".lock") {
  int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  require(fd >= 0, ErrorCode::IoError,
          "output is locked by another run (remove " + path_ +
              " if that run is gone)");
  ::close(fd);
}

LockFile::~LockFile() { ::unlink(path_.c_str()); }

std::vector<data::DatasetRecord> generate_records(const RunConfig& cfg,
                                                  int episodes, int frames,
                                                  std::uint64_t seed,
                                                  bool store_latents) {
  require(episodes >= 1, ErrorCode::InvalidArgument,
          "gen-data: episodes must be >= 1");
  const auto topo = cfg.topology();
  const auto intr = cfg.intrinsics();
  const auto enc = cfg.encoder();
  const auto prior = cfg.motion_prior();
  const auto scene_cfg = cfg.scene();

  std::vector<data::DatasetRecord> records;
  records.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    SceneSpec scene = sim::make_scene(scene_cfg, mix_seed(seed, "gen-scene") + e);
    sim::Episode ep = sim::generate_episode(scene, prior, topo, intr, frames,
                                            mix_seed(mix_seed(seed, "gen-episode"), e));
    data::DatasetRecord rec;
    rec.id = static_cast<std::uint64_t>(e);
    rec.source = data::SourceTag::Synthetic;
    rec.actions = ep.actions;
    for (const auto& wrists : ep.wrists)
      rec.keypoints.emplace_back(wrists.begin(), wrists.end());
    if (store_latents)
      for (const auto& img : ep.images) rec.latents.push_back(feat::encode(img, enc));
    else
      rec.images = std::move(ep.images);
    records.push_back(std::move(rec));
  }
  return records;
}

void cmd_gen_data(const RunConfig& cfg, const GenDataArgs& args) {
  require(!args.out_path.empty(), ErrorCode::InvalidArgument,
          "gen-data: missing output path");
  LockFile lock(args.out_path);
  std::uint64_t seed = args.seed ? args.seed : cfg.seed();
  int frames = args.frames ? args.frames : cfg.episode_frames();
  auto records = generate_records(cfg, args.episodes, frames, seed,
                                  args.store_latents);
  data::write_dataset(records, args.out_path, cfg.echo());
}

wm::TrainSet make_transitions(const data::Dataset& ds, const RunConfig& cfg) {
  const auto enc = cfg.encoder();
  const auto hm = cfg.heatmap();
  const auto model_cfg = cfg.model();
  int H = model_cfg.context_len;
  int D = model_cfg.latent_dim;
  int G2 = hm.grid * hm.grid;

  // Count transitions first to size the matrices once.
  std::size_t count = 0;
  for (const auto& rec : ds.records) {
    int frames = rec.frames();
    if (frames >= H + 1) count += frames - H;
  }
  require(count > 0, ErrorCode::InvalidArgument,
          "train: dataset yields no transitions");

  wm::TrainSet set;
  set.contexts.resize(count, H * D);
  set.actions.resize(count, kin::kActionDim);
  set.targets.resize(count, D);
  set.heatmaps.resize(count, G2);
  set.wrist_mask.resize(count);

  std::size_t row = 0;
  for (const auto& rec : ds.records) {
    int frames = rec.frames();
    if (frames < H + 1) continue;
    std::vector<wm::LatentState> latents;
    latents.reserve(frames);
    if (!rec.latents.empty()) {
      for (const auto& z : rec.latents) {
        require(z.size() == D, ErrorCode::InvalidArgument,
                "train: stored latent dimension does not match config");
        latents.push_back(z);
      }
    } else {
      for (const auto& img : rec.images) latents.push_back(feat::encode(img, enc));
    }
    for (int t = H - 1; t + 1 < frames; ++t) {
      for (int h = 0; h < H; ++h)
        set.contexts.row(row).segment(h * D, D) = latents[t - H + 1 + h];
      auto flat = kin::flatten_action(rec.actions[t]);
      for (int i = 0; i < kin::kActionDim; ++i) set.actions(row, i) = flat[i];
      set.targets.row(row) = latents[t + 1];
      feat::WristHeatmap heat = feat::make_wrist_heatmap(rec.keypoints[t + 1], hm);
      set.heatmaps.row(row) = heat.values;
      set.wrist_mask[row] = feat::wrist_visible(rec.keypoints[t + 1], hm) ? 1 : 0;
      ++row;
    }
  }
  return set;
}

std::vector<metrics::EvalEpisode> eval_episodes_from_dataset(
    const data::Dataset& ds, const RunConfig& cfg) {
  const auto enc = cfg.encoder();
  std::vector<metrics::EvalEpisode> episodes;
  episodes.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    metrics::EvalEpisode ep;
    if (!rec.latents.empty())
      ep.latents = rec.latents;
    else
      for (const auto& img : rec.images) ep.latents.push_back(feat::encode(img, enc));
    ep.actions = rec.actions;
    ep.keypoints = rec.keypoints;
    episodes.push_back(std::move(ep));
  }
  return episodes;
}

void cmd_train(const RunConfig& cfg, const TrainArgs& args) {
  require(!args.dataset_path.empty() && !args.checkpoint_out.empty(),
          ErrorCode::InvalidArgument, "train: missing dataset or output path");
  LockFile lock(args.checkpoint_out);

  data::Dataset ds = data::read_dataset(args.dataset_path);
  wm::TrainSet set = make_transitions(ds, cfg);

  wm::TrainConfig tc = cfg.train();
  if (args.iterations) tc.iterations = args.iterations;
  if (args.seed) tc.seed = mix_seed(args.seed, "train");
  wm::TrainResult result = wm::train(set, cfg.model(), cfg.heatmap().grid, tc);

  wm::Checkpoint ckpt;
  ckpt.model_config = cfg.model();
  ckpt.heatmap_grid = cfg.heatmap().grid;
  ckpt.model = std::move(result.model);
  ckpt.head = std::move(result.head);
  ckpt.ema_model = std::move(result.ema_model);
  ckpt.ema_head = std::move(result.ema_head);
  ckpt.config_echo = cfg.echo();
  wm::save_checkpoint(ckpt, args.checkpoint_out);

  if (!args.log_out.empty()) {
    std::ostringstream log;
    for (const auto& entry : result.log)
      log << "{\"step\":" << entry.step << ",\"latent_loss\":" << fmt(entry.latent_loss)
          << ",\"wrist_loss\":" << fmt(entry.wrist_loss)
          << ",\"grad_norm\":" << fmt(entry.grad_norm) << "}\n";
    write_file_text(args.log_out, log.str());
  }
}

void cmd_eval_rollout(const RunConfig& cfg, const EvalArgs& args) {
  require(!args.checkpoint_path.empty() && !args.dataset_path.empty() &&
              !args.report_out.empty(),
          ErrorCode::InvalidArgument, "eval-rollout: missing paths");
  LockFile lock(args.report_out);

  wm::Checkpoint ckpt = wm::load_checkpoint(args.checkpoint_path);
  data::Dataset ds = data::read_dataset(args.dataset_path);
  auto episodes = eval_episodes_from_dataset(ds, cfg);
  int horizon = args.horizon ? args.horizon : cfg.planner_horizon();

  wm::LearnedRollout model(ckpt.ema_model);  // evaluation uses EMA weights
  metrics::RolloutReport report = metrics::eval_rollout(
      model, &ckpt.ema_head, ckpt.model_config.context_len, episodes, horizon,
      cfg.pck());

  std::ostringstream out;
  out << artifact_header("ewm-rollout-report", cfg);
  out << "episodes_used " << report.episodes_used << "\n"
      << "episodes_skipped " << report.episodes_skipped << "\n"
      << "horizon " << horizon << "\n"
      << "context " << ckpt.model_config.context_len << "\n";
  for (int t = 0; t < horizon; ++t) {
    out << "step " << t + 1 << " l2 " << fmt(report.step_l2[t]) << " pck20 ";
    if (!report.step_pck.empty() && report.step_pck[t] >= 0)
      out << fmt(report.step_pck[t]);
    else
      out << "na";
    out << "\n";
  }
  out << "final_l2 " << fmt(report.final_l2) << "\n"
      << "avg_l2 " << fmt(report.avg_l2) << "\n"
      << "final_pck " << (report.final_pck >= 0 ? fmt(report.final_pck) : "na")
      << "\n"
      << "avg_pck " << (report.avg_pck >= 0 ? fmt(report.avg_pck) : "na")
      << "\n";
  write_file_text(args.report_out, out.str());

  if (!args.csv_out.empty()) {
    std::ostringstream csv;
    csv << "step,l2,pck20\n";
    for (int t = 0; t < horizon; ++t) {
      csv << t + 1 << "," << fmt(report.step_l2[t]) << ",";
      if (!report.step_pck.empty() && report.step_pck[t] >= 0)
        csv << fmt(report.step_pck[t]);
      csv << "\n";
    }
    write_file_text(args.csv_out, csv.str());
  }
}

void cmd_plan(const RunConfig& cfg, const PlanArgs& args) {
  require(!args.checkpoint_path.empty() && !args.report_out.empty(),
          ErrorCode::InvalidArgument, "plan: missing paths");
  require(args.episodes >= 1 && args.runs >= 1, ErrorCode::InvalidArgument,
          "plan: episodes and runs must be >= 1");
  LockFile lock(args.report_out);

  wm::Checkpoint ckpt = wm::load_checkpoint(args.checkpoint_path);
  const auto topo = cfg.topology();
  const auto intr = cfg.intrinsics();
  const auto enc = cfg.encoder();
  const auto prior = cfg.motion_prior();
  const auto scene_cfg = cfg.scene();
  std::uint64_t seed = args.seed ? args.seed : cfg.seed();
  int H = ckpt.model_config.context_len;
  int horizon = cfg.planner_horizon();
  int frames = H + horizon;

  // Evaluation episodes are fixed across runs; only the candidate sampling
  // seed varies per run.
  struct PlanEpisode {
    SceneSpec scene;
    sim::Episode ep;
    std::vector<wm::LatentState> context;
    wm::LatentState goal;
  };
  std::vector<PlanEpisode> episodes;
  for (int e = 0; e < args.episodes; ++e) {
    PlanEpisode pe;
    pe.scene = sim::make_scene(scene_cfg, mix_seed(seed, "plan-scene") + e);
    pe.ep = sim::generate_episode(pe.scene, prior, topo, intr, frames,
                                  mix_seed(mix_seed(seed, "plan-episode"), e));
    for (int h = 0; h < H; ++h)
      pe.context.push_back(feat::encode(pe.ep.images[h], enc));
    pe.goal = feat::encode(pe.ep.images[frames - 1], enc);
    episodes.push_back(std::move(pe));
  }

  require(args.replan >= 0 && args.replan <= horizon, ErrorCode::InvalidArgument,
          "plan: --replan must be between 0 and the planning horizon");
  int executed_steps = args.replan > 0 ? args.replan : horizon;

  wm::LearnedRollout model(ckpt.ema_model);
  std::vector<double> run_mpjpe, run_wrist, run_goal;
  std::ostringstream costs_block;
  for (int r = 0; r < args.runs; ++r) {
    std::uint64_t run_seed = mix_seed(mix_seed(seed, "plan-run"), r);
    double sum_mpjpe = 0, sum_wrist = 0, sum_goal = 0;
    for (int e = 0; e < args.episodes; ++e) {
      const PlanEpisode& pe = episodes[e];
      plan::PlanRequest req;
      req.context = pe.context;
      req.current_pose = pe.ep.poses[H - 1];
      req.goal_latent = pe.goal;
      req.horizon = horizon;
      req.num_candidates = cfg.planner_candidates();
      req.sampler = prior;
      req.cost_mode = cfg.planner_cost_mode();
      req.seed = mix_seed(run_seed, static_cast<std::uint64_t>(e));

      // Executed trajectory: the chosen sequence in one shot, or a receding
      // horizon that re-plans from the freshly rendered observation.
      std::vector<kin::BodyPose> executed;
      wm::LatentState final_latent;
      if (args.replan == 0) {
        plan::PlanResult result = plan::plan(model, req);
        kin::BodyPose pose = req.current_pose;
        for (const auto& a : result.chosen_actions) {
          pose = kin::apply_action(pose, a, prior.limits);
          executed.push_back(pose);
        }
        kin::FkResult fk = kin::forward_kinematics(executed.back(), topo);
        final_latent = feat::encode(
            cam::render_observation(pe.scene, cam::build_ego_camera(fk), intr), enc);
        if (r == 0) {
          costs_block << "costs " << e << " chosen " << result.chosen_index;
          for (std::size_t i = 0; i < result.costs.size(); ++i)
            costs_block << " c" << i << " " << fmt(result.costs[i]);
          costs_block << "\n";
        }
      } else {
        kin::BodyPose pose = req.current_pose;
        for (int k = 0; k < args.replan; ++k) {
          req.current_pose = pose;
          req.seed = mix_seed(mix_seed(run_seed, static_cast<std::uint64_t>(e)),
                              static_cast<std::uint64_t>(k));
          plan::PlanResult result = plan::plan(model, req);
          pose = kin::apply_action(pose, result.chosen_actions[0], prior.limits);
          executed.push_back(pose);
          kin::FkResult fk = kin::forward_kinematics(pose, topo);
          final_latent = feat::encode(
              cam::render_observation(pe.scene, cam::build_ego_camera(fk), intr),
              enc);
          req.context.erase(req.context.begin());
          req.context.push_back(final_latent);
        }
      }

      std::span<const kin::BodyPose> gt(pe.ep.poses.data() + H, executed_steps);
      sum_mpjpe += metrics::mpjpe(executed, gt, topo);
      sum_wrist += metrics::wrist_mpjpe(executed, gt, topo);
      sum_goal += metrics::latent_l2(final_latent, pe.goal);
    }
    run_mpjpe.push_back(sum_mpjpe / args.episodes);
    run_wrist.push_back(sum_wrist / args.episodes);
    run_goal.push_back(sum_goal / args.episodes);
  }

  plan::RunSummary s_mpjpe = plan::plan_report(run_mpjpe);
  plan::RunSummary s_wrist = plan::plan_report(run_wrist);
  plan::RunSummary s_goal = plan::plan_report(run_goal);

  std::ostringstream out;
  out << artifact_header("ewm-plan-report", cfg);
  out << "episodes " << args.episodes << "\n"
      << "runs " << args.runs << "\n"
      << "candidates " << cfg.planner_candidates() << "\n"
      << "horizon " << horizon << "\n"
      << "cost_mode " << plan::to_string(cfg.planner_cost_mode()) << "\n"
      << "replan " << args.replan << "\n";
  for (int r = 0; r < args.runs; ++r)
    out << "run " << r << " mpjpe " << fmt(run_mpjpe[r]) << " wrist_mpjpe "
        << fmt(run_wrist[r]) << " goal_dist " << fmt(run_goal[r]) << "\n";
  out << "mean mpjpe " << fmt(s_mpjpe.mean) << " std " << fmt(s_mpjpe.stddev)
      << "\n"
      << "mean wrist_mpjpe " << fmt(s_wrist.mean) << " std "
      << fmt(s_wrist.stddev) << "\n"
      << "mean goal_dist " << fmt(s_goal.mean) << " std " << fmt(s_goal.stddev)
      << "\n"
      << "single_run " << (s_mpjpe.single_run ? 1 : 0) << "\n"
      << "# per-episode candidate costs, run 0\n"
      << costs_block.str();
  write_file_text(args.report_out, out.str());
}

namespace {

std::vector<Image> read_clip_frames(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Image> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(read_ppm(f.string()));
  return frames;
}

}  // namespace

void cmd_filter(const RunConfig& cfg, const FilterArgs& args) {
  require(!args.in_dir.empty() && !args.out_manifest.empty(),
          ErrorCode::InvalidArgument, "filter: missing input dir or manifest path");
  require(fs::is_directory(args.in_dir), ErrorCode::IoError,
          "filter: not a directory: " + args.in_dir);
  LockFile lock(args.out_manifest);

  data::QualityThresholds thresholds = args.thresholds_path.empty()
                                           ? cfg.quality_thresholds()
                                           : data::load_thresholds(args.thresholds_path);
  int min_duration =
      args.min_duration >= 0 ? args.min_duration : cfg.filter_min_duration();
  std::string url = !args.validator_url.empty() ? args.validator_url
                                                : cfg.validator_url();
  std::unique_ptr<data::ValidatorClient> client;
  if (!url.empty()) client = data::make_http_validator_client(url);

  std::vector<fs::path> clips;
  for (const auto& entry : fs::directory_iterator(args.in_dir))
    if (entry.is_directory()) clips.push_back(entry.path());
  std::sort(clips.begin(), clips.end());

  std::ostringstream out;
  out << artifact_header("ewm-manifest", cfg);
  out << "# clip segment frames black white blur motion quality camera vlm verdict\n";
  int total = 0, accepted = 0;
  for (const auto& clip : clips) {
    std::string name = clip.filename().string();
    std::vector<Image> frames = read_clip_frames(clip);
    if (frames.size() < 2) {
      out << name << " - " << frames.size()
          << " - - - - fail skipped skipped reject\n";
      ++total;
      continue;
    }
    auto segments =
        data::detect_scene_cuts(frames, min_duration, cfg.cut_config());
    for (const auto& seg : segments) {
      ++total;
      if (seg.length() < 2) {  // nothing to measure on a single frame
        out << name << " " << seg.begin << ":" << seg.end << " "
            << seg.length() << " - - - - fail skipped skipped reject\n";
        continue;
      }
      std::span<const Image> view(frames.data() + seg.begin, seg.length());
      data::ClipQualityStats stats =
          data::compute_quality_stats(view, cfg.quality_stats());
      bool quality = data::passes_quality(stats, thresholds);
      std::string camera = "skipped";
      bool camera_ok = true;
      if (args.motion_gate && quality) {
        camera_ok = !args.motion_gate->excessive_motion(view);
        camera = camera_ok ? "pass" : "fail";
      }
      std::string vlm = "skipped";
      bool vlm_ok = true;
      if (client && quality && camera_ok) {
        std::array<Image, 3> sampled = {view[0], view[view.size() / 2],
                                        view[view.size() - 1]};
        try {
          data::ValidatorVerdict verdict =
              data::vlm_validate(*client, sampled, cfg.validator());
          vlm_ok = verdict.passes;
          vlm = verdict.passes ? "pass" : "fail";
        } catch (const Error& e) {
          vlm_ok = false;
          vlm = std::string("rejected:") + e.what();
        }
      }
      bool accept = quality && camera_ok && vlm_ok;
      if (accept) ++accepted;
      out << name << " " << seg.begin << ":" << seg.end << " " << seg.length()
          << " " << fmt(stats.black_fraction_mean) << " "
          << fmt(stats.white_fraction_mean) << " " << fmt(stats.blur_median)
          << " " << fmt(stats.motion_median) << " "
          << (quality ? "pass" : "fail") << " " << camera << " " << vlm << " "
          << (accept ? "accept" : "reject") << "\n";
    }
  }
  out << "# summary total " << total << " accepted " << accepted
      << " rejected " << total - accepted << "\n";
  write_file_text(args.out_manifest, out.str());
}

void cmd_report(const ReportArgs& args) {
  require(!args.in_path.empty() && !args.out_csv.empty(),
          ErrorCode::InvalidArgument, "report: missing paths");
  LockFile lock(args.out_csv);
  std::istringstream in(read_file_text(args.in_path));
  std::string first;
  std::getline(in, first);

  std::ostringstream csv;
  std::string line;
  if (first.rfind("# ewm-rollout-report", 0) == 0) {
    csv << "step,l2,pck20\n";
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      if (tag != "step") continue;
      int step;
      std::string l2_key, l2, pck_key, pck;
      ss >> step >> l2_key >> l2 >> pck_key >> pck;
      csv << step << "," << l2 << "," << (pck == "na" ? "" : pck) << "\n";
    }
  } else if (first.rfind("# ewm-plan-report", 0) == 0) {
    csv << "run,mpjpe,wrist_mpjpe,goal_dist\n";
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      if (tag != "run") continue;
      int run;
      std::string k1, v1, k2, v2, k3, v3;
      ss >> run >> k1 >> v1 >> k2 >> v2 >> k3 >> v3;
      csv << run << "," << v1 << "," << v2 << "," << v3 << "\n";
    }
  } else if (first.rfind("# ewm-manifest", 0) == 0) {
    csv << "clip,segment,frames,black,white,blur,motion,quality,camera,vlm,verdict\n";
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string f[11];
      for (auto& v : f) ss >> v;
      for (int i = 0; i < 11; ++i) csv << f[i] << (i == 10 ? "\n" : ",");
    }
  } else {
    throw Error(ErrorCode::ParseError,
                "report: unrecognized report file: " + args.in_path);
  }
  write_file_text(args.out_csv, csv.str());
}

}  // namespace ewm::pipe
