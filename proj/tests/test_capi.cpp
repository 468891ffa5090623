#include <doctest.h>

#include <cstring>
#include <string>

#include "ewm/ewm.h"
#include "core/image.hpp"
#include "helpers.hpp"

using ewm::test::TempDir;

namespace {

struct Config {
  ewm_config* cfg = nullptr;
  Config() { REQUIRE(ewm_config_create_default(&cfg) == EWM_OK); }
  ~Config() { ewm_config_free(cfg); }
};

}  // namespace

TEST_CASE("capi exposes version and build info") {
  CHECK(ewm_version() != nullptr);
  CHECK(std::strlen(ewm_version()) > 0);
  CHECK(ewm_build_stamp() != nullptr);
}

TEST_CASE("capi config set, dump, and key listing") {
  Config c;
  CHECK(ewm_config_set(c.cfg, "planner.horizon", "3") == EWM_OK);
  char* dump = ewm_config_dump(c.cfg);
  REQUIRE(dump != nullptr);
  CHECK(std::string(dump).find("\"horizon\": 3") != std::string::npos);
  ewm_string_free(dump);

  char* keys = ewm_config_keys(c.cfg);
  REQUIRE(keys != nullptr);
  CHECK(std::string(keys).find("train.learning_rate") != std::string::npos);
  ewm_string_free(keys);

  CHECK(ewm_config_set(c.cfg, "planner.bogus", "1") == EWM_ERROR_USAGE);
  CHECK(std::string(ewm_last_error()).find("bogus") != std::string::npos);
  CHECK(ewm_config_set(nullptr, "a.b", "1") == EWM_ERROR_USAGE);
}

TEST_CASE("capi apply/between round trip on raw arrays") {
  double pose[EWM_POSE_DIM] = {0};
  double action[EWM_ACTION_DIM];
  for (int i = 0; i < EWM_ACTION_DIM; ++i) action[i] = 0.001 * (i + 1);
  double next[EWM_POSE_DIM], recovered[EWM_ACTION_DIM];
  REQUIRE(ewm_apply_action(pose, action, M_PI, next) == EWM_OK);
  REQUIRE(ewm_action_between(pose, next, recovered) == EWM_OK);
  for (int i = 0; i < EWM_ACTION_DIM; ++i)
    CHECK(recovered[i] == doctest::Approx(action[i]).epsilon(1e-15));

  double nan_pose[EWM_POSE_DIM] = {0};
  nan_pose[5] = std::nan("");
  CHECK(ewm_apply_action(nan_pose, action, M_PI, next) == EWM_ERROR_USAGE);
}

TEST_CASE("capi encodes images and scores clip quality") {
  TempDir dir("capi");
  Config c;
  ewm::write_ppm(ewm::Image(224, 224, 0), dir.file("black.ppm"));
  double latent[64];
  REQUIRE(ewm_encode_ppm(c.cfg, dir.file("black.ppm").c_str(), latent, 64) == EWM_OK);
  for (double v : latent) CHECK(v == 0.0);
  CHECK(ewm_encode_ppm(c.cfg, dir.file("black.ppm").c_str(), latent, 32) ==
        EWM_ERROR_USAGE);
  CHECK(ewm_encode_ppm(c.cfg, dir.file("missing.ppm").c_str(), latent, 64) ==
        EWM_ERROR_IO);

  std::filesystem::create_directories(dir.path() / "clip");
  ewm::write_ppm(ewm::Image(32, 32, 0), (dir.path() / "clip/f0.ppm").string());
  ewm::write_ppm(ewm::Image(32, 32, 0), (dir.path() / "clip/f1.ppm").string());
  double stats[4];
  REQUIRE(ewm_quality_stats_dir(c.cfg, (dir.path() / "clip").string().c_str(),
                                stats) == EWM_OK);
  CHECK(stats[0] == 1.0);  // all-black
  int pass = -1;
  REQUIRE(ewm_passes_quality(c.cfg, stats, &pass) == EWM_OK);
  CHECK(pass == 0);
}

TEST_CASE("capi runs the pipeline and serves model rollouts") {
  TempDir dir("capi_pipe");
  Config c;
  // Tiny settings to keep this test fast.
  REQUIRE(ewm_config_set(c.cfg, "scene.landmark_count", "12") == EWM_OK);

  REQUIRE(ewm_run_gen_data(c.cfg, dir.file("d.ewds").c_str(), 4, 10, 0, 0) == EWM_OK);
  REQUIRE(ewm_run_train(c.cfg, dir.file("d.ewds").c_str(),
                        dir.file("m.ewck").c_str(), dir.file("log.jsonl").c_str(),
                        25, 0) == EWM_OK);
  REQUIRE(ewm_run_eval_rollout(c.cfg, dir.file("m.ewck").c_str(),
                               dir.file("d.ewds").c_str(),
                               dir.file("r.txt").c_str(), nullptr, 4) == EWM_OK);
  REQUIRE(ewm_run_report(dir.file("r.txt").c_str(), dir.file("r.csv").c_str()) ==
          EWM_OK);

  ewm_model* model = nullptr;
  REQUIRE(ewm_model_load(dir.file("m.ewck").c_str(), &model) == EWM_OK);
  CHECK(ewm_model_latent_dim(model) == 64);
  CHECK(ewm_model_context_len(model) == 3);

  std::vector<double> context(3 * 64, 0.5);
  std::vector<double> actions(2 * EWM_ACTION_DIM, 0.01);
  std::vector<double> out(2 * 64), out2(2 * 64);
  REQUIRE(ewm_model_rollout(model, context.data(), actions.data(), 2, 1,
                            out.data()) == EWM_OK);
  REQUIRE(ewm_model_rollout(model, context.data(), actions.data(), 2, 1,
                            out2.data()) == EWM_OK);
  CHECK(out == out2);
  REQUIRE(ewm_model_rollout(model, context.data(), actions.data(), 0, 1,
                            out.data()) == EWM_ERROR_USAGE);
  ewm_model_free(model);

  CHECK(ewm_model_load(dir.file("nothing.ewck").c_str(), &model) == EWM_ERROR_IO);
  CHECK(ewm_run_report(dir.file("log.jsonl").c_str(), dir.file("x.csv").c_str()) ==
        EWM_ERROR_DATA);
}
