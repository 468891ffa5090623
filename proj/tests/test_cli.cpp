#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include "core/binio.hpp"
#include "helpers.hpp"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(EWM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    result.output.append(buf.data(), n);
  int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace

TEST_CASE("help enumerates every config key with its default") {
  CliResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  for (const char* needle :
       {"gen-data", "filter", "train", "eval-rollout", "plan", "report",
        "planner.horizon = 8", "train.learning_rate = 0.001",
        "filter.motion_max = 32.5", "run.seed = 12345",
        "heatmap.sigma_px = 3.0"})
    CHECK(r.output.find(needle) != std::string::npos);
}

TEST_CASE("usage errors exit with code 1 and a parsable record") {
  CliResult none = run_cli("");
  CHECK(none.exit_code == 1);
  CHECK(none.output.find("ewm-error: code=usage") != std::string::npos);

  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("gen-data").exit_code == 1);  // missing --out
  CHECK(run_cli("--set planner.nope=1 gen-data --out /tmp/x.ewds").exit_code == 1);
  CHECK(run_cli("--set planner.horizon gen-data --out /tmp/x.ewds").exit_code == 1);
}

TEST_CASE("data and io errors map to distinct nonzero codes") {
  ewm::test::TempDir dir("cli_err");
  ewm::write_file_text(dir.file("garbage.ewds"), "this is not a dataset");
  CliResult bad = run_cli("train --data " + dir.file("garbage.ewds") + " --out " +
                          dir.file("m.ewck") + " --iters 1");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("code=data") != std::string::npos);

  CliResult missing = run_cli("train --data " + dir.file("absent.ewds") +
                              " --out " + dir.file("m.ewck") + " --iters 1");
  CHECK(missing.exit_code == 3);
  CHECK(missing.output.find("code=io") != std::string::npos);
}

TEST_CASE("an existing lock file blocks a second writer") {
  ewm::test::TempDir dir("cli_lock");
  ewm::write_file_text(dir.file("out.ewds.lock"), "");
  CliResult r = run_cli("gen-data --out " + dir.file("out.ewds") +
                        " --episodes 1 --frames 2");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("locked") != std::string::npos);
  // Lock released after a successful run: the same path works twice in a row.
  std::filesystem::remove(dir.file("out.ewds.lock"));
  std::string small = "--set scene.landmark_count=6 gen-data --out " +
                      dir.file("out2.ewds") + " --episodes 1 --frames 2";
  CHECK(run_cli(small).exit_code == 0);
  CHECK(run_cli(small).exit_code == 0);
}

TEST_CASE("the shipped demo config loads and drives the pipeline") {
  ewm::test::TempDir dir("cli_demo");
  std::string demo = std::string("--config ") + EWM_SOURCE_DIR
      "/configs/demo.json --set scene.landmark_count=8 ";
  REQUIRE(run_cli(demo + "gen-data --out " + dir.file("d.ewds") +
                  " --episodes 2 --frames 12")
              .exit_code == 0);
  REQUIRE(run_cli(demo + "train --data " + dir.file("d.ewds") + " --out " +
                  dir.file("m.ewck") + " --iters 8")
              .exit_code == 0);
  REQUIRE(run_cli(demo + "eval-rollout --model " + dir.file("m.ewck") +
                  " --data " + dir.file("d.ewds") + " --out " + dir.file("r.txt"))
              .exit_code == 0);
  std::string report = ewm::read_file_text(dir.file("r.txt"));
  CHECK(report.find("\"seed\":7") != std::string::npos);  // config echo
  CHECK(report.find("avg_l2 ") != std::string::npos);
}

TEST_CASE("plan emits one row per run plus mean and std") {
  ewm::test::TempDir dir("cli_plan");
  std::string tiny = "--set scene.landmark_count=6 --set model.hidden=[16] ";
  REQUIRE(run_cli(tiny + "gen-data --out " + dir.file("d.ewds") +
                  " --episodes 3 --frames 12")
              .exit_code == 0);
  REQUIRE(run_cli(tiny + "train --data " + dir.file("d.ewds") + " --out " +
                  dir.file("m.ewck") + " --iters 10")
              .exit_code == 0);
  REQUIRE(run_cli(tiny + "plan --model " + dir.file("m.ewck") + " --out " +
                  dir.file("p.txt") + " --episodes 2 --runs 5")
              .exit_code == 0);
  std::string report = ewm::read_file_text(dir.file("p.txt"));
  for (int r = 0; r < 5; ++r)
    CHECK(report.find("run " + std::to_string(r) + " mpjpe ") != std::string::npos);
  CHECK(report.find("run 5 ") == std::string::npos);
  CHECK(report.find("mean mpjpe ") != std::string::npos);
  CHECK(report.find("mean wrist_mpjpe ") != std::string::npos);
  CHECK(report.find(" std ") != std::string::npos);
  CHECK(report.find("single_run 0") != std::string::npos);
  CHECK(report.find("costs 0 chosen ") != std::string::npos);

  // Receding-horizon mode replans each step and reports it.
  REQUIRE(run_cli(tiny + "plan --model " + dir.file("m.ewck") + " --out " +
                  dir.file("rh.txt") + " --episodes 1 --runs 1 --replan 3")
              .exit_code == 0);
  std::string replan = ewm::read_file_text(dir.file("rh.txt"));
  CHECK(replan.find("replan 3") != std::string::npos);
  CHECK(replan.find("run 0 mpjpe ") != std::string::npos);

  // Plot-ready CSV from the same report.
  REQUIRE(run_cli("report --in " + dir.file("p.txt") + " --out " +
                  dir.file("p.csv"))
              .exit_code == 0);
  std::string csv = ewm::read_file_text(dir.file("p.csv"));
  CHECK(csv.rfind("run,mpjpe,wrist_mpjpe,goal_dist\n", 0) == 0);
}
