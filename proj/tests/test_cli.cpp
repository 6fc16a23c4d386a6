#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string("'") + RS_CLI + "' " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string p(const std::string& rel) { return "'" + testing::src_path(rel) + "'"; }

const std::string kWall = p("scenarios/wall_assembly.scn.json");
const std::string kGrid = p("scenarios/scan_grid.scn.json");

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(cli("validate " + kWall + " " + p("fixtures/exp1/llama.plan")).code == 0);
  Run bad = cli("validate " + kWall + " " + p("fixtures/exp1/draft.plan"));
  CHECK(bad.code == 3);
  CHECK(nlohmann::json::parse(bad.out)["psi"] == 1);
  CHECK(cli("validate " + kWall + " " + p("fixtures/exp1/draft.plan") + " --checks schema").code == 0);
  CHECK(cli("validate " + kWall + " /nonexistent.plan").code == 1);
  CHECK(cli("validate " + kWall + " " + p("fixtures/exp1/draft.plan") + " --checks warp").code == 1);
  Run sep = cli("validate " + kGrid + " " + p("fixtures/exp2/draft.plan") + " --coverage-separate");
  CHECK(sep.code == 3);
  CHECK(nlohmann::json::parse(sep.out)["violated_classes"][0] == "coverage");
}

TEST_CASE("repair prints the edit script") {
  Run r = cli("repair " + kWall + " " + p("fixtures/exp1/draft.plan") + " --supervisor search-minimal");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["outcome"] == "feasible");
  CHECK(j["iterations_used"] == 1);
  CHECK(j["script"]["cost"] == 2);
  CHECK(j["script"]["profile"]["substitutions"] == 2);

  Run llm = cli("repair " + kGrid + " " + p("fixtures/exp2/draft.plan") + " --supervisor llm:llama --profiles " +
                p("llm_profiles.json") + " --manifest " + p("fixtures/mocks/manifest.json"));
  REQUIRE(llm.code == 0);
  CHECK(nlohmann::json::parse(llm.out)["script"]["profile"]["insertions"] == 1);
  CHECK(cli("repair " + kWall + " " + p("fixtures/exp1/draft.plan") + " --supervisor oracle").code == 1);
}

TEST_CASE("simulate emits one line per step and a summary") {
  Run r = cli("simulate " + kWall + " " + p("fixtures/exp1/draft.plan"));
  REQUIRE(r.code == 0);
  std::vector<nlohmann::json> lines;
  std::size_t start = 0;
  while (start < r.out.size()) {
    auto nl = r.out.find('\n', start);
    lines.push_back(nlohmann::json::parse(r.out.substr(start, nl - start)));
    start = nl + 1;
  }
  REQUIRE(lines.size() == 15);
  CHECK(lines[6]["battery"] == 0.0);
  CHECK(lines.back()["makespan_tu"] == 14.0);
}

TEST_CASE("fcfs and metrics") {
  Run f = cli("fcfs " + kWall);
  REQUIRE(f.code == 0);
  CHECK(f.out.rfind("STEP 1, [S], MOVE_S", 0) == 0);
  Run m = cli("metrics " + p("fixtures/exp2/draft.plan") + " " + p("fixtures/exp2/llama.plan"));
  REQUIRE(m.code == 0);
  auto j = nlohmann::json::parse(m.out);
  CHECK(j["bleu"].get<double>() > 0.8);
  CHECK(cli("metrics " + p("fixtures/exp2/draft.plan") + " " + p("fixtures/exp2/llama.plan") + " --smoothing bogus")
            .code != 0);
}

TEST_CASE("experiment writes the three reports") {
  auto dir = std::filesystem::temp_directory_path() / "robosched_cli_test";
  std::filesystem::remove_all(dir);
  Run r = cli("experiment " + kGrid + " --draft " + p("fixtures/exp2/draft.plan") +
              " --supervisor search-minimal --out-dir '" + dir.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "scan_grid_similarity.csv"));
  CHECK(std::filesystem::exists(dir / "scan_grid_edit_profile.csv"));
  CHECK(std::filesystem::exists(dir / "scan_grid_summary.json"));
  std::filesystem::remove_all(dir);
}
