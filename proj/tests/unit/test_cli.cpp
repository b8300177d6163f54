#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "msviper/core/tree.hpp"
#include "msviper/core/tree_io.hpp"

namespace fs = std::filesystem;
using namespace msviper;

namespace {

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("msviper_cli_" + std::to_string(::getpid()));
  ScratchDir() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch() {
  static const ScratchDir dir;
  return dir.path;
}

int run(const std::string& args) {
  const std::string cmd = std::string(MSVIPER_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string p(const fs::path& path) { return "'" + path.string() + "'"; }

const char* kScenario = R"({"env": "grid", "stage": 0, "width": 5, "height": 5, "obstacle_count": 2, "horizon": 30, "seed": 3})";

fs::path trained_expert() {
  static const fs::path dir = [] {
    const auto cfg = scratch() / "expert.json";
    write(cfg, std::string(R"({"curriculum": [)") + kScenario +
                   R"(], "q_learning": {"seed": 2, "episodes_per_stage": 400}})");
    const auto out = scratch() / "expert";
    REQUIRE(run("train-expert --config " + p(cfg) + " --out " + p(out)) == 0);
    return out;
  }();
  return dir / "expert.json";
}

}  // namespace

TEST_CASE("cli rejects bad input without writing output") {
  const auto bad = scratch() / "bad.json";
  write(bad, "{ not json");
  const auto out = scratch() / "never";
  CHECK(run("train-expert --config " + p(bad) + " --out " + p(out)) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(run("coverage --config " + p(scratch() / "missing.json") + " --out " + p(out)) == 2);
  CHECK_FALSE(fs::exists(out));

  const auto tree = scratch() / "stop_free.json";
  save_tree(DecisionTreePolicy::single_leaf(StateLayout::desk(), default_actions(), 2), tree);
  CHECK(run("repair --tree " + p(tree) + " --defect wobble --out " + p(out)) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(run("bogus-command") == 2);

  // Existing output directories are never overwritten.
  const auto taken = scratch() / "taken";
  fs::create_directories(taken);
  CHECK(run("repair --tree " + p(tree) + " --defect freezing --out " + p(taken)) == 2);
  CHECK(fs::is_empty(taken));
}

TEST_CASE("freezing repair of a stop-free tree changes nothing") {
  const auto tree = scratch() / "forward.json";
  save_tree(DecisionTreePolicy::single_leaf(StateLayout::desk(), default_actions(), 2), tree);
  const auto out = scratch() / "freeze_repair";
  REQUIRE(run("repair --tree " + p(tree) + " --defect freezing --out " + p(out)) == 0);
  const auto log = read_json_file(out / "repair_log.json");
  CHECK(log.at("N_plus") == 0);
  CHECK(log.at("detected").empty());
  CHECK(slurp(out / "tree.json") == slurp(tree));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("vibration1 with h = 0 leaves the tree byte-identical") {
  const auto l = StateLayout::terrain_desk();
  const auto& g = l.group(kAngularVelocityGroup);
  const DecisionTreePolicy t(l, default_actions(),
                             {TreeNode::branch(0, static_cast<int>(g[0]), 0.25, 1, 2), TreeNode::leaf(1, 2),
                              TreeNode::leaf(2, 13)},
                             0);
  const auto tree = scratch() / "terrain_tree.json";
  save_tree(t, tree);
  const auto out = scratch() / "vib_zero";
  REQUIRE(run("repair --tree " + p(tree) + " --defect vibration1 --h 0 --out " + p(out)) == 0);
  CHECK(slurp(out / "tree.json") == slurp(tree));
  CHECK(read_json_file(out / "repair_log.json").at("N_plus") == 1);
}

TEST_CASE("report refuses a zero baseline with the domain exit code") {
  const auto tree = scratch() / "stop.json";
  save_tree(DecisionTreePolicy::single_leaf(StateLayout::desk(), default_actions(), 3), tree);
  const auto rep = scratch() / "stop_repair";
  REQUIRE(run("repair --tree " + p(tree) + " --defect freezing --out " + p(rep)) == 0);
  const auto before = scratch() / "before.json";
  const auto after = scratch() / "after.json";
  write(before, R"({"policies": {"tree": [{"stage": 0, "report": {"freezing_rate": 0.0}}]}})");
  write(after, R"({"policies": {"tree": [{"stage": 0, "report": {"freezing_rate": 0.0}}]}})");
  const auto out = scratch() / "zero_report";
  CHECK(run("report --before " + p(before) + " --after " + p(after) + " --log " + p(rep / "repair_log.json") +
            " --out " + p(out)) == 3);
  CHECK_FALSE(fs::exists(out));
  write(before, R"({"policies": {"tree": [{"stage": 0, "report": {"freezing_rate": 0.5}}]}})");
  REQUIRE(run("report --before " + p(before) + " --after " + p(after) + " --log " + p(rep / "repair_log.json") +
              " --out " + p(out)) == 0);
  const auto doc = read_json_file(out / "report.json");
  CHECK(doc.at("efficiency").at("e_O").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli msviper over one scenario equals ssviper") {
  const auto expert = trained_expert();
  const auto cfg = scratch() / "distill.json";
  write(cfg, std::string(R"({"curriculum": [)") + kScenario +
                 R"(], "distill": {"M": 5, "N": 2, "n_s": 300, "n_cv": 5, "seed": 3}})");
  const auto a = scratch() / "dist_ms";
  const auto b = scratch() / "dist_ss";
  REQUIRE(run("distill --config " + p(cfg) + " --expert " + p(expert) + " --out " + p(a)) == 0);
  REQUIRE(run("distill --config " + p(cfg) + " --expert " + p(expert) + " --mode ssviper --jobs 3 --out " + p(b)) == 0);
  CHECK(slurp(a / "tree.json") == slurp(b / "tree.json"));
  CHECK(slurp(a / "iterations.csv") == slurp(b / "iterations.csv"));
  CHECK(run("distill --config " + p(cfg) + " --expert " + p(expert) + " --mode dagger --out " +
            p(scratch() / "dist_bad")) == 2);
}
