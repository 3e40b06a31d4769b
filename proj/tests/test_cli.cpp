#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("simopt_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(SIMOPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json synthetic_config() {
  return json::parse(R"({
    "space": {"axes": [{"name": "a", "levels": [0, 1, 2]}, {"name": "b", "levels": [0, 1, 2]}]},
    "objective": {"type": "synthetic", "peak": {"center": [1, 1], "top": 0.9, "decay": 0.1},
                  "noise": {"kind": "gaussian", "sigma": 0.05}},
    "budget": 60,
    "trials": 2,
    "solvers": [{"solver": "sr"}, {"solver": "baseline-rs"}]
  })");
}

}  // namespace

TEST_CASE("run succeeds and writes outputs") {
  Scratch s("run");
  const auto cfg = s.write("c.json", synthetic_config().dump());
  CHECK(run("run --config " + cfg.string() + " --out " + (s.dir / "out").string() + " --seed 5") == 0);
  for (const char* f : {"runs.jsonl", "trials.csv", "summary.csv", "verdicts.csv", "verdict_table.csv"}) {
    CHECK(fs::exists(s.dir / "out" / f));
  }
}

TEST_CASE("config errors exit with 2") {
  Scratch s("cfg");
  CHECK(run("run --config " + (s.dir / "missing.json").string()) == 2);
  CHECK(run("run --config " + s.write("bad.json", "{not json").string()) == 2);
  auto doc = synthetic_config();
  doc["trials"] = 0;
  CHECK(run("run --config " + s.write("zero.json", doc.dump()).string()) == 2);
  CHECK(run("run") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("sweep-delta --config " + s.write("ok.json", synthetic_config().dump()).string()) == 2);
}

TEST_CASE("worker failures exit with 3") {
  Scratch s("worker");
  auto doc = synthetic_config();
  doc["objective"] = {{"type", "external"}, {"command", {FAKE_WORKER_PATH, "--exit-after", "3"}}};
  CHECK(run("run --config " + s.write("exit.json", doc.dump()).string() + " --out " + s.dir.string()) == 3);
  doc["objective"] = {{"type", "external"}, {"command", {"/nonexistent/worker"}}};
  CHECK(run("run --config " + s.write("missing.json", doc.dump()).string() + " --out " + s.dir.string()) == 3);
  doc["objective"] = {{"type", "external"}, {"command", {FAKE_WORKER_PATH}}};
  CHECK(run("run --config " + s.write("fine.json", doc.dump()).string() + " --out " + s.dir.string()) == 0);
}

TEST_CASE("sweep-delta and compare") {
  Scratch s("sweep");
  auto doc = synthetic_config();
  doc.erase("solvers");
  doc["solver"] = {{"solver", "kn"}};
  const auto kn = s.write("kn.json", doc.dump());
  CHECK(run("sweep-delta --config " + kn.string() + " --deltas 0.1,0.05 --out " + s.dir.string()) == 0);
  std::ifstream in(s.dir / "delta_curve.csv");
  std::string header, first, second, extra;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "delta,mean_evaluations,sd_evaluations,trials");
  CHECK(first.rfind("0.1,", 0) == 0);
  CHECK(second.rfind("0.05,", 0) == 0);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(run("sweep-delta --config " + kn.string() + " --deltas 0.1,abc") == 2);

  const auto a = s.write("a.json", synthetic_config().dump());
  CHECK(run("compare --config-a " + a.string() + " --config-b " + kn.string() + " --tests 2 --out " +
            (s.dir / "cmp").string()) == 0);
  CHECK(fs::exists(s.dir / "cmp" / "verdict_table.csv"));
}
