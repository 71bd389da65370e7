// Copyright 2026 The regal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the installed command-line tool as a subprocess.

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "regal_cli_test_output.txt";
  const std::string cmd = std::string("'") + REGAL_CLI_PATH + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("regal_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("version and help") {
  const Run v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.output.find("0.1.0") != std::string::npos);
  CHECK(run("--help").code == 0);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("eval").code == 2);
}

TEST_CASE("synth then eval end to end") {
  const fs::path d = scratch("e2e");
  const Run s = run("synth --generate --spacing 4 --out " + q(d));
  REQUIRE(s.code == 0);
  const Run e = run("eval --config " + q(d / "eval.json") + " --jobs 2");
  CHECK(e.code == 0);
  CHECK(e.output.find("4 ok, 0 failed") != std::string::npos);
  const json report = json::parse(read(d / "report.json"));
  CHECK(report["schema"] == "regal.eval.report");
  CHECK(report["summary"]["shapes_ok"] == 4);

  // Same config, same payload.
  const std::string first = read(d / "report.json");
  REQUIRE(run("eval --config " + q(d / "eval.json") + " --jobs 2").code == 0);
  json a = json::parse(first), b = json::parse(read(d / "report.json"));
  a.erase("metadata");
  b.erase("metadata");
  CHECK(a == b);

  // A broken pair gives a partial failure.
  json config = json::parse(read(d / "eval.json"));
  config["pairs"][0]["pred"] = "missing.obj";
  std::ofstream(d / "broken.json") << config.dump(2);
  const Run p = run("eval --config " + q(d / "broken.json") + " --report " + q(d / "broken_report.json"));
  CHECK(p.code == 1);
  CHECK(json::parse(read(d / "broken_report.json"))["summary"]["shapes_failed"] == 1);

  // Configuration problems exit with 2.
  std::ofstream(d / "typo.json") << R"({"pairs": [], "nicp": {"stages": "x"}, "bogus": 1})";
  CHECK(run("eval --config " + q(d / "typo.json")).code == 2);
  CHECK(run("eval --config " + q(d / "eval.json") + " --jobs -3").code == 2);
  CHECK(run("eval --config " + q(d / "eval.json") + " --regions ear").code == 1);

  // Transfer and basis subcommands.
  const Run t = run("transfer --low " + q(d / "gt.obj") + " --low-annotations " + q(d / "gt.json") + " --high " +
                    q(d / "pred_nose.obj") + " --out " + q(d / "high.json") + " --crop --regions nose");
  CHECK(t.code == 0);
  CHECK(json::parse(read(d / "high.json"))["regions"].contains("nose"));

  const Run bb = run("basis build --out " + q(d / "b.bin") + " " + q(d / "gt.obj") + " " + q(d / "pred_nose.obj") +
                     " " + q(d / "pred_mouth.obj"));
  CHECK(bb.code == 0);
  const Run bf = run("basis fit --basis " + q(d / "b.bin") + " --target " + q(d / "pred_mouth.obj") + " --out " +
                     q(d / "fit.json"));
  CHECK(bf.code == 0);
  CHECK(json::parse(read(d / "fit.json"))["residual"]["rms_mm"].get<double>() < 1e-6);
}
