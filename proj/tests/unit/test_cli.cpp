// Copyright 2026 The gcnrefine Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "gcnrefine/cli.hpp"
#include "json.hpp"
#include "support/temp_dir.hpp"

using namespace gcnrefine;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(std::ifstream(path)); }

// Writes a small phantom case and returns its manifest path.
fs::path synth_case(const TempDir& dir, const std::string& passes = "4") {
  const auto r = run_cli({"synth", "--seed", "1", "--size", "24", "--passes", passes, "--out",
                          p(dir.path() / "case")});
  REQUIRE(r.code == 0);
  return dir.path() / "case" / cli::kManifestFile;
}

}  // namespace

TEST_CASE("synth writes T + 3 volumes and a manifest") {
  TempDir dir;
  const auto manifest = synth_case(dir);
  std::size_t headers = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path() / "case")) {
    headers += e.path().extension() == ".json" && e.path().filename() != cli::kManifestFile;
  }
  CHECK(headers == 4 + 3);
  const auto m = read_manifest(manifest);
  CHECK(m.passes.size() == 4);
  CHECK(m.ground_truth.has_value());
  const auto j = read_json(manifest);
  CHECK(j.at("intensity") == "intensity.json");  // stored relative to the manifest
}

TEST_CASE("aggregate writes expectation and entropy") {
  TempDir dir;
  const auto manifest = synth_case(dir, "1");
  const auto r = run_cli({"aggregate", "--manifest", p(manifest), "--out", p(dir.path() / "agg")});
  REQUIRE(r.code == 0);
  const auto e = load_volume(dir.path() / "agg" / cli::kExpectationFile);
  const auto h = load_volume(dir.path() / "agg" / cli::kEntropyFile);
  CHECK(e.kind() == VolumeKind::kProbability);
  CHECK(h.kind() == VolumeKind::kEntropy);
  // A single hard pass has no entropy.
  CHECK(h.count_nonzero() == 0);
}

TEST_CASE("refine writes outputs and eval reproduces the reported Dice") {
  TempDir dir;
  const auto manifest = synth_case(dir);
  const auto out = dir.path() / "res";
  const auto r = run_cli({"refine", "--manifest", p(manifest), "--out", p(out), "--epochs", "40",
                          "--dump-graph", "--loss-csv", "--save-params"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"refined.json", "refined.raw", "report.json", "edges.txt", "nodes.txt",
                        "loss.csv", "params.json", "params.raw"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  const auto report = read_json(out / cli::kReportFile);
  CHECK(report.at("config").at("epochs") == 40);
  CHECK(report.at("loss_curve").size() == 41);

  const auto e = run_cli({"eval", p(out / cli::kRefinedFile), p(dir.path() / "case" / "ground_truth.json"),
                          "--expectation-dsc",
                          std::to_string(report.at("metrics").at("dice_expectation").get<double>())});
  REQUIRE(e.code == 0);
  const auto ej = nlohmann::json::parse(e.out);
  CHECK(ej.at("dice").get<double>() == report.at("metrics").at("dice_after").get<double>());
  CHECK(ej.contains("rel_imp"));
}

TEST_CASE("refine defaults to the manifest output directory") {
  TempDir dir;
  const auto manifest = synth_case(dir);
  REQUIRE(run_cli({"refine", "--manifest", p(manifest), "--epochs", "5"}).code == 0);
  CHECK(fs::exists(dir.path() / "case" / "results" / cli::kRefinedFile));
}

TEST_CASE("sweep-tau prints one CSV row per threshold") {
  TempDir dir;
  const auto manifest = synth_case(dir);
  const auto r = run_cli({"sweep-tau", "--manifest", p(manifest), "--taus", "0.2,0.9", "--epochs", "5"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream in(r.out);
  std::vector<std::string> lines;
  for (std::string s; std::getline(in, s);) lines.push_back(s);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "tau,dice_before,dice_after,uncertain_voxels,node_count");
  CHECK(lines[1].rfind("0.2,", 0) == 0);
}

TEST_CASE("errors are reported on one line with a nonzero exit") {
  TempDir dir;
  SUBCASE("tau outside (0,1)") {
    const auto manifest = synth_case(dir);
    const auto r = run_cli({"sweep-tau", "--manifest", p(manifest), "--taus", "0.5,1.5"});
    CHECK(r.code != 0);
    CHECK(r.err.find("error: ") == 0);
    CHECK(r.err.find("tau") != std::string::npos);
  }
  SUBCASE("missing prediction field") {
    const auto path = dir.path() / "m.json";
    std::ofstream(path) << R"({"passes":["a.json"],"intensity":"i.json","output_dir":"o"})";
    const auto r = run_cli({"refine", "--manifest", p(path)});
    CHECK(r.code == 1);
    CHECK(r.err.find("'prediction'") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  SUBCASE("empty pass list") {
    const auto path = dir.path() / "m.json";
    std::ofstream(path) << R"({"passes":[],"intensity":"i.json","prediction":"p.json","output_dir":"o"})";
    const auto r = run_cli({"refine", "--manifest", p(path)});
    CHECK(r.code == 1);
    CHECK(r.err.find("'passes'") != std::string::npos);
  }
  SUBCASE("missing volume file names its field") {
    const auto manifest = synth_case(dir);
    fs::remove(dir.path() / "case" / "intensity.json");
    const auto r = run_cli({"refine", "--manifest", p(manifest)});
    CHECK(r.code == 1);
    CHECK(r.err.find("'intensity'") != std::string::npos);
  }
  SUBCASE("usage errors") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"refine"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"refine", "--manifest", "x.json", "--epochs", "many"}).code == 2);
  }
  SUBCASE("eval geometry mismatch") {
    save_volume(Volume3::filled({2, 2, 2}, {}, VolumeKind::kMask, 1.0), dir.path() / "a.json");
    save_volume(Volume3::filled({2, 2, 3}, {}, VolumeKind::kMask, 1.0), dir.path() / "b.json");
    const auto r = run_cli({"eval", p(dir.path() / "a.json"), p(dir.path() / "b.json")});
    CHECK(r.code == 1);
    CHECK(r.err.find("geometry") != std::string::npos);
  }
}

TEST_CASE("installed binary runs end to end") {
  const char* bin = std::getenv("GCNREFINE_BIN");
  if (bin == nullptr) {
    MESSAGE("GCNREFINE_BIN not set; skipping");
    return;
  }
  TempDir dir;
  auto sh = [&](const std::string& args) {
    const std::string cmd = std::string("\"") + bin + "\" " + args + " >\"" +
                            p(dir.path() / "stdout.txt") + "\" 2>\"" + p(dir.path() / "stderr.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(sh("synth --seed 2 --size 24 --passes 3 --out \"" + p(dir.path() / "c") + "\"") == 0);
  CHECK(sh("refine --epochs 5 --manifest \"" + p(dir.path() / "c" / cli::kManifestFile) + "\"") == 0);
  CHECK(fs::exists(dir.path() / "c" / "results" / cli::kReportFile));

  std::ofstream(dir.path() / "bad.json") << R"({"passes":["a.json"],"intensity":"i.json","output_dir":"o"})";
  CHECK(sh("refine --manifest \"" + p(dir.path() / "bad.json") + "\"") == 1);
  std::ifstream err(dir.path() / "stderr.txt");
  std::string line;
  std::getline(err, line);
  CHECK(line.rfind("error: ", 0) == 0);
  CHECK(line.find("prediction") != std::string::npos);
  CHECK(sh("--help") == 0);
}
