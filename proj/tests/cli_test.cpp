// Copyright (c) 2026 The pamvos Authors. All Rights Reserved.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pamvos/cli.hpp"
#include "pamvos/imageio.hpp"
#include "pamvos/rng.hpp"

using namespace pamvos;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pamvos_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

int cli(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.push_back("pamvos");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) { return read_file(path); }

// report comparison ignoring wall-clock fields
nlohmann::json stripped_report(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(slurp(path));
  j["aggregate"].erase("fps");
  j["aggregate"].erase("total_seconds");
  for (auto& f : j["frames"]) f.erase("timings_ms");
  return j;
}

}  // namespace

TEST_CASE("ppm and pgm files round trip exactly") {
  TempDir dir("roundtrip");
  SeededRng rng(61);
  Tensor frame({32, 48, 3});
  for (float& v : frame.values()) v = static_cast<float>(rng.uniform_int(0, 255));
  const std::string fpath = dir.sub("f.ppm");
  write_ppm(frame, fpath);
  const Tensor back = read_ppm(fpath);
  REQUIRE(back.same_shape(frame));
  for (size_t i = 0; i < frame.numel(); ++i) CHECK(back.values()[i] == frame.values()[i]);

  Tensor mask({32, 48, 1});
  for (float& v : mask.values()) v = rng.uniform() < 0.5f ? 1.0f : 0.0f;
  const std::string mpath = dir.sub("m.pgm");
  write_pgm_mask(mask, mpath);
  const Tensor mback = read_pgm_mask(mpath);
  for (size_t i = 0; i < mask.numel(); ++i) CHECK(mback.values()[i] == mask.values()[i]);

  CHECK_THROWS_AS(read_ppm(dir.sub("missing.ppm")), IoError);
}

TEST_CASE("synth writes frames, masks, and a manifest deterministically") {
  TempDir a("syntha"), b("synthb");
  CHECK(cli({"synth", "--out", a.str(), "--seed", "5", "--frames", "5", "--height", "64",
             "--width", "64"}) == 0);
  for (int i = 0; i < 5; ++i) {
    CHECK(fs::exists(a.sub("frame_000" + std::to_string(i) + ".ppm")));
    CHECK(fs::exists(a.sub("mask_000" + std::to_string(i) + ".pgm")));
  }
  CHECK(fs::exists(a.sub("clip.json")));
  CHECK_FALSE(fs::exists(a.sub("frame_0005.ppm")));

  CHECK(cli({"synth", "--out", b.str(), "--seed", "5", "--frames", "5", "--height", "64",
             "--width", "64"}) == 0);
  CHECK(slurp(a.sub("frame_0003.ppm")) == slurp(b.sub("frame_0003.ppm")));
  CHECK(slurp(a.sub("mask_0004.pgm")) == slurp(b.sub("mask_0004.pgm")));
  CHECK(slurp(a.sub("clip.json")) == slurp(b.sub("clip.json")));

  const nlohmann::json manifest = nlohmann::json::parse(slurp(a.sub("clip.json")));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["frames"] == 5);
  CHECK(manifest["height"] == 64);
  CHECK(manifest["width"] == 64);
  CHECK(manifest["sprite"]["shape"] == "square");
}

TEST_CASE("synth rejects bad extents without partial output") {
  TempDir dir("synthbad");
  const std::string out = dir.sub("clip");
  CHECK(cli({"synth", "--out", out, "--height", "60", "--width", "64"}) != 0);
  CHECK_FALSE(fs::exists(fs::path(out) / "frame_0000.ppm"));
  CHECK_FALSE(fs::exists(fs::path(out) / "clip.json"));
}

TEST_CASE("unknown flags are rejected") {
  TempDir dir("badflag");
  CHECK(cli({"synth", "--out", dir.str(), "--no-such-flag", "1"}) != 0);
  CHECK(cli({"frobnicate"}) != 0);
}

TEST_CASE("run produces predictions, a report, and optional snapshots") {
  TempDir dir("run");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--seed", "9", "--frames", "4", "--height", "64",
               "--width", "64", "--size", "16", "--velocity", "0", "0"}) == 0);

  const std::string out = dir.sub("out");
  const std::string wpath = dir.sub("weights.bin");
  const std::string mempath = dir.sub("memory.bin");
  REQUIRE(cli({"run", "--clip", clip, "--out", out, "--mode", "handcrafted", "--decode",
               "propagate", "--save-weights", wpath, "--dump-memory", mempath}) == 0);

  for (int i = 0; i < 4; ++i) CHECK(fs::exists(out + "/pred_000" + std::to_string(i) + ".pgm"));
  CHECK(slurp(out + "/pred_0000.pgm") == slurp(clip + "/mask_0000.pgm"));

  const nlohmann::json report = nlohmann::json::parse(slurp(out + "/report.json"));
  CHECK(report["frames"].size() == 4);
  CHECK(report["aggregate"].contains("jf"));  // gt masks available
  CHECK(report["config"]["decode"] == "propagate");

  std::istringstream csv(slurp(out + "/report.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "frames,fps,total_seconds,trigger_count,final_memory_size,mean_J,mean_F,JF");
  REQUIRE(std::getline(csv, line));
  CHECK(line.rfind("4,", 0) == 0);

  const EncoderWeights w = load_weights(wpath);
  CHECK(w.mode == EncoderMode::kHandcrafted);
  const PixelMemory mem = load_memory(mempath);
  CHECK(mem.size() == report["aggregate"]["final_memory_size"].get<size_t>());
}

TEST_CASE("run twice is identical modulo timing fields") {
  TempDir dir("det");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--seed", "11", "--frames", "4", "--height", "64",
               "--width", "64", "--velocity", "4", "2"}) == 0);

  const std::string o1 = dir.sub("o1"), o2 = dir.sub("o2");
  const std::vector<std::string> flags = {"--mode", "handcrafted", "--decode", "propagate",
                                          "--beta", "0.2"};
  std::vector<std::string> a1 = {"run", "--clip", clip, "--out", o1};
  std::vector<std::string> a2 = {"run", "--clip", clip, "--out", o2};
  a1.insert(a1.end(), flags.begin(), flags.end());
  a2.insert(a2.end(), flags.begin(), flags.end());
  REQUIRE(cli(a1) == 0);
  REQUIRE(cli(a2) == 0);

  for (int i = 0; i < 4; ++i) {
    const std::string name = "/pred_000" + std::to_string(i) + ".pgm";
    CHECK(slurp(o1 + name) == slurp(o2 + name));
  }
  CHECK(stripped_report(o1 + "/report.json") == stripped_report(o2 + "/report.json"));
}

TEST_CASE("run fails cleanly without the first annotation") {
  TempDir dir("nomask");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--frames", "2", "--height", "64", "--width", "64"}) ==
          0);
  for (int i = 0; i < 2; ++i)
    fs::remove(clip + "/mask_000" + std::to_string(i) + ".pgm");
  CHECK(cli({"run", "--clip", clip, "--out", dir.sub("out")}) != 0);
  CHECK_FALSE(fs::exists(dir.sub("out") + "/report.json"));
}

TEST_CASE("bench emits one row per size with the documented header") {
  TempDir dir("bench");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--frames", "1", "--height", "64", "--width", "64"}) ==
          0);
  const std::string out = dir.sub("out");
  REQUIRE(cli({"bench", "--clip", clip, "--out", out, "--sizes", "200,400", "--reps", "5"}) ==
          0);

  std::istringstream csv(slurp(out + "/bench.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "memory_size,match_ms,encode_ms,decode_ms,fps");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.find(',') != std::string::npos);
  }
  CHECK(rows == 2);

  CHECK(cli({"bench", "--clip", clip, "--out", out, "--sizes"}) != 0);  // empty sizes
}

TEST_CASE("ablate writes the default 2x2 grid and dedupes explicit ones") {
  TempDir dir("ablate");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--seed", "3", "--frames", "4", "--height", "64",
               "--width", "64", "--velocity", "8", "0"}) == 0);

  const std::string out = dir.sub("out");
  REQUIRE(cli({"ablate", "--clip", clip, "--out", out}) == 0);
  std::istringstream csv(slurp(out + "/ablate.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "config,mean_J,mean_F,JF,fps,final_memory,triggers");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);  // {variation-aware, periodic(5)} x {full, beta=0.10}

  // beta sweep with a duplicated entry collapses to unique configs
  const std::string out2 = dir.sub("out2");
  REQUIRE(cli({"ablate", "--clip", clip, "--out", out2, "--triggers", "every", "--betas",
               "0.025,0.05,0.1,0.2,0.05"}) == 0);
  std::istringstream csv2(slurp(out2 + "/ablate.csv"));
  std::getline(csv2, line);
  rows = 0;
  while (std::getline(csv2, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("ablate requires ground truth for every frame") {
  TempDir dir("ablate_nogt");
  const std::string clip = dir.sub("clip");
  REQUIRE(cli({"synth", "--out", clip, "--frames", "3", "--height", "64", "--width", "64"}) ==
          0);
  fs::remove(clip + "/mask_0002.pgm");
  CHECK(cli({"ablate", "--clip", clip, "--out", dir.sub("out")}) != 0);
}
