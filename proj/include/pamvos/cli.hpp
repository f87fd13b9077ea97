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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pamvos/evalkit.hpp"
#include "pamvos/pipeline.hpp"

namespace pamvos {

// Clip directory layout: frame_%04d.ppm, mask_%04d.pgm, clip.json manifest.
void save_clip(const SynthClip& clip, const std::string& dir);

struct LoadedClip {
  std::vector<Tensor> frames;
  std::vector<Tensor> masks;  // may hold only mask_0000
  int height = 0;
  int width = 0;
  bool has_all_masks() const { return masks.size() == frames.size(); }
};

LoadedClip load_clip(const std::string& dir);

struct SynthArgs {
  std::string out_dir;
  uint32_t seed = 1;
  int frames = 5;
  int height = 384;
  int width = 384;
  SpriteSpec sprite;
};

struct RunArgs {
  std::string clip_dir;
  std::string out_dir;
  SequenceConfig config;
  std::string weights_in;    // optional snapshot to load
  std::string weights_out;   // optional snapshot to write
  std::string memory_out;    // optional memory dump after the run
};

struct BenchArgs {
  std::string clip_dir;
  std::string out_dir;
  std::vector<std::size_t> sizes;
  int repetitions = 21;
  SequenceConfig config;
};

struct AblateArgs {
  std::string clip_dir;
  std::string out_dir;
  std::vector<AblationConfig> grid;  // empty -> default 2x2 grid
  SequenceConfig config;
};

int cmd_synth(const SynthArgs& args);
int cmd_run(const RunArgs& args);
int cmd_bench(const BenchArgs& args);
int cmd_ablate(const AblateArgs& args);

/// CLI11 front end for the four subcommands.
int run_cli(int argc, const char* const* argv);

}  // namespace pamvos
