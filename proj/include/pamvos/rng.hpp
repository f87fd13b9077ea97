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

#include <cstdint>
#include <random>

namespace pamvos {

// mt19937 with hand-mapped draws. std::uniform_*_distribution output is not
// pinned by the standard, so mapping raw draws ourselves keeps identical seeds
// bit-identical across toolchains.
class SeededRng {
 public:
  explicit SeededRng(uint32_t seed) : gen_(seed) {}

  uint32_t next_u32() { return gen_(); }

  /// Uniform in [0, 1) with 24-bit resolution.
  float uniform() { return static_cast<float>(gen_() >> 8) * (1.0f / 16777216.0f); }

  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const uint32_t span = static_cast<uint32_t>(hi - lo) + 1u;
    return lo + static_cast<int>(gen_() % span);
  }

 private:
  std::mt19937 gen_;
};

}  // namespace pamvos
