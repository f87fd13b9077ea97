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
#include <span>
#include <string>
#include <vector>

#include "pamvos/tensor.hpp"

namespace pamvos {

// Published trigger constants.
inline constexpr int kDefaultVariationThreshold = 200;  // P_th
inline constexpr float kDefaultFrameThreshold = 1.0f;   // th_f
inline constexpr float kDefaultMaskThreshold = 0.0f;    // th_m
inline constexpr float kDefaultUpdateRatio = 0.10f;     // beta

/// Running variation degree P with its thresholds. P accumulates across frames
/// since the last trigger and resets to zero when one fires.
struct TriggerState {
  long long variation = 0;  // P
  float th_f = kDefaultFrameThreshold;
  float th_m = kDefaultMaskThreshold;
  long long p_th = kDefaultVariationThreshold;
};

struct TriggerDecision {
  TriggerState state;
  bool triggered = false;
};

/// Per-pixel sum over RGB of |delta| / 255, on raw 0..255 frames. Values in [0, 3].
Tensor frame_difference(const Tensor& frame, const Tensor& previous);

/// Per-pixel |delta| of binary masks. Values in {0, 1}.
Tensor mask_difference(const Tensor& mask, const Tensor& previous);

/// Counts pixels whose image or mask difference exceeds its threshold, adds
/// them to P, and fires once P exceeds P_th.
TriggerDecision trigger_step(const TriggerState& state, const Tensor& frame_diff,
                             const Tensor& mask_diff);

struct Provenance {
  int32_t frame = 0;
  int32_t row = 0;
  int32_t col = 0;
  bool operator==(const Provenance&) const = default;
};

/// Growable array of (key, value, provenance) pixel entries; the object model
/// memory. Entries are only appended, never evicted. An optional capacity
/// rejects appends that would exceed it (off by default).
class PixelMemory {
 public:
  PixelMemory(int key_channels, int value_channels, std::size_t capacity = 0);

  std::size_t size() const { return provenance_.size(); }
  int key_channels() const { return key_channels_; }
  int value_channels() const { return value_channels_; }
  std::size_t capacity() const { return capacity_; }

  std::span<const float> key(std::size_t i) const {
    return {keys_.data() + i * static_cast<size_t>(key_channels_),
            static_cast<size_t>(key_channels_)};
  }
  std::span<const float> value(std::size_t i) const {
    return {values_.data() + i * static_cast<size_t>(value_channels_),
            static_cast<size_t>(value_channels_)};
  }
  const Provenance& provenance(std::size_t i) const { return provenance_[i]; }

  const std::vector<float>& keys() const { return keys_; }
  const std::vector<float>& values() const { return values_; }

  void append(std::span<const float> key, std::span<const float> value, Provenance origin);

 private:
  int key_channels_;
  int value_channels_;
  std::size_t capacity_;
  std::vector<float> keys_;
  std::vector<float> values_;
  std::vector<Provenance> provenance_;
};

/// Memory holding every pixel of the first reference encoding, provenance
/// frame index 0.
PixelMemory memory_init(const Tensor& key_map, const Tensor& value_map,
                        std::size_t capacity = 0);

/// Cosine similarities between every flattened key-map pixel and every memory
/// entry; HW x k, entries in [-1, 1]. Zero vectors score 0 against everything.
Tensor cosine_similarity_matrix(const Tensor& key_map, const PixelMemory& memory);

/// Indices of the floor(beta * HW) pixels least similar to anything in memory:
/// per-row maximum cosine, sorted ascending, ties broken by raster index.
std::vector<int> select_update_pixels(const Tensor& key_map, const PixelMemory& memory,
                                      float beta);

/// Appends the chosen pixels' key/value vectors with (frame, cell) provenance.
/// Indices must be in range and duplicate-free.
void memory_append(PixelMemory& memory, std::span<const int> indices, const Tensor& key_map,
                   const Tensor& value_map, int frame_index);

/// Row-stochastic affinity: softmax over dot-product logits, HW x k.
Tensor memory_affinity(const Tensor& key_map, const PixelMemory& memory);

/// Non-local read over the pixel memory: affinity-weighted value sum,
/// channel-concatenated with the query value map. H/16 x W/16 x 2*Cv.
Tensor memory_match(const Tensor& key_map, const Tensor& value_map, const PixelMemory& memory);

// Memory snapshot: 4-byte LE JSON length, JSON header (k, c_k, c_v), key and
// value float32 payloads, then provenance triples as LE int32.
void save_memory(const PixelMemory& memory, const std::string& path);
PixelMemory load_memory(const std::string& path);

}  // namespace pamvos
