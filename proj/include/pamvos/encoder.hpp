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
#include <string>

#include "pamvos/tensor.hpp"

namespace pamvos {

enum class EncoderMode { kSeededConv, kHandcrafted };

// Channel plan. The query encoder emits a C-channel map at stride 16; the key
// head narrows it to C/8 for cheap matching and the value head to C/2.
inline constexpr int kFeatureChannels = 256;
inline constexpr int kKeyChannels = kFeatureChannels / 8;
inline constexpr int kValueChannels = kFeatureChannels / 2;
inline constexpr int kHandcraftedKeyChannels = 8;
inline constexpr int kHandcraftedValueChannels = 1;
inline constexpr int kStemChannels = 32;
inline constexpr int kStage4Channels = 64;
inline constexpr int kStage8Channels = 128;
inline constexpr int kStage16Channels = kFeatureChannels;

/// Stride-4/8/16 feature maps buffered from the query encoder so reference
/// encoding never re-runs the backbone.
struct FeaturePyramid {
  Tensor s4;
  Tensor s8;
  Tensor s16;
  int frame_index = -1;
};

// All convolution tensors used by encoding and decoding. Layers are bias-free;
// identical seeds produce bit-identical tensors. Handcrafted mode carries only
// the decoder tensors (sized for its narrow key/value widths).
struct EncoderWeights {
  EncoderMode mode = EncoderMode::kSeededConv;
  uint32_t seed = 0;

  // Query backbone: stem plus one stride-2 stage per pyramid level.
  Tensor stem;    // 3x3x3x32, stride 2
  Tensor stage1;  // 3x3x32x64, stride 2 -> s4
  Tensor stage2;  // 3x3x64x128, stride 2 -> s8
  Tensor stage3;  // 3x3x128x256, stride 2 -> s16

  // Light-aggregation fusers for the mask path.
  Tensor lae_mask_in;  // 1x1x16x64
  Tensor lae_fuse4;    // 1x1x128x64
  Tensor lae_fuse8;    // 1x1x384x128
  Tensor lae_fuse16;   // 1x1x768x256

  // Shared heads applied to the stride-16 feature (query) or fused feature
  // (reference), so both key spaces are directly comparable.
  Tensor key_head;    // 1x1x256x32
  Tensor value_head;  // 1x1x256x128

  // Three-stage refinement decoder.
  Tensor dec_stage16;  // 3x3x(2*Cv)x256
  Tensor dec_skip8;    // 1x1xc8x256
  Tensor dec_stage8;   // 3x3x256x128
  Tensor dec_skip4;    // 1x1xc4x128
  Tensor dec_stage4;   // 3x3x128x64
  Tensor dec_head;     // 1x1x64x1

  int key_channels() const {
    return mode == EncoderMode::kSeededConv ? kKeyChannels : kHandcraftedKeyChannels;
  }
  int value_channels() const {
    return mode == EncoderMode::kSeededConv ? kValueChannels : kHandcraftedValueChannels;
  }

  static EncoderWeights make(EncoderMode mode, uint32_t seed);
};

struct QueryEncoding {
  FeaturePyramid pyramid;
  Tensor key;    // H/16 x W/16 x Ck
  Tensor value;  // H/16 x W/16 x Cv
};

struct ReferenceEncoding {
  Tensor key;
  Tensor value;
};

QueryEncoding encode_query(const Tensor& frame, const EncoderWeights& w);

/// Reference encoding from the buffered pyramid and a binary mask; the image
/// backbone is never re-executed here.
ReferenceEncoding encode_reference(const FeaturePyramid& pyramid, const Tensor& mask,
                                   const EncoderWeights& w);

/// Training-free per-cell descriptors at stride 16: mean RGB, RGB standard
/// deviations, mean |gradient| along x and y, L2-normalized per cell.
Tensor handcrafted_features(const Tensor& frame);

// Weight snapshot: 4-byte LE JSON length, JSON shape manifest, then the
// concatenated float32 payload in manifest order.
void save_weights(const EncoderWeights& w, const std::string& path);
EncoderWeights load_weights(const std::string& path);

// Backbone call accounting (thread-local), used to verify that reference
// encoding reuses buffered features.
uint64_t backbone_conv_calls();
void reset_backbone_conv_calls();

}  // namespace pamvos
