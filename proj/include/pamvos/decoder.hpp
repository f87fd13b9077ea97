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

#include "pamvos/encoder.hpp"
#include "pamvos/pam.hpp"
#include "pamvos/tensor.hpp"

namespace pamvos {

// Sharpens label-propagation logits. Handcrafted keys are unit-norm, so raw
// dot products live in [-1, 1] and need a scale for the softmax to focus on
// the nearest appearance matches.
inline constexpr float kPropagationSharpness = 50.0f;

/// Three-stage refinement decode: 3x3 conv + x2 upsample with additive 1x1
/// skip fusion at strides 8 and 4, then x4 restoration and a 1-channel head.
/// Returns full-resolution logits.
Tensor decode(const Tensor& activated, const FeaturePyramid& pyramid, const EncoderWeights& w);

/// Affinity-weighted label read at cell resolution; memory values must be the
/// single mask-coverage channel. H/16 x W/16 x 1, values in [0, 1].
Tensor propagate_cell_probs(const Tensor& key_map, const PixelMemory& memory);

/// propagate_cell_probs followed by bilinear upsampling to frame resolution.
Tensor propagate_labels(const Tensor& key_map, const PixelMemory& memory);

/// Per-pixel threshold; scores >= threshold map to foreground.
Tensor binarize(const Tensor& scores, float threshold);

}  // namespace pamvos
