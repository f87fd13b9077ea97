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

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pamvos/tensor.hpp"

namespace pamvos {

struct RunReport;

/// A convex polygon sprite over a static textured background, advanced by an
/// affine motion model (translate, rotate, scale, shear) between frames.
struct SpriteSpec {
  enum class Shape { kSquare, kTriangle, kHexagon };

  Shape shape = Shape::kSquare;
  float half_size = 48.0f;
  std::array<int, 3> color = {220, 60, 50};
  float center_x = -1.0f;  // negative -> image center
  float center_y = -1.0f;
  float velocity_x = 4.0f;  // px per frame
  float velocity_y = 0.0f;
  float rotate_deg = 0.0f;    // degrees per frame
  float scale_rate = 1.0f;    // multiplicative per frame
  float shear_rate = 0.0f;    // added to the shear coefficient per frame
  int motion_start = 0;       // pose advances for frames t with start <= t <= stop
  int motion_stop = std::numeric_limits<int>::max();
  std::array<int, 3> background = {120, 120, 120};
  int noise_amplitude = 8;
};

struct SynthClip {
  std::vector<Tensor> frames;    // H x W x 3, raw 0..255
  std::vector<Tensor> gt_masks;  // H x W x 1, {0, 1}, exact sprite coverage
  uint32_t seed = 0;
  int height = 0;
  int width = 0;
  SpriteSpec spec;
};

/// Deterministic synthetic clip; the sprite is clamped to stay fully in
/// bounds, never erroring. Default length mirrors the 5-frame training clips.
SynthClip generate_clip(uint32_t seed, int frames, int height, int width,
                        const SpriteSpec& spec);

/// Intersection over union; defined as 1 when both masks are empty.
double jaccard(const Tensor& pred, const Tensor& gt);

/// Boundary F-measure. Boundaries are foreground pixels 4-adjacent to
/// background (the image border counts as background); precision/recall use a
/// Chebyshev tolerance realized by dilation. Returns 1 when both boundaries
/// are empty, 0 when only one is.
double boundary_f(const Tensor& pred, const Tensor& gt, int tolerance_px);

/// DAVIS-style default: ceil(0.008 * image diagonal).
int default_boundary_tolerance(int height, int width);

double measure_fps(const RunReport& report);

struct MetricReport {
  std::vector<double> per_frame_j;
  std::vector<double> per_frame_f;
  double mean_j = 0.0;
  double mean_f = 0.0;
  double jf = 0.0;
  double fps = 0.0;
};

MetricReport evaluate_masks(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                            int tolerance_px, double fps);

}  // namespace pamvos
