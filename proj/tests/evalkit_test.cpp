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
#include <cmath>

#include "doctest.h"
#include "pamvos/evalkit.hpp"
#include "pamvos/pipeline.hpp"
#include "pamvos/rng.hpp"

using namespace pamvos;

namespace {

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.numel(); ++i)
    if (a.values()[i] != b.values()[i]) return false;
  return true;
}

Tensor rect_mask(int h, int w, int y0, int x0, int rh, int rw) {
  Tensor m({h, w, 1});
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) m.at(y, x, 0) = 1.0f;
  return m;
}

// Exhaustive boundary F oracle: boundary extraction plus all-pairs Chebyshev
// distances, no dilation involved.
double boundary_f_oracle(const Tensor& pred, const Tensor& gt, int tol) {
  const int h = pred.extent(0), w = pred.extent(1);
  auto boundary = [&](const Tensor& m) {
    std::vector<std::pair<int, int>> pts;
    auto fg = [&](int y, int x) {
      return y >= 0 && y < h && x >= 0 && x < w && m.at(y, x, 0) == 1.0f;
    };
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m.at(y, x, 0) == 1.0f &&
            (!fg(y - 1, x) || !fg(y + 1, x) || !fg(y, x - 1) || !fg(y, x + 1)))
          pts.emplace_back(y, x);
    return pts;
  };
  const auto pb = boundary(pred), gb = boundary(gt);
  if (pb.empty() && gb.empty()) return 1.0;
  if (pb.empty() || gb.empty()) return 0.0;
  auto hits = [&](const auto& from, const auto& to) {
    long long n = 0;
    for (const auto& [y, x] : from) {
      bool ok = false;
      for (const auto& [gy, gx] : to)
        if (std::max(std::abs(y - gy), std::abs(x - gx)) <= tol) {
          ok = true;
          break;
        }
      n += ok;
    }
    return static_cast<double>(n);
  };
  const double precision = hits(pb, gb) / static_cast<double>(pb.size());
  const double recall = hits(gb, pb) / static_cast<double>(gb.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::pair<double, double> mask_centroid(const Tensor& m) {
  double sy = 0, sx = 0, n = 0;
  for (int y = 0; y < m.extent(0); ++y)
    for (int x = 0; x < m.extent(1); ++x)
      if (m.at(y, x, 0) == 1.0f) {
        sy += y;
        sx += x;
        n += 1;
      }
  return {sy / n, sx / n};
}

}  // namespace

TEST_CASE("generate_clip is deterministic per seed") {
  SpriteSpec spec;
  const SynthClip a = generate_clip(99, 4, 64, 64, spec);
  const SynthClip b = generate_clip(99, 4, 64, 64, spec);
  REQUIRE(a.frames.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(bit_equal(a.frames[i], b.frames[i]));
    CHECK(bit_equal(a.gt_masks[i], b.gt_masks[i]));
  }
  const SynthClip c = generate_clip(100, 4, 64, 64, spec);
  CHECK_FALSE(bit_equal(a.frames[0], c.frames[0]));
}

TEST_CASE("zero motion keeps every frame identical") {
  SpriteSpec spec;
  spec.velocity_x = 0;
  spec.velocity_y = 0;
  const SynthClip clip = generate_clip(7, 5, 64, 64, spec);
  for (size_t i = 1; i < 5; ++i) {
    CHECK(bit_equal(clip.frames[i], clip.frames[0]));
    CHECK(bit_equal(clip.gt_masks[i], clip.gt_masks[0]));
  }
}

TEST_CASE("translation advances the mask centroid by the velocity") {
  SpriteSpec spec;
  spec.half_size = 16;
  spec.velocity_x = 4;
  spec.velocity_y = 0;
  spec.center_x = 40;
  spec.center_y = 64;
  const SynthClip clip = generate_clip(8, 6, 128, 128, spec);
  for (size_t i = 1; i < 6; ++i) {
    const auto [py, px] = mask_centroid(clip.gt_masks[i - 1]);
    const auto [cy, cx] = mask_centroid(clip.gt_masks[i]);
    CHECK(std::abs((cx - px) - 4.0) <= 0.5);
    CHECK(std::abs(cy - py) <= 0.5);
  }
}

TEST_CASE("sprite pixels agree with the ground-truth mask and stay in bounds") {
  SpriteSpec spec;
  spec.shape = SpriteSpec::Shape::kHexagon;
  spec.rotate_deg = 9;
  spec.velocity_x = 6;
  spec.velocity_y = 3;
  const SynthClip clip = generate_clip(21, 8, 96, 96, spec);
  for (size_t t = 0; t < clip.frames.size(); ++t) {
    const Tensor& f = clip.frames[t];
    const Tensor& m = clip.gt_masks[t];
    float fg = 0.0f;
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 96; ++x) {
        const bool sprite_colored = f.at(y, x, 0) == 220.0f && f.at(y, x, 1) == 60.0f &&
                                    f.at(y, x, 2) == 50.0f;
        if (sprite_colored) CHECK(m.at(y, x, 0) == 1.0f);
        if (m.at(y, x, 0) == 1.0f) {
          fg += 1.0f;
          CHECK(y > 0);
          CHECK(y < 95);
          CHECK(x > 0);
          CHECK(x < 95);
        }
      }
    CHECK(fg > 0.0f);  // sprite never vanishes
  }
}

TEST_CASE("motion clamps at the image border instead of erroring") {
  SpriteSpec spec;
  spec.half_size = 20;
  spec.center_x = 100;
  spec.center_y = 64;
  spec.velocity_x = 30;  // would exit after one step
  const SynthClip clip = generate_clip(3, 8, 128, 128, spec);
  for (const Tensor& m : clip.gt_masks) {
    float fg = 0.0f;
    for (float v : m.values()) fg += v;
    CHECK(fg > 0.0f);
  }
}

TEST_CASE("generate_clip validates its extents") {
  CHECK_THROWS_AS(generate_clip(1, 5, 60, 64, SpriteSpec{}), DimensionError);
  CHECK_THROWS_AS(generate_clip(1, 0, 64, 64, SpriteSpec{}), std::invalid_argument);
}

TEST_CASE("jaccard hand cases") {
  const Tensor a = rect_mask(8, 8, 1, 1, 4, 4);
  CHECK(jaccard(a, a) == 1.0);

  const Tensor disjoint = rect_mask(8, 8, 5, 5, 2, 2);
  CHECK(jaccard(a, disjoint) == 0.0);

  // two 2x4 rectangles overlapping in a 2x2 block: 4 / 12 = 1/3
  const Tensor r1 = rect_mask(8, 8, 2, 0, 2, 4);
  const Tensor r2 = rect_mask(8, 8, 2, 2, 2, 4);
  CHECK(jaccard(r1, r2) == doctest::Approx(1.0 / 3.0));

  const Tensor empty({8, 8, 1});
  CHECK(jaccard(empty, empty) == 1.0);
  CHECK(jaccard(a, empty) == 0.0);

  CHECK_THROWS_AS(jaccard(a, Tensor({4, 4, 1})), DimensionError);
}

TEST_CASE("boundary_f identical, shifted, and oracle cases") {
  const Tensor sq = rect_mask(32, 32, 8, 8, 10, 10);
  CHECK(boundary_f(sq, sq, 0) == 1.0);
  CHECK(boundary_f(sq, sq, 3) == 1.0);

  const Tensor shifted1 = rect_mask(32, 32, 8, 9, 10, 10);
  CHECK(boundary_f(sq, shifted1, 1) == 1.0);

  // shift by 2 * tol so part of the boundary leaves the tolerance band
  const int tol = 2;
  const Tensor shifted = rect_mask(32, 32, 8, 8 + 2 * tol, 10, 10);
  const double expect = boundary_f_oracle(shifted, sq, tol);
  CHECK(boundary_f(shifted, sq, tol) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(boundary_f(shifted, sq, tol) < 1.0);

  // symmetry: swapping arguments swaps precision and recall, F is unchanged
  CHECK(boundary_f(sq, shifted, tol) == doctest::Approx(boundary_f(shifted, sq, tol)));

  const Tensor empty({32, 32, 1});
  CHECK(boundary_f(empty, empty, 1) == 1.0);
  CHECK(boundary_f(sq, empty, 1) == 0.0);
}

TEST_CASE("boundary_f matches the oracle on random mask pairs") {
  SeededRng rng(55);
  for (int trial = 0; trial < 4; ++trial) {
    Tensor a({24, 24, 1}), b({24, 24, 1});
    for (float& v : a.values()) v = rng.uniform() < 0.3f ? 1.0f : 0.0f;
    for (float& v : b.values()) v = rng.uniform() < 0.3f ? 1.0f : 0.0f;
    for (int tol : {0, 1, 2}) {
      const double expect = boundary_f_oracle(a, b, tol);
      CHECK(boundary_f(a, b, tol) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("default boundary tolerance follows the diagonal rule") {
  CHECK(default_boundary_tolerance(384, 384) == 5);   // ceil(0.008 * 543.06)
  CHECK(default_boundary_tolerance(256, 256) == 3);   // ceil(0.008 * 362.04)
  CHECK(default_boundary_tolerance(480, 854) == 8);   // ceil(0.008 * 979.7)
}

TEST_CASE("measure_fps divides frames by wall seconds") {
  RunReport report;
  report.frames.resize(10);
  report.total_seconds = 2.0;
  CHECK(measure_fps(report) == doctest::Approx(5.0));

  report.frames.resize(1);
  report.total_seconds = 0.25;
  CHECK(measure_fps(report) == doctest::Approx(4.0));
  CHECK(measure_fps(report) > 0.0);

  RunReport empty;
  CHECK_THROWS_AS(measure_fps(empty), std::invalid_argument);
}

TEST_CASE("evaluate_masks aggregates J and F") {
  const Tensor a = rect_mask(16, 16, 2, 2, 6, 6);
  const Tensor b = rect_mask(16, 16, 2, 3, 6, 6);
  const MetricReport r = evaluate_masks({a, a}, {a, b}, 1, 12.0);
  CHECK(r.per_frame_j.size() == 2);
  CHECK(r.per_frame_j[0] == 1.0);
  CHECK(r.per_frame_f[0] == 1.0);
  CHECK(r.per_frame_j[1] < 1.0);
  CHECK(r.jf == doctest::Approx((r.mean_j + r.mean_f) / 2.0));
  CHECK(r.fps == 12.0);
  for (double v : r.per_frame_j) CHECK((v >= 0.0 && v <= 1.0));
  for (double v : r.per_frame_f) CHECK((v >= 0.0 && v <= 1.0));
}
