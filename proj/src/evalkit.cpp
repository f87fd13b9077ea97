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

#include "pamvos/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pamvos/pipeline.hpp"
#include "pamvos/rng.hpp"

namespace pamvos {

namespace {

struct Pose {
  float cx = 0, cy = 0;
  float angle_rad = 0;
  float scale = 1;
  float shear = 0;
};

std::vector<std::pair<float, float>> base_vertices(SpriteSpec::Shape shape) {
  switch (shape) {
    case SpriteSpec::Shape::kSquare:
      return {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    case SpriteSpec::Shape::kTriangle:
      return {{0, -1}, {0.945f, 0.667f}, {-0.945f, 0.667f}};
    case SpriteSpec::Shape::kHexagon: {
      std::vector<std::pair<float, float>> v;
      for (int i = 0; i < 6; ++i) {
        const float a = static_cast<float>(i) * std::numbers::pi_v<float> / 3.0f;
        v.emplace_back(std::cos(a), std::sin(a));
      }
      return v;
    }
  }
  throw std::invalid_argument("unknown sprite shape");
}

std::vector<std::pair<float, float>> transformed_vertices(const SpriteSpec& spec,
                                                          const Pose& pose) {
  const float c = std::cos(pose.angle_rad), s = std::sin(pose.angle_rad);
  std::vector<std::pair<float, float>> out;
  for (auto [vx, vy] : base_vertices(spec.shape)) {
    float x = vx * spec.half_size * pose.scale;
    float y = vy * spec.half_size * pose.scale;
    x += pose.shear * y;  // shear along x
    const float rx = c * x - s * y;
    const float ry = s * x + c * y;
    out.emplace_back(rx + pose.cx, ry + pose.cy);
  }
  return out;
}

// Keeps the whole polygon at least one pixel inside the image, shrinking first
// if it no longer fits, then shifting the center.
void clamp_pose(const SpriteSpec& spec, int height, int width, Pose& pose) {
  const float margin = 1.0f;
  for (int pass = 0; pass < 2; ++pass) {
    auto verts = transformed_vertices(spec, pose);
    float min_x = verts[0].first, max_x = verts[0].first;
    float min_y = verts[0].second, max_y = verts[0].second;
    for (auto [x, y] : verts) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
    const float span_x = max_x - min_x, span_y = max_y - min_y;
    const float avail_x = static_cast<float>(width) - 2 * margin;
    const float avail_y = static_cast<float>(height) - 2 * margin;
    if (pass == 0) {
      if (span_x > avail_x || span_y > avail_y)
        pose.scale *= 0.95f * std::min(avail_x / span_x, avail_y / span_y);
      continue;
    }
    float dx = 0, dy = 0;
    if (min_x < margin) dx = margin - min_x;
    if (max_x > width - margin) dx = width - margin - max_x;
    if (min_y < margin) dy = margin - min_y;
    if (max_y > height - margin) dy = height - margin - max_y;
    pose.cx += dx;
    pose.cy += dy;
  }
}

/// Pixel-center-in-convex-polygon rasterization; vertices are in consistent
/// winding order so one cross-product sign test covers both orientations.
Tensor rasterize(const std::vector<std::pair<float, float>>& verts, int height, int width) {
  Tensor mask({height, width, 1});
  const int n = static_cast<int>(verts.size());
  float min_x = verts[0].first, max_x = verts[0].first;
  float min_y = verts[0].second, max_y = verts[0].second;
  for (auto [x, y] : verts) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
  const int x0 = std::max(static_cast<int>(std::floor(min_x)) - 1, 0);
  const int x1 = std::min(static_cast<int>(std::ceil(max_x)) + 1, width - 1);
  const int y0 = std::max(static_cast<int>(std::floor(min_y)) - 1, 0);
  const int y1 = std::min(static_cast<int>(std::ceil(max_y)) + 1, height - 1);

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const float px = static_cast<float>(x) + 0.5f;
      const float py = static_cast<float>(y) + 0.5f;
      bool any_pos = false, any_neg = false;
      for (int i = 0; i < n; ++i) {
        const auto [ax, ay] = verts[static_cast<size_t>(i)];
        const auto [bx, by] = verts[static_cast<size_t>((i + 1) % n)];
        const float cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        any_pos |= cross > 0;
        any_neg |= cross < 0;
      }
      if (!(any_pos && any_neg)) mask.at(y, x, 0) = 1.0f;
    }
  }
  return mask;
}

Tensor boundary_pixels(const Tensor& mask) {
  const int h = mask.extent(0), w = mask.extent(1);
  Tensor b({h, w, 1});
  auto fg = [&](int y, int x) {
    return y >= 0 && y < h && x >= 0 && x < w && mask.at(y, x, 0) == 1.0f;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask.at(y, x, 0) != 1.0f) continue;
      if (!fg(y - 1, x) || !fg(y + 1, x) || !fg(y, x - 1) || !fg(y, x + 1)) b.at(y, x, 0) = 1.0f;
    }
  return b;
}

/// Chebyshev dilation: marks every pixel within tol (max-norm) of a set pixel.
Tensor dilate_chebyshev(const Tensor& b, int tol) {
  if (tol <= 0) return b;
  const int h = b.extent(0), w = b.extent(1);
  Tensor out({h, w, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (b.at(y, x, 0) != 1.0f) continue;
      for (int dy = -tol; dy <= tol; ++dy)
        for (int dx = -tol; dx <= tol; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) out.at(yy, xx, 0) = 1.0f;
        }
    }
  return out;
}

void require_mask_pair(const Tensor& a, const Tensor& b, const char* what) {
  if (a.rank() != 3 || a.extent(2) != 1 || b.rank() != 3 || b.extent(2) != 1)
    throw DimensionError(std::string(what) + " expects H x W x 1 masks");
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + " extents differ: " + a.shape_str() + " vs " +
                         b.shape_str());
}

}  // namespace

SynthClip generate_clip(uint32_t seed, int frames, int height, int width,
                        const SpriteSpec& spec) {
  if (frames < 1) throw std::invalid_argument("clip needs at least one frame");
  if (height % 16 != 0 || width % 16 != 0)
    throw DimensionError("clip extents must be divisible by 16");

  SeededRng rng(seed);
  SynthClip clip;
  clip.seed = seed;
  clip.height = height;
  clip.width = width;
  clip.spec = spec;

  // One static textured background for the whole clip, so inter-frame
  // differences come from object motion only.
  Tensor background({height, width, 3});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        const int noise =
            spec.noise_amplitude > 0
                ? rng.uniform_int(-spec.noise_amplitude, spec.noise_amplitude)
                : 0;
        background.at(y, x, c) =
            static_cast<float>(std::clamp(spec.background[static_cast<size_t>(c)] + noise, 0, 255));
      }

  Pose pose;
  pose.cx = spec.center_x >= 0 ? spec.center_x : static_cast<float>(width) / 2.0f;
  pose.cy = spec.center_y >= 0 ? spec.center_y : static_cast<float>(height) / 2.0f;
  clamp_pose(spec, height, width, pose);

  for (int t = 0; t < frames; ++t) {
    if (t >= 1 && t >= spec.motion_start && t <= spec.motion_stop) {
      pose.cx += spec.velocity_x;
      pose.cy += spec.velocity_y;
      pose.angle_rad += spec.rotate_deg * std::numbers::pi_v<float> / 180.0f;
      pose.scale *= spec.scale_rate;
      pose.shear += spec.shear_rate;
      clamp_pose(spec, height, width, pose);
    }
    const Tensor mask = rasterize(transformed_vertices(spec, pose), height, width);
    Tensor frame = background;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (mask.at(y, x, 0) == 1.0f)
          for (int c = 0; c < 3; ++c)
            frame.at(y, x, c) = static_cast<float>(spec.color[static_cast<size_t>(c)]);
    clip.frames.push_back(std::move(frame));
    clip.gt_masks.push_back(mask);
  }
  return clip;
}

double jaccard(const Tensor& pred, const Tensor& gt) {
  require_mask_pair(pred, gt, "jaccard");
  long long inter = 0, uni = 0;
  for (size_t i = 0; i < pred.numel(); ++i) {
    const bool p = pred.values()[i] == 1.0f;
    const bool g = gt.values()[i] == 1.0f;
    inter += p && g;
    uni += p || g;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double boundary_f(const Tensor& pred, const Tensor& gt, int tolerance_px) {
  require_mask_pair(pred, gt, "boundary_f");
  if (tolerance_px < 0) throw std::invalid_argument("boundary tolerance must be >= 0");

  const Tensor pb = boundary_pixels(pred);
  const Tensor gb = boundary_pixels(gt);
  long long n_pred = 0, n_gt = 0;
  for (float v : pb.values()) n_pred += v == 1.0f;
  for (float v : gb.values()) n_gt += v == 1.0f;
  if (n_pred == 0 && n_gt == 0) return 1.0;
  if (n_pred == 0 || n_gt == 0) return 0.0;

  const Tensor gb_wide = dilate_chebyshev(gb, tolerance_px);
  const Tensor pb_wide = dilate_chebyshev(pb, tolerance_px);
  long long pred_hit = 0, gt_hit = 0;
  for (size_t i = 0; i < pb.numel(); ++i) {
    pred_hit += pb.values()[i] == 1.0f && gb_wide.values()[i] == 1.0f;
    gt_hit += gb.values()[i] == 1.0f && pb_wide.values()[i] == 1.0f;
  }
  const double precision = static_cast<double>(pred_hit) / static_cast<double>(n_pred);
  const double recall = static_cast<double>(gt_hit) / static_cast<double>(n_gt);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

int default_boundary_tolerance(int height, int width) {
  const double diag = std::sqrt(static_cast<double>(height) * height +
                                static_cast<double>(width) * width);
  return static_cast<int>(std::ceil(0.008 * diag));
}

double measure_fps(const RunReport& report) {
  if (report.frames.empty()) throw std::invalid_argument("measure_fps needs >= 1 frame");
  return static_cast<double>(report.frames.size()) / report.total_seconds;
}

MetricReport evaluate_masks(const std::vector<Tensor>& preds, const std::vector<Tensor>& gts,
                            int tolerance_px, double fps) {
  if (preds.size() != gts.size())
    throw DimensionError("prediction/ground-truth counts differ");
  MetricReport r;
  r.fps = fps;
  for (size_t i = 0; i < preds.size(); ++i) {
    r.per_frame_j.push_back(jaccard(preds[i], gts[i]));
    r.per_frame_f.push_back(boundary_f(preds[i], gts[i], tolerance_px));
  }
  for (double j : r.per_frame_j) r.mean_j += j;
  for (double f : r.per_frame_f) r.mean_f += f;
  r.mean_j /= static_cast<double>(preds.size());
  r.mean_f /= static_cast<double>(preds.size());
  r.jf = (r.mean_j + r.mean_f) / 2.0;
  return r;
}

}  // namespace pamvos
