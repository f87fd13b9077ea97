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

#include "pamvos/encoder.hpp"

#include <cmath>
#include <utility>

#include "json.hpp"
#include "pamvos/imageio.hpp"
#include "pamvos/rng.hpp"

namespace pamvos {

namespace {

thread_local uint64_t g_backbone_conv_calls = 0;

void require_frame(const Tensor& frame) {
  if (frame.rank() != 3 || frame.extent(2) != 3)
    throw DimensionError("frame must be H x W x 3, got " + frame.shape_str());
  if (frame.extent(0) % 16 != 0 || frame.extent(1) % 16 != 0)
    throw DimensionError("frame extents must be divisible by 16, got " + frame.shape_str());
}

Tensor seeded_conv_weight(SeededRng& rng, int k, int cin, int cout) {
  Tensor w({k, k, cin, cout});
  const float limit = std::sqrt(6.0f / static_cast<float>(k * k * cin));
  for (float& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

Tensor normalized_rgb(const Tensor& frame) {
  Tensor out = frame;
  for (float& v : out.values()) v *= 1.0f / 255.0f;
  return out;
}

/// Per-cell channel means over r x r blocks.
Tensor block_mean(const Tensor& f, int r) {
  const int h = f.extent(0), w = f.extent(1), c = f.extent(2);
  Tensor out({h / r, w / r, c});
  const float inv = 1.0f / static_cast<float>(r * r);
  for (int cy = 0; cy < h / r; ++cy)
    for (int cx = 0; cx < w / r; ++cx)
      for (int ch = 0; ch < c; ++ch) {
        float sum = 0.0f;
        for (int y = cy * r; y < (cy + 1) * r; ++y)
          for (int x = cx * r; x < (cx + 1) * r; ++x) sum += f.at(y, x, ch);
        out.at(cy, cx, ch) = sum * inv;
      }
  return out;
}

Tensor gray_cell_mean(const Tensor& frame, int r) {
  const Tensor norm = normalized_rgb(frame);
  const int h = frame.extent(0), w = frame.extent(1);
  Tensor out({h / r, w / r, 1});
  const float inv = 1.0f / static_cast<float>(r * r * 3);
  for (int cy = 0; cy < h / r; ++cy)
    for (int cx = 0; cx < w / r; ++cx) {
      float sum = 0.0f;
      for (int y = cy * r; y < (cy + 1) * r; ++y)
        for (int x = cx * r; x < (cx + 1) * r; ++x)
          sum += norm.at(y, x, 0) + norm.at(y, x, 1) + norm.at(y, x, 2);
      out.at(cy, cx, 0) = sum * inv;
    }
  return out;
}

Tensor backbone_conv(const Tensor& in, const Tensor& w, int stride, int pad) {
  ++g_backbone_conv_calls;
  return relu(conv2d(in, w, stride, pad));
}

QueryEncoding encode_query_seeded(const Tensor& frame, const EncoderWeights& w) {
  const Tensor x = normalized_rgb(frame);
  const Tensor s2 = backbone_conv(x, w.stem, 2, 1);
  FeaturePyramid pyr;
  pyr.s4 = backbone_conv(s2, w.stage1, 2, 1);
  pyr.s8 = backbone_conv(pyr.s4, w.stage2, 2, 1);
  pyr.s16 = backbone_conv(pyr.s8, w.stage3, 2, 1);
  Tensor key = conv2d(pyr.s16, w.key_head, 1, 0);
  Tensor value = conv2d(pyr.s16, w.value_head, 1, 0);
  return {std::move(pyr), std::move(key), std::move(value)};
}

QueryEncoding encode_query_handcrafted(const Tensor& frame) {
  const Tensor norm = normalized_rgb(frame);
  FeaturePyramid pyr;
  pyr.s4 = block_mean(norm, 4);
  pyr.s8 = block_mean(norm, 8);
  pyr.s16 = handcrafted_features(frame);
  Tensor key = pyr.s16;
  Tensor value = gray_cell_mean(frame, 16);
  return {std::move(pyr), std::move(key), std::move(value)};
}

}  // namespace

uint64_t backbone_conv_calls() { return g_backbone_conv_calls; }
void reset_backbone_conv_calls() { g_backbone_conv_calls = 0; }

EncoderWeights EncoderWeights::make(EncoderMode mode, uint32_t seed) {
  EncoderWeights w;
  w.mode = mode;
  w.seed = seed;
  SeededRng rng(seed);
  if (mode == EncoderMode::kSeededConv) {
    w.stem = seeded_conv_weight(rng, 3, 3, kStemChannels);
    w.stage1 = seeded_conv_weight(rng, 3, kStemChannels, kStage4Channels);
    w.stage2 = seeded_conv_weight(rng, 3, kStage4Channels, kStage8Channels);
    w.stage3 = seeded_conv_weight(rng, 3, kStage8Channels, kStage16Channels);
    w.lae_mask_in = seeded_conv_weight(rng, 1, 16, kStage4Channels);
    w.lae_fuse4 = seeded_conv_weight(rng, 1, 2 * kStage4Channels, kStage4Channels);
    w.lae_fuse8 = seeded_conv_weight(rng, 1, 4 * kStage4Channels + kStage8Channels,
                                     kStage8Channels);
    w.lae_fuse16 = seeded_conv_weight(rng, 1, 4 * kStage8Channels + kStage16Channels,
                                      kStage16Channels);
    w.key_head = seeded_conv_weight(rng, 1, kStage16Channels, kKeyChannels);
    w.value_head = seeded_conv_weight(rng, 1, kStage16Channels, kValueChannels);
  }
  // Decoder widths restore 256 -> 128 -> 64; skip projections match the
  // pyramid channels of the active mode.
  const int cv = w.value_channels();
  const int c8 = mode == EncoderMode::kSeededConv ? kStage8Channels : 3;
  const int c4 = mode == EncoderMode::kSeededConv ? kStage4Channels : 3;
  w.dec_stage16 = seeded_conv_weight(rng, 3, 2 * cv, 256);
  w.dec_skip8 = seeded_conv_weight(rng, 1, c8, 256);
  w.dec_stage8 = seeded_conv_weight(rng, 3, 256, 128);
  w.dec_skip4 = seeded_conv_weight(rng, 1, c4, 128);
  w.dec_stage4 = seeded_conv_weight(rng, 3, 128, 64);
  w.dec_head = seeded_conv_weight(rng, 1, 64, 1);
  return w;
}

QueryEncoding encode_query(const Tensor& frame, const EncoderWeights& w) {
  require_frame(frame);
  return w.mode == EncoderMode::kSeededConv ? encode_query_seeded(frame, w)
                                            : encode_query_handcrafted(frame);
}

ReferenceEncoding encode_reference(const FeaturePyramid& pyramid, const Tensor& mask,
                                   const EncoderWeights& w) {
  if (mask.rank() != 3 || mask.extent(2) != 1)
    throw DimensionError("mask must be H x W x 1, got " + mask.shape_str());
  if (mask.extent(0) != pyramid.s4.extent(0) * 4 || mask.extent(1) != pyramid.s4.extent(1) * 4)
    throw DimensionError("mask extents " + mask.shape_str() +
                         " do not match the buffered pyramid");

  if (w.mode == EncoderMode::kHandcrafted) {
    // Appearance keys come straight from the buffered descriptors; the value
    // channel carries the mask, pooled to cell coverage.
    return {pyramid.s16, block_mean(mask, 16)};
  }

  // Mask path: reversed sub-pixel down-samplings with a 1x1 fuse at each
  // pyramid scale, mask features concatenated ahead of the buffered ones.
  Tensor m = relu(conv2d(space_to_depth(mask, 4), w.lae_mask_in, 1, 0));
  m = relu(conv2d(concat_channels(m, pyramid.s4), w.lae_fuse4, 1, 0));
  m = relu(conv2d(concat_channels(space_to_depth(m, 2), pyramid.s8), w.lae_fuse8, 1, 0));
  m = relu(conv2d(concat_channels(space_to_depth(m, 2), pyramid.s16), w.lae_fuse16, 1, 0));
  return {conv2d(m, w.key_head, 1, 0), conv2d(m, w.value_head, 1, 0)};
}

Tensor handcrafted_features(const Tensor& frame) {
  require_frame(frame);
  const Tensor norm = normalized_rgb(frame);
  const int h = frame.extent(0), w = frame.extent(1);
  const int ch = h / 16, cw = w / 16;

  // Gray intensity and its central-difference gradients, clamped at borders.
  Tensor gray({h, w, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      gray.at(y, x, 0) = (norm.at(y, x, 0) + norm.at(y, x, 1) + norm.at(y, x, 2)) / 3.0f;

  Tensor out({ch, cw, kHandcraftedKeyChannels});
  const float inv_n = 1.0f / 256.0f;
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      float mean[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
      float gx_sum = 0.0f, gy_sum = 0.0f;
      for (int y = cy * 16; y < (cy + 1) * 16; ++y) {
        for (int x = cx * 16; x < (cx + 1) * 16; ++x) {
          for (int c = 0; c < 3; ++c) {
            const float v = norm.at(y, x, c);
            mean[c] += v;
            sq[c] += v * v;
          }
          const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
          const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
          gx_sum += std::abs(gray.at(y, xr, 0) - gray.at(y, xl, 0)) * 0.5f;
          gy_sum += std::abs(gray.at(yd, x, 0) - gray.at(yu, x, 0)) * 0.5f;
        }
      }
      float v[kHandcraftedKeyChannels];
      for (int c = 0; c < 3; ++c) {
        mean[c] *= inv_n;
        v[c] = mean[c];
        v[3 + c] = std::sqrt(std::max(sq[c] * inv_n - mean[c] * mean[c], 0.0f));
      }
      v[6] = gx_sum * inv_n;
      v[7] = gy_sum * inv_n;
      float nrm = 0.0f;
      for (float x : v) nrm += x * x;
      nrm = std::sqrt(nrm);
      const float scale = nrm > 1e-12f ? 1.0f / nrm : 0.0f;
      for (int c = 0; c < kHandcraftedKeyChannels; ++c) out.at(cy, cx, c) = v[c] * scale;
    }
  }
  return out;
}

namespace {

std::vector<std::pair<const char*, const Tensor*>> weight_entries(const EncoderWeights& w) {
  return {{"stem", &w.stem},
          {"stage1", &w.stage1},
          {"stage2", &w.stage2},
          {"stage3", &w.stage3},
          {"lae_mask_in", &w.lae_mask_in},
          {"lae_fuse4", &w.lae_fuse4},
          {"lae_fuse8", &w.lae_fuse8},
          {"lae_fuse16", &w.lae_fuse16},
          {"key_head", &w.key_head},
          {"value_head", &w.value_head},
          {"dec_stage16", &w.dec_stage16},
          {"dec_skip8", &w.dec_skip8},
          {"dec_stage8", &w.dec_stage8},
          {"dec_skip4", &w.dec_skip4},
          {"dec_stage4", &w.dec_stage4},
          {"dec_head", &w.dec_head}};
}

Tensor* weight_slot(EncoderWeights& w, const std::string& name) {
  for (auto& [n, t] : weight_entries(w))
    if (name == n) return const_cast<Tensor*>(t);
  return nullptr;
}

}  // namespace

void save_weights(const EncoderWeights& w, const std::string& path) {
  nlohmann::json manifest;
  manifest["mode"] = w.mode == EncoderMode::kSeededConv ? "seeded" : "handcrafted";
  manifest["seed"] = w.seed;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, t] : weight_entries(w)) {
    if (t->empty()) continue;
    tensors.push_back({{"name", name}, {"shape", t->shape()}});
  }
  manifest["tensors"] = tensors;
  const std::string header = manifest.dump();

  BinaryWriter out;
  out.put_u32(static_cast<uint32_t>(header.size()));
  out.put_bytes(header.data(), header.size());
  for (const auto& [name, t] : weight_entries(w)) {
    if (t->empty()) continue;
    for (float v : t->values()) out.put_f32(v);
  }
  out.save(path);
}

EncoderWeights load_weights(const std::string& path) {
  BinaryReader in = BinaryReader::load(path);
  const uint32_t header_len = in.get_u32();
  const nlohmann::json manifest = nlohmann::json::parse(in.get_bytes(header_len));

  EncoderWeights w;
  w.mode = manifest.at("mode").get<std::string>() == "seeded" ? EncoderMode::kSeededConv
                                                              : EncoderMode::kHandcrafted;
  w.seed = manifest.at("seed").get<uint32_t>();
  for (const auto& entry : manifest.at("tensors")) {
    const auto shape = entry.at("shape").get<std::vector<int>>();
    Tensor t(shape);
    for (float& v : t.values()) v = in.get_f32();
    Tensor* slot = weight_slot(w, entry.at("name").get<std::string>());
    if (slot == nullptr) throw IoError("unknown weight tensor in " + path);
    *slot = std::move(t);
  }
  if (!in.exhausted()) throw IoError("trailing bytes in weight snapshot " + path);
  return w;
}

}  // namespace pamvos
