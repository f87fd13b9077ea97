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

#include "pamvos/decoder.hpp"

namespace pamvos {

namespace {

Tensor fuse_skip(const Tensor& x, const Tensor& skip, const Tensor& proj) {
  Tensor projected = conv2d(skip, proj, 1, 0);
  if (!projected.same_shape(x))
    throw DimensionError("skip projection " + projected.shape_str() +
                         " does not align with decoder feature " + x.shape_str());
  Tensor out = x;
  for (size_t i = 0; i < out.numel(); ++i) out.values()[i] += projected.values()[i];
  return out;
}

}  // namespace

Tensor decode(const Tensor& activated, const FeaturePyramid& pyramid, const EncoderWeights& w) {
  if (activated.rank() != 3)
    throw DimensionError("activated feature must be H x W x C, got " + activated.shape_str());
  if (activated.extent(0) != pyramid.s16.extent(0) ||
      activated.extent(1) != pyramid.s16.extent(1))
    throw DimensionError("activated feature " + activated.shape_str() +
                         " is not at stride-16 extents " + pyramid.s16.shape_str());

  Tensor x = relu(conv2d(activated, w.dec_stage16, 1, 1));
  x = upsample_bilinear_x2(x);
  x = relu(fuse_skip(x, pyramid.s8, w.dec_skip8));

  x = relu(conv2d(x, w.dec_stage8, 1, 1));
  x = upsample_bilinear_x2(x);
  x = relu(fuse_skip(x, pyramid.s4, w.dec_skip4));

  x = relu(conv2d(x, w.dec_stage4, 1, 1));
  x = upsample_bilinear_x2(x);
  x = upsample_bilinear_x2(x);
  return conv2d(x, w.dec_head, 1, 0);
}

Tensor propagate_cell_probs(const Tensor& key_map, const PixelMemory& memory) {
  if (memory.value_channels() != kHandcraftedValueChannels)
    throw ModeError("label propagation needs single-channel mask values in memory");
  if (memory.size() == 0) throw std::logic_error("label propagation over empty memory");

  const int h = key_map.extent(0), w = key_map.extent(1), c = key_map.extent(2);
  if (c != memory.key_channels())
    throw DimensionError("key channel width does not match memory");

  const size_t k = memory.size();
  Tensor logits({h * w, static_cast<int>(k)});
  for (int i = 0; i < h * w; ++i) {
    const float* q = key_map.data() + static_cast<size_t>(i) * c;
    float* row = logits.data() + static_cast<size_t>(i) * k;
    for (size_t j = 0; j < k; ++j) {
      const std::span<const float> m = memory.key(j);
      float s = 0.0f;
      for (int ch = 0; ch < c; ++ch) s += q[ch] * m[static_cast<size_t>(ch)];
      row[j] = s * kPropagationSharpness;
    }
  }
  const Tensor affinity = softmax_rows(logits);

  Tensor probs({h, w, 1});
  const float* vals = memory.values().data();
  for (int i = 0; i < h * w; ++i) {
    const float* arow = affinity.data() + static_cast<size_t>(i) * k;
    float p = 0.0f;
    for (size_t j = 0; j < k; ++j) p += arow[j] * vals[j];
    probs.values()[static_cast<size_t>(i)] = p;
  }
  return probs;
}

Tensor propagate_labels(const Tensor& key_map, const PixelMemory& memory) {
  Tensor probs = propagate_cell_probs(key_map, memory);
  for (int step = 0; step < 4; ++step) probs = upsample_bilinear_x2(probs);
  return probs;
}

Tensor binarize(const Tensor& scores, float threshold) {
  if (scores.rank() != 3 || scores.extent(2) != 1)
    throw DimensionError("binarize expects H x W x 1 scores, got " + scores.shape_str());
  Tensor out({scores.extent(0), scores.extent(1), 1});
  for (size_t i = 0; i < scores.numel(); ++i)
    out.values()[i] = scores.values()[i] >= threshold ? 1.0f : 0.0f;
  return out;
}

}  // namespace pamvos
