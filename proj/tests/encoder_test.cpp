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
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pamvos/encoder.hpp"
#include "pamvos/rng.hpp"

using namespace pamvos;

namespace {

Tensor random_frame(uint32_t seed, int h, int w) {
  SeededRng rng(seed);
  Tensor f({h, w, 3});
  for (float& v : f.values()) v = static_cast<float>(rng.uniform_int(0, 255));
  return f;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.numel(); ++i)
    if (a.values()[i] != b.values()[i]) return false;
  return true;
}

float cosine(std::span<const float> a, std::span<const float> b) {
  float d = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return d / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("seeded query encoding emits the published channel plan at 384x384") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kSeededConv, 3);
  const Tensor frame = random_frame(100, 384, 384);
  const QueryEncoding q = encode_query(frame, w);
  CHECK(q.pyramid.s4.shape() == std::vector<int>{96, 96, 64});
  CHECK(q.pyramid.s8.shape() == std::vector<int>{48, 48, 128});
  CHECK(q.pyramid.s16.shape() == std::vector<int>{24, 24, 256});
  CHECK(q.key.shape() == std::vector<int>{24, 24, 32});
  CHECK(q.value.shape() == std::vector<int>{24, 24, 128});
  for (float v : q.key.values()) CHECK(std::isfinite(v));
}

TEST_CASE("encoding is deterministic per seed") {
  const Tensor frame = random_frame(101, 64, 64);
  const EncoderWeights w1 = EncoderWeights::make(EncoderMode::kSeededConv, 42);
  const EncoderWeights w2 = EncoderWeights::make(EncoderMode::kSeededConv, 42);
  CHECK(bit_equal(w1.stem, w2.stem));
  CHECK(bit_equal(w1.dec_head, w2.dec_head));

  const QueryEncoding a = encode_query(frame, w1);
  const QueryEncoding b = encode_query(frame, w2);
  CHECK(bit_equal(a.key, b.key));
  CHECK(bit_equal(a.value, b.value));

  const EncoderWeights w3 = EncoderWeights::make(EncoderMode::kSeededConv, 43);
  CHECK_FALSE(bit_equal(w1.stem, w3.stem));
}

TEST_CASE("handcrafted mode narrows the key and value widths") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kHandcrafted, 5);
  const Tensor frame = random_frame(102, 64, 96);
  const QueryEncoding q = encode_query(frame, w);
  CHECK(q.key.shape() == std::vector<int>{4, 6, 8});
  CHECK(q.value.shape() == std::vector<int>{4, 6, 1});
  CHECK(w.key_channels() == 8);
  CHECK(w.value_channels() == 1);
}

TEST_CASE("encode_query rejects extents not divisible by 16") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kSeededConv, 1);
  CHECK_THROWS_AS(encode_query(Tensor({60, 64, 3}), w), DimensionError);
}

TEST_CASE("reference keys are mask sensitive") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kSeededConv, 7);
  const Tensor frame = random_frame(103, 64, 64);
  const QueryEncoding q = encode_query(frame, w);
  const ReferenceEncoding zeros = encode_reference(q.pyramid, Tensor({64, 64, 1}), w);
  const ReferenceEncoding ones = encode_reference(q.pyramid, Tensor::full({64, 64, 1}, 1.0f), w);
  CHECK_FALSE(bit_equal(zeros.key, ones.key));

  // one flipped 16x16 cell is enough to reach the stride-16 key map
  Tensor mask({64, 64, 1});
  for (int y = 16; y < 32; ++y)
    for (int x = 32; x < 48; ++x) mask.at(y, x, 0) = 1.0f;
  const ReferenceEncoding cell = encode_reference(q.pyramid, mask, w);
  CHECK_FALSE(bit_equal(zeros.key, cell.key));
}

TEST_CASE("encode_reference rejects a mask that does not match the pyramid") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kSeededConv, 7);
  const QueryEncoding q = encode_query(random_frame(104, 64, 64), w);
  CHECK_THROWS_AS(encode_reference(q.pyramid, Tensor({32, 64, 1}), w), DimensionError);
}

TEST_CASE("encode_reference reuses buffered features instead of the backbone") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kSeededConv, 9);
  const QueryEncoding q = encode_query(random_frame(105, 64, 64), w);
  reset_backbone_conv_calls();
  (void)encode_reference(q.pyramid, Tensor::full({64, 64, 1}, 1.0f), w);
  CHECK(backbone_conv_calls() == 0);

  reset_backbone_conv_calls();
  (void)encode_query(random_frame(106, 64, 64), w);
  CHECK(backbone_conv_calls() == 4);  // stem + three stages
}

TEST_CASE("handcrafted reference values equal the block mean of the mask") {
  const EncoderWeights w = EncoderWeights::make(EncoderMode::kHandcrafted, 2);
  const Tensor frame = random_frame(107, 48, 48);
  const QueryEncoding q = encode_query(frame, w);

  SeededRng rng(200);
  Tensor mask({48, 48, 1});
  for (float& v : mask.values()) v = rng.uniform() < 0.4f ? 1.0f : 0.0f;
  const ReferenceEncoding ref = encode_reference(q.pyramid, mask, w);
  REQUIRE(ref.value.shape() == std::vector<int>{3, 3, 1});

  for (int cy = 0; cy < 3; ++cy)
    for (int cx = 0; cx < 3; ++cx) {
      float sum = 0.0f;
      for (int y = cy * 16; y < (cy + 1) * 16; ++y)
        for (int x = cx * 16; x < (cx + 1) * 16; ++x) sum += mask.at(y, x, 0);
      CHECK(ref.value.at(cy, cx, 0) == doctest::Approx(sum / 256.0f).epsilon(1e-6));
    }
  // keys are the buffered appearance descriptors
  CHECK(bit_equal(ref.key, q.pyramid.s16));
}

TEST_CASE("handcrafted features: uniform frame, unit norm, color separation") {
  const Tensor gray = Tensor::full({32, 32, 3}, 128.0f);
  const Tensor feat = handcrafted_features(gray);
  REQUIRE(feat.shape() == std::vector<int>{2, 2, 8});
  for (int cy = 0; cy < 2; ++cy)
    for (int cx = 0; cx < 2; ++cx)
      for (int c = 0; c < 8; ++c) {
        CHECK(feat.at(cy, cx, c) == doctest::Approx(feat.at(0, 0, c)));
        if (c >= 3) CHECK(feat.at(cy, cx, c) == 0.0f);  // stds and gradients vanish
      }

  Tensor two({16, 32, 3});
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x) {
      two.at(y, x, 0) = x < 16 ? 255.0f : 0.0f;  // red cell, then blue cell
      two.at(y, x, 2) = x < 16 ? 0.0f : 255.0f;
    }
  const Tensor f2 = handcrafted_features(two);
  const std::span<const float> red{f2.data(), 8};
  const std::span<const float> blue{f2.data() + 8, 8};
  CHECK(cosine(red, blue) < 0.9f);

  const Tensor noisy = random_frame(108, 48, 64);
  const Tensor fn = handcrafted_features(noisy);
  for (int cy = 0; cy < 3; ++cy)
    for (int cx = 0; cx < 4; ++cx) {
      float n = 0.0f;
      for (int c = 0; c < 8; ++c) n += fn.at(cy, cx, c) * fn.at(cy, cx, c);
      CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("weight snapshots round trip bit exactly") {
  const std::string path = (std::filesystem::temp_directory_path() / "pamvos_w.bin").string();
  for (EncoderMode mode : {EncoderMode::kSeededConv, EncoderMode::kHandcrafted}) {
    const EncoderWeights w = EncoderWeights::make(mode, 77);
    save_weights(w, path);
    const EncoderWeights r = load_weights(path);
    CHECK(r.mode == w.mode);
    CHECK(r.seed == w.seed);
    CHECK(bit_equal(r.dec_stage16, w.dec_stage16));
    CHECK(bit_equal(r.dec_head, w.dec_head));
    if (mode == EncoderMode::kSeededConv) {
      CHECK(bit_equal(r.stem, w.stem));
      CHECK(bit_equal(r.lae_fuse16, w.lae_fuse16));
      CHECK(bit_equal(r.key_head, w.key_head));
    }
  }
  std::filesystem::remove(path);
}
