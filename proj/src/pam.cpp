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

#include "pamvos/pam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "pamvos/imageio.hpp"

namespace pamvos {

namespace {

void require_same_extents(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + " extents differ: " + a.shape_str() + " vs " +
                         b.shape_str());
}

void require_cell_map(const Tensor& t, const char* what) {
  if (t.rank() != 3)
    throw DimensionError(std::string(what) + " must be H x W x C, got " + t.shape_str());
}

float dot(std::span<const float> a, std::span<const float> b) {
  float s = 0.0f;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Tensor frame_difference(const Tensor& frame, const Tensor& previous) {
  if (frame.rank() != 3 || frame.extent(2) != 3)
    throw DimensionError("frame_difference expects H x W x 3 frames");
  require_same_extents(frame, previous, "frame_difference");
  const int h = frame.extent(0), w = frame.extent(1);
  Tensor out({h, w, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.0f;
      for (int c = 0; c < 3; ++c) s += std::abs(frame.at(y, x, c) - previous.at(y, x, c));
      out.at(y, x, 0) = s / 255.0f;
    }
  return out;
}

Tensor mask_difference(const Tensor& mask, const Tensor& previous) {
  if (mask.rank() != 3 || mask.extent(2) != 1)
    throw DimensionError("mask_difference expects H x W x 1 masks");
  require_same_extents(mask, previous, "mask_difference");
  Tensor out({mask.extent(0), mask.extent(1), 1});
  for (size_t i = 0; i < mask.numel(); ++i) {
    const float a = mask.values()[i], b = previous.values()[i];
    if ((a != 0.0f && a != 1.0f) || (b != 0.0f && b != 1.0f))
      throw DimensionError("mask_difference expects binary masks");
    out.values()[i] = std::abs(a - b);
  }
  return out;
}

TriggerDecision trigger_step(const TriggerState& state, const Tensor& frame_diff,
                             const Tensor& mask_diff) {
  require_same_extents(frame_diff, mask_diff, "trigger_step");
  long long varied = 0;
  for (size_t i = 0; i < frame_diff.numel(); ++i)
    if (frame_diff.values()[i] > state.th_f || mask_diff.values()[i] > state.th_m) ++varied;

  TriggerDecision d;
  d.state = state;
  d.state.variation = state.variation + varied;
  d.triggered = d.state.variation > state.p_th;
  if (d.triggered) d.state.variation = 0;
  return d;
}

PixelMemory::PixelMemory(int key_channels, int value_channels, std::size_t capacity)
    : key_channels_(key_channels), value_channels_(value_channels), capacity_(capacity) {
  if (key_channels <= 0 || value_channels <= 0)
    throw DimensionError("memory channel widths must be positive");
}

void PixelMemory::append(std::span<const float> key, std::span<const float> value,
                         Provenance origin) {
  if (key.size() != static_cast<size_t>(key_channels_) ||
      value.size() != static_cast<size_t>(value_channels_))
    throw DimensionError("memory entry channel widths do not match");
  if (capacity_ != 0 && size() >= capacity_)
    throw std::length_error("pixel memory capacity exceeded");
  keys_.insert(keys_.end(), key.begin(), key.end());
  values_.insert(values_.end(), value.begin(), value.end());
  provenance_.push_back(origin);
}

PixelMemory memory_init(const Tensor& key_map, const Tensor& value_map, std::size_t capacity) {
  require_cell_map(key_map, "key map");
  require_cell_map(value_map, "value map");
  if (key_map.extent(0) != value_map.extent(0) || key_map.extent(1) != value_map.extent(1))
    throw DimensionError("key/value maps are not spatially aligned");

  const int h = key_map.extent(0), w = key_map.extent(1);
  PixelMemory mem(key_map.extent(2), value_map.extent(2), capacity);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      mem.append({key_map.data() + p * key_map.extent(2), static_cast<size_t>(key_map.extent(2))},
                 {value_map.data() + p * value_map.extent(2),
                  static_cast<size_t>(value_map.extent(2))},
                 Provenance{0, y, x});
    }
  return mem;
}

Tensor cosine_similarity_matrix(const Tensor& key_map, const PixelMemory& memory) {
  require_cell_map(key_map, "key map");
  if (memory.size() == 0) throw std::logic_error("cosine similarity against empty memory");
  if (key_map.extent(2) != memory.key_channels())
    throw DimensionError("key channel width does not match memory");

  const int hw = key_map.extent(0) * key_map.extent(1);
  const int c = key_map.extent(2);
  const size_t k = memory.size();

  // Double accumulation so that identical vectors land on exactly 1.0f after
  // the float cast; the sort in select_update_pixels relies on exact ties.
  std::vector<double> mem_norm(k);
  for (size_t j = 0; j < k; ++j) {
    const std::span<const float> m = memory.key(j);
    double n = 0.0;
    for (float v : m) n += static_cast<double>(v) * v;
    mem_norm[j] = std::sqrt(n);
  }

  Tensor s({hw, static_cast<int>(k)});
  for (int i = 0; i < hw; ++i) {
    const float* q = key_map.data() + static_cast<size_t>(i) * c;
    double qn = 0.0;
    for (int ch = 0; ch < c; ++ch) qn += static_cast<double>(q[ch]) * q[ch];
    qn = std::sqrt(qn);
    float* row = s.data() + static_cast<size_t>(i) * k;
    for (size_t j = 0; j < k; ++j) {
      const std::span<const float> m = memory.key(j);
      double d = 0.0;
      for (int ch = 0; ch < c; ++ch)
        d += static_cast<double>(q[ch]) * m[static_cast<size_t>(ch)];
      const double denom = qn * mem_norm[j];
      row[j] = denom > 1e-12 ? static_cast<float>(d / denom) : 0.0f;
    }
  }
  return s;
}

std::vector<int> select_update_pixels(const Tensor& key_map, const PixelMemory& memory,
                                      float beta) {
  if (memory.size() == 0)
    throw std::logic_error("select_update_pixels requires an initialized memory");
  if (!(beta > 0.0f && beta <= 1.0f))
    throw std::invalid_argument("beta must be in (0, 1]");

  const Tensor s = cosine_similarity_matrix(key_map, memory);
  const int hw = s.extent(0);
  const int k = s.extent(1);

  // Per-row maximum similarity; the least similar pixels vary most from the
  // object model and are the ones worth remembering.
  std::vector<float> row_max(static_cast<size_t>(hw));
  for (int i = 0; i < hw; ++i) {
    const float* row = s.data() + static_cast<size_t>(i) * k;
    row_max[static_cast<size_t>(i)] = *std::max_element(row, row + k);
  }

  std::vector<int> order(static_cast<size_t>(hw));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const float sa = row_max[static_cast<size_t>(a)], sb = row_max[static_cast<size_t>(b)];
    return sa != sb ? sa < sb : a < b;
  });

  const auto take = static_cast<size_t>(std::floor(static_cast<double>(beta) * hw));
  order.resize(std::min(take, order.size()));
  return order;
}

void memory_append(PixelMemory& memory, std::span<const int> indices, const Tensor& key_map,
                   const Tensor& value_map, int frame_index) {
  require_cell_map(key_map, "key map");
  require_cell_map(value_map, "value map");
  if (key_map.extent(2) != memory.key_channels() ||
      value_map.extent(2) != memory.value_channels())
    throw DimensionError("key/value channel widths do not match memory");
  if (key_map.extent(0) != value_map.extent(0) || key_map.extent(1) != value_map.extent(1))
    throw DimensionError("key/value maps are not spatially aligned");

  const int w = key_map.extent(1);
  const int hw = key_map.extent(0) * w;
  std::unordered_set<int> seen;
  for (int idx : indices) {
    if (idx < 0 || idx >= hw) throw std::out_of_range("memory_append index out of range");
    if (!seen.insert(idx).second) throw std::invalid_argument("memory_append duplicate index");
  }

  const int ck = memory.key_channels(), cv = memory.value_channels();
  for (int idx : indices) {
    const size_t p = static_cast<size_t>(idx);
    memory.append({key_map.data() + p * ck, static_cast<size_t>(ck)},
                  {value_map.data() + p * cv, static_cast<size_t>(cv)},
                  Provenance{frame_index, idx / w, idx % w});
  }
}

Tensor memory_affinity(const Tensor& key_map, const PixelMemory& memory) {
  require_cell_map(key_map, "key map");
  if (memory.size() == 0) throw std::logic_error("memory_affinity requires a non-empty memory");
  if (key_map.extent(2) != memory.key_channels())
    throw DimensionError("key channel width does not match memory");

  const int hw = key_map.extent(0) * key_map.extent(1);
  const int c = key_map.extent(2);
  const size_t k = memory.size();
  Tensor logits({hw, static_cast<int>(k)});
  for (int i = 0; i < hw; ++i) {
    const std::span<const float> q{key_map.data() + static_cast<size_t>(i) * c,
                                   static_cast<size_t>(c)};
    float* row = logits.data() + static_cast<size_t>(i) * k;
    for (size_t j = 0; j < k; ++j) row[j] = dot(q, memory.key(j));
  }
  return softmax_rows(logits);
}

Tensor memory_match(const Tensor& key_map, const Tensor& value_map, const PixelMemory& memory) {
  require_cell_map(value_map, "value map");
  if (value_map.extent(2) != memory.value_channels())
    throw DimensionError("value channel width does not match memory");
  if (key_map.extent(0) != value_map.extent(0) || key_map.extent(1) != value_map.extent(1))
    throw DimensionError("key/value maps are not spatially aligned");

  const Tensor affinity = memory_affinity(key_map, memory);
  const int h = key_map.extent(0), w = key_map.extent(1);
  const int hw = h * w;
  const size_t k = memory.size();
  const int cv = memory.value_channels();

  // read = A x V_R, accumulated row by row over the memory values.
  Tensor read({hw, cv});
  const float* vals = memory.values().data();
  for (int i = 0; i < hw; ++i) {
    const float* arow = affinity.data() + static_cast<size_t>(i) * k;
    float* dst = read.data() + static_cast<size_t>(i) * cv;
    for (size_t j = 0; j < k; ++j) {
      const float a = arow[j];
      const float* v = vals + j * static_cast<size_t>(cv);
      for (int ch = 0; ch < cv; ++ch) dst[ch] += a * v[ch];
    }
  }

  Tensor out({h, w, 2 * cv});
  for (int i = 0; i < hw; ++i) {
    float* dst = out.data() + static_cast<size_t>(i) * (2 * cv);
    const float* r = read.data() + static_cast<size_t>(i) * cv;
    const float* q = value_map.data() + static_cast<size_t>(i) * cv;
    std::copy(r, r + cv, dst);
    std::copy(q, q + cv, dst + cv);
  }
  return out;
}

void save_memory(const PixelMemory& memory, const std::string& path) {
  nlohmann::json header;
  header["k"] = memory.size();
  header["c_k"] = memory.key_channels();
  header["c_v"] = memory.value_channels();
  header["capacity"] = memory.capacity();
  const std::string js = header.dump();

  BinaryWriter out;
  out.put_u32(static_cast<uint32_t>(js.size()));
  out.put_bytes(js.data(), js.size());
  for (float v : memory.keys()) out.put_f32(v);
  for (float v : memory.values()) out.put_f32(v);
  for (size_t i = 0; i < memory.size(); ++i) {
    const Provenance& p = memory.provenance(i);
    out.put_i32(p.frame);
    out.put_i32(p.row);
    out.put_i32(p.col);
  }
  out.save(path);
}

PixelMemory load_memory(const std::string& path) {
  BinaryReader in = BinaryReader::load(path);
  const uint32_t header_len = in.get_u32();
  const nlohmann::json header = nlohmann::json::parse(in.get_bytes(header_len));
  const size_t k = header.at("k").get<size_t>();
  const int ck = header.at("c_k").get<int>();
  const int cv = header.at("c_v").get<int>();
  const size_t cap = header.value("capacity", size_t{0});

  std::vector<float> keys(k * static_cast<size_t>(ck));
  std::vector<float> values(k * static_cast<size_t>(cv));
  for (float& v : keys) v = in.get_f32();
  for (float& v : values) v = in.get_f32();

  PixelMemory mem(ck, cv, cap);
  for (size_t i = 0; i < k; ++i) {
    Provenance p{in.get_i32(), in.get_i32(), in.get_i32()};
    mem.append({keys.data() + i * static_cast<size_t>(ck), static_cast<size_t>(ck)},
               {values.data() + i * static_cast<size_t>(cv), static_cast<size_t>(cv)}, p);
  }
  if (!in.exhausted()) throw IoError("trailing bytes in memory snapshot " + path);
  return mem;
}

}  // namespace pamvos
