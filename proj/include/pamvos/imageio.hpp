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
#include <vector>

#include "pamvos/tensor.hpp"

namespace pamvos {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frames are binary PPM (P6, maxval 255), masks binary PGM (P5, values 0/255):
// header "P6\n<w> <h>\n255\n" followed by raw bytes. Frame tensors hold raw
// 0..255 values, mask tensors hold {0, 1}.
void write_ppm(const Tensor& frame, const std::string& path);
Tensor read_ppm(const std::string& path);
void write_pgm_mask(const Tensor& mask, const std::string& path);
Tensor read_pgm_mask(const std::string& path);

/// Little-endian byte packing for snapshot payloads.
class BinaryWriter {
 public:
  void put_u32(uint32_t v);
  void put_i32(int32_t v) { put_u32(static_cast<uint32_t>(v)); }
  void put_f32(float v);
  void put_bytes(const void* data, std::size_t n);
  const std::string& bytes() const { return buf_; }
  void save(const std::string& path) const;

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string bytes) : buf_(std::move(bytes)) {}
  static BinaryReader load(const std::string& path);

  uint32_t get_u32();
  int32_t get_i32() { return static_cast<int32_t>(get_u32()); }
  float get_f32();
  std::string get_bytes(std::size_t n);
  bool exhausted() const { return pos_ == buf_.size(); }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace pamvos
