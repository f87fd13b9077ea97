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

#include "pamvos/imageio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pamvos {

namespace {

std::string netpbm_header(const char* magic, int w, int h) {
  std::ostringstream os;
  os << magic << "\n" << w << " " << h << "\n255\n";
  return os.str();
}

// Parses "<magic>\n<w> <h>\n255\n" allowing any whitespace between tokens.
void parse_netpbm_header(std::istringstream& in, const char* magic, const std::string& path,
                         int& w, int& h) {
  std::string tag;
  int maxval = 0;
  in >> tag >> w >> h >> maxval;
  if (!in || tag != magic || w <= 0 || h <= 0 || maxval != 255)
    throw IoError("malformed " + std::string(magic) + " header in " + path);
  in.get();  // single whitespace byte before the payload
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

void write_ppm(const Tensor& frame, const std::string& path) {
  if (frame.rank() != 3 || frame.extent(2) != 3)
    throw DimensionError("write_ppm expects H x W x 3, got " + frame.shape_str());
  const int h = frame.extent(0), w = frame.extent(1);
  std::string out = netpbm_header("P6", w, h);
  out.reserve(out.size() + static_cast<size_t>(h) * w * 3);
  for (float v : frame.values()) {
    const long q = std::lround(v);
    if (q < 0 || q > 255) throw IoError("frame value out of byte range in " + path);
    out.push_back(static_cast<char>(q));
  }
  write_file(path, out);
}

Tensor read_ppm(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  int w = 0, h = 0;
  parse_netpbm_header(in, "P6", path, w, h);
  const size_t payload = static_cast<size_t>(in.tellg());
  const size_t need = static_cast<size_t>(h) * w * 3;
  if (bytes.size() - payload != need) throw IoError("truncated P6 payload in " + path);
  Tensor t({h, w, 3});
  for (size_t i = 0; i < need; ++i)
    t.data()[i] = static_cast<float>(static_cast<unsigned char>(bytes[payload + i]));
  return t;
}

void write_pgm_mask(const Tensor& mask, const std::string& path) {
  if (mask.rank() != 3 || mask.extent(2) != 1)
    throw DimensionError("write_pgm_mask expects H x W x 1, got " + mask.shape_str());
  const int h = mask.extent(0), w = mask.extent(1);
  std::string out = netpbm_header("P5", w, h);
  out.reserve(out.size() + static_cast<size_t>(h) * w);
  for (float v : mask.values()) {
    if (v != 0.0f && v != 1.0f) throw IoError("non-binary mask value in " + path);
    out.push_back(v == 1.0f ? static_cast<char>(255) : static_cast<char>(0));
  }
  write_file(path, out);
}

Tensor read_pgm_mask(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  int w = 0, h = 0;
  parse_netpbm_header(in, "P5", path, w, h);
  const size_t payload = static_cast<size_t>(in.tellg());
  const size_t need = static_cast<size_t>(h) * w;
  if (bytes.size() - payload != need) throw IoError("truncated P5 payload in " + path);
  Tensor t({h, w, 1});
  for (size_t i = 0; i < need; ++i) {
    const unsigned char b = static_cast<unsigned char>(bytes[payload + i]);
    if (b != 0 && b != 255) throw IoError("non-binary mask byte in " + path);
    t.data()[i] = b == 255 ? 1.0f : 0.0f;
  }
  return t;
}

void BinaryWriter::put_u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void BinaryWriter::put_f32(float v) { put_u32(std::bit_cast<uint32_t>(v)); }

void BinaryWriter::put_bytes(const void* data, std::size_t n) {
  buf_.append(static_cast<const char*>(data), n);
}

void BinaryWriter::save(const std::string& path) const { write_file(path, buf_); }

BinaryReader BinaryReader::load(const std::string& path) { return BinaryReader(read_file(path)); }

uint32_t BinaryReader::get_u32() {
  if (pos_ + 4 > buf_.size()) throw IoError("truncated binary payload");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

float BinaryReader::get_f32() { return std::bit_cast<float>(get_u32()); }

std::string BinaryReader::get_bytes(std::size_t n) {
  if (pos_ + n > buf_.size()) throw IoError("truncated binary payload");
  std::string s = buf_.substr(pos_, n);
  pos_ += n;
  return s;
}

}  // namespace pamvos
