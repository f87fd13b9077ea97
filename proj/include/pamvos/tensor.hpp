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

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pamvos {

/// Thrown when tensor extents do not satisfy an operation's contract.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation is invoked in an incompatible encoder/decoder mode.
struct ModeError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Dense row-major float32 array. Image-like tensors are H x W x C
/// (channel-last), matrices are M x N.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<float> data);

  static Tensor full(std::vector<int> shape, float value);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int extent(int dim) const { return shape_[static_cast<size_t>(dim)]; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  float& at(int i, int j) { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  float at(int i, int j) const { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  float& at(int y, int x, int c) {
    return data_[(static_cast<size_t>(y) * shape_[1] + x) * shape_[2] + c];
  }
  float at(int y, int x, int c) const {
    return data_[(static_cast<size_t>(y) * shape_[1] + x) * shape_[2] + c];
  }

  /// Contiguous row i of a rank-2 tensor.
  std::span<const float> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * shape_[1], static_cast<size_t>(shape_[1])};
  }
  std::span<float> row(int i) {
    return {data_.data() + static_cast<size_t>(i) * shape_[1], static_cast<size_t>(shape_[1])};
  }

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

// Lossless block rearrangement between spatial and channel dimensions.
// space_to_depth moves each r x r spatial block into r*r channel groups in
// row-major block order; depth_to_space is its exact inverse.
Tensor space_to_depth(const Tensor& f, int block);
Tensor depth_to_space(const Tensor& f, int block);

/// M x K times K x N with fixed left-to-right accumulation over K.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& a);

/// 2-D convolution, zero padding, kernel k in {1, 3}.
/// f: H x W x Cin, w: k x k x Cin x Cout.
Tensor conv2d(const Tensor& f, const Tensor& w, int stride, int pad);

/// Bilinear x2 upsampling, align-corners=false.
Tensor upsample_bilinear_x2(const Tensor& f);

Tensor relu(const Tensor& f);
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace pamvos
