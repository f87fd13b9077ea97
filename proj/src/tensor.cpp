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

#include "pamvos/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pamvos {

namespace {

std::size_t checked_numel(const std::vector<int>& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
  std::size_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive");
    n *= static_cast<size_t>(e);
  }
  return n;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(checked_numel(shape_), 0.0f);
}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_numel(shape_) != data_.size())
    throw DimensionError("tensor data length does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int> shape, float value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << ")";
  return os.str();
}

Tensor space_to_depth(const Tensor& f, int block) {
  require(f.rank() == 3, "space_to_depth expects H x W x C, got " + f.shape_str());
  require(block >= 1, "space_to_depth block factor must be >= 1");
  if (block == 1) return f;
  const int h = f.extent(0), w = f.extent(1), c = f.extent(2);
  require(h % block == 0 && w % block == 0,
          "space_to_depth: extents " + f.shape_str() + " not divisible by block " +
              std::to_string(block));

  Tensor out({h / block, w / block, c * block * block});
  const int oh = h / block, ow = w / block;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      float* dst = out.data() + (static_cast<size_t>(y) * ow + x) * out.extent(2);
      for (int by = 0; by < block; ++by) {
        for (int bx = 0; bx < block; ++bx) {
          const float* src =
              f.data() + (static_cast<size_t>(y * block + by) * w + (x * block + bx)) * c;
          std::copy(src, src + c, dst);
          dst += c;
        }
      }
    }
  }
  return out;
}

Tensor depth_to_space(const Tensor& f, int block) {
  require(f.rank() == 3, "depth_to_space expects H x W x C, got " + f.shape_str());
  require(block >= 1, "depth_to_space block factor must be >= 1");
  if (block == 1) return f;
  const int h = f.extent(0), w = f.extent(1), c = f.extent(2);
  require(c % (block * block) == 0,
          "depth_to_space: channels " + std::to_string(c) + " not divisible by block^2");

  const int oc = c / (block * block);
  Tensor out({h * block, w * block, oc});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float* src = f.data() + (static_cast<size_t>(y) * w + x) * c;
      for (int by = 0; by < block; ++by) {
        for (int bx = 0; bx < block; ++bx) {
          float* dst = out.data() +
                       (static_cast<size_t>(y * block + by) * (w * block) + (x * block + bx)) * oc;
          std::copy(src, src + oc, dst);
          src += oc;
        }
      }
    }
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 tensors");
  require(a.extent(1) == b.extent(0),
          "matmul inner extents differ: " + a.shape_str() + " vs " + b.shape_str());
  const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor out({m, n});
  // i-k-j order: each out(i, j) still accumulates over k left to right, and the
  // inner j loop runs over contiguous rows of b and out.
  for (int i = 0; i < m; ++i) {
    float* orow = out.data() + static_cast<size_t>(i) * n;
    const float* arow = a.data() + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const float s = arow[kk];
      const float* brow = b.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require(a.rank() == 2, "softmax_rows expects a rank-2 tensor");
  const int m = a.extent(0), n = a.extent(1);
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    const float* src = a.data() + static_cast<size_t>(i) * n;
    float* dst = out.data() + static_cast<size_t>(i) * n;
    float mx = src[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, src[j]);
    float sum = 0.0f;
    for (int j = 0; j < n; ++j) {
      dst[j] = std::exp(src[j] - mx);
      sum += dst[j];
    }
    const float inv = 1.0f / sum;
    for (int j = 0; j < n; ++j) dst[j] *= inv;
  }
  return out;
}

Tensor conv2d(const Tensor& f, const Tensor& w, int stride, int pad) {
  require(f.rank() == 3, "conv2d input must be H x W x Cin");
  require(w.rank() == 4, "conv2d weight must be k x k x Cin x Cout");
  const int k = w.extent(0);
  require(k == w.extent(1) && (k == 1 || k == 3), "conv2d kernel must be square, k in {1, 3}");
  require(w.extent(2) == f.extent(2),
          "conv2d channel mismatch: input " + f.shape_str() + " vs weight " + w.shape_str());
  require(stride >= 1 && pad >= 0, "conv2d: stride must be >= 1 and pad >= 0");

  const int h = f.extent(0), wi = f.extent(1), cin = f.extent(2), cout = w.extent(3);
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (wi + 2 * pad - k) / stride + 1;
  require(oh >= 1 && ow >= 1, "conv2d output would be empty");

  Tensor out({oh, ow, cout});
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      float* dst = out.data() + (static_cast<size_t>(oy) * ow + ox) * cout;
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= wi) continue;
          const float* src = f.data() + (static_cast<size_t>(iy) * wi + ix) * cin;
          const float* wr = w.data() + ((static_cast<size_t>(ky) * k + kx) * cin) * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const float s = src[ci];
            const float* wc = wr + static_cast<size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) dst[co] += s * wc[co];
          }
        }
      }
    }
  }
  return out;
}

Tensor upsample_bilinear_x2(const Tensor& f) {
  require(f.rank() == 3, "upsample_bilinear_x2 expects H x W x C");
  const int h = f.extent(0), w = f.extent(1), c = f.extent(2);
  Tensor out({h * 2, w * 2, c});
  for (int oy = 0; oy < 2 * h; ++oy) {
    const float sy = (oy + 0.5f) * 0.5f - 0.5f;
    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float fy = std::clamp(sy - static_cast<float>(y0), 0.0f, 1.0f);
    for (int ox = 0; ox < 2 * w; ++ox) {
      const float sx = (ox + 0.5f) * 0.5f - 0.5f;
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const float fx = std::clamp(sx - static_cast<float>(x0), 0.0f, 1.0f);
      const float w00 = (1.0f - fy) * (1.0f - fx), w01 = (1.0f - fy) * fx;
      const float w10 = fy * (1.0f - fx), w11 = fy * fx;
      const float* p00 = f.data() + (static_cast<size_t>(y0) * w + x0) * c;
      const float* p01 = f.data() + (static_cast<size_t>(y0) * w + x1) * c;
      const float* p10 = f.data() + (static_cast<size_t>(y1) * w + x0) * c;
      const float* p11 = f.data() + (static_cast<size_t>(y1) * w + x1) * c;
      float* dst = out.data() + (static_cast<size_t>(oy) * (2 * w) + ox) * c;
      for (int ch = 0; ch < c; ++ch)
        dst[ch] = w00 * p00[ch] + w01 * p01[ch] + w10 * p10[ch] + w11 * p11[ch];
    }
  }
  return out;
}

Tensor relu(const Tensor& f) {
  Tensor out = f;
  for (float& v : out.values()) v = std::max(v, 0.0f);
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require(a.rank() == 3 && b.rank() == 3, "concat_channels expects H x W x C tensors");
  require(a.extent(0) == b.extent(0) && a.extent(1) == b.extent(1),
          "concat_channels spatial extents differ: " + a.shape_str() + " vs " + b.shape_str());
  const int h = a.extent(0), w = a.extent(1), ca = a.extent(2), cb = b.extent(2);
  Tensor out({h, w, ca + cb});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      float* dst = out.data() + p * (ca + cb);
      std::copy(a.data() + p * ca, a.data() + p * ca + ca, dst);
      std::copy(b.data() + p * cb, b.data() + p * cb + cb, dst + ca);
    }
  }
  return out;
}

}  // namespace pamvos
