// Copyright 2026 The Cleric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLERIC_TENSOR_H_
#define CLERIC_TENSOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cleric {

// (batch, channels, height, width).
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const { return static_cast<std::size_t>(n) * c * h * w; }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

// Dense rank-4 float tensor, row-major NCHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(int n, int c, int h, int w, float fill = 0.0f)
      : Tensor(Shape{n, c, h, w}, fill) {}
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  const std::vector<float>& storage() const { return data_; }

  float& at(int b, int ch, int y, int x) { return data_[Index(b, ch, y, x)]; }
  float at(int b, int ch, int y, int x) const {
    return data_[Index(b, ch, y, x)];
  }

  // Pointer to the start of one (b, ch) plane.
  float* plane(int b, int ch) { return data_.data() + Index(b, ch, 0, 0); }
  const float* plane(int b, int ch) const {
    return data_.data() + Index(b, ch, 0, 0);
  }

  bool AllFinite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t Index(int b, int ch, int y, int x) const {
    return ((static_cast<std::size_t>(b) * shape_.c + ch) * shape_.h + y) *
               shape_.w +
           x;
  }

  Shape shape_;
  std::vector<float> data_;
};

// Shape validation shared by every kernel: all dims must be >= 1.
void CheckNonEmpty(const Tensor& t, const char* what);

}  // namespace cleric

#endif  // CLERIC_TENSOR_H_
