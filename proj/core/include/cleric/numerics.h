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

#ifndef CLERIC_NUMERICS_H_
#define CLERIC_NUMERICS_H_

#include <span>
#include <vector>

#include "cleric/tensor.h"

namespace cleric {

// Convolution weights (out_ch, in_ch, kh, kw) stored as a Tensor, with one
// bias per output channel. Padding is always replicate, (k - 1) / 2 per side,
// so stride 1 preserves spatial size and stride s yields ceil(size / s).
struct ConvSpec {
  Tensor weight;
  std::vector<float> bias;
  int stride = 1;

  int out_channels() const { return weight.n(); }
  int in_channels() const { return weight.c(); }
  int kernel_h() const { return weight.h(); }
  int kernel_w() const { return weight.w(); }

  // Throws kInvalidArgument on even kernels, stride < 1 or a bias of the
  // wrong length.
  void Validate() const;
};

// Zero weights and biases of the given geometry.
ConvSpec MakeConv(int out_ch, int in_ch, int kernel, int stride = 1);

int ConvOutputSize(int input, int stride);

Tensor Conv2d(const Tensor& x, const ConvSpec& spec);

// Depth-to-space: (b, c*r*r, h, w) -> (b, c, h*r, w*r). Channel
// c*r*r + i*r + j lands at spatial offset (i, j) of each r x r cell.
Tensor PixelShuffle(const Tensor& x, int r);
// Exact inverse of PixelShuffle.
Tensor PixelUnshuffle(const Tensor& x, int r);

enum class Activation { kGelu, kSigmoid };

// Exact erf formulation, v * Phi(v).
float Gelu(float v);
float Sigmoid(float v);
Tensor Activate(const Tensor& x, Activation kind);
void ActivateInPlace(Tensor& x, Activation kind);

enum class ResampleMode { kAvgPool2, kBilinear };

// kAvgPool2 ignores out_h/out_w and requires even spatial dims. kBilinear
// follows the align_corners=false convention.
Tensor Resample(const Tensor& x, ResampleMode mode, int out_h = 0,
                int out_w = 0);

// Bilinear interpolation on one h x w plane. Neighbors outside the plane are
// clamped to the nearest edge sample.
float BilinearSample(const float* plane, int h, int w, float row, float col);

struct SampleCoord {
  float row;
  float col;
};

std::vector<float> BilinearSample(const Tensor& x, int batch, int channel,
                                  std::span<const SampleCoord> coords);

// Elementwise helpers used by the network code.
Tensor Add(const Tensor& a, const Tensor& b);
void AddInPlace(Tensor& a, const Tensor& b);
Tensor ConcatChannels(std::span<const Tensor* const> parts);
Tensor ConcatChannels(const Tensor& a, const Tensor& b);
Tensor SliceChannels(const Tensor& x, int begin, int count);
// Swaps the spatial axes: (b, c, h, w) -> (b, c, w, h).
Tensor TransposeSpatial(const Tensor& x);
// Replicate-pads the bottom and right edges up to (h, w).
Tensor PadReplicate(const Tensor& x, int h, int w);
Tensor Crop(const Tensor& x, int h, int w);
void ClampInPlace(Tensor& x, float lo, float hi);

}  // namespace cleric

#endif  // CLERIC_NUMERICS_H_
