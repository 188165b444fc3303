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

#ifndef CLERIC_BLOCKS_H_
#define CLERIC_BLOCKS_H_

#include <utility>

#include "cleric/numerics.h"
#include "cleric/tensor.h"

namespace cleric {

// Deformable convolution v2. `kernel` holds the (out, in, kh, kw) weights
// w_k over the K = kh * kw lattice taps; `offset_net` maps the block input to
// 3K channels at the output resolution: 2K raw offsets, interleaved as
// (dy_k, dx_k), followed by K modulation logits.
struct DcnParams {
  ConvSpec kernel;
  ConvSpec offset_net;

  int taps() const { return kernel.kernel_h() * kernel.kernel_w(); }
};

// Zero-initialized DCN of the given geometry, kernel 3x3.
DcnParams MakeDcn(int out_ch, int in_ch, int stride);

// y(p) = sum_k w_k * x(p * stride + p_k + dp_k) * m_k + bias. `offsets` is
// (b, 2K, ho, wo), `modulation` is (b, K, ho, wo). Sampling is bilinear with
// edge-clamped neighbors.
Tensor Dcnv2(const Tensor& x, const ConvSpec& kernel, const Tensor& offsets,
             const Tensor& modulation);

struct OffsetField {
  Tensor offsets;
  Tensor modulation;
};

// offsets = first 2K channels of offset_net(x), modulation = sigmoid of the
// remaining K.
OffsetField PredictOffsets(const Tensor& x, const DcnParams& p);

// Dcnv2 with offsets predicted from x itself.
Tensor DeformableConv(const Tensor& x, const DcnParams& p);

// Downsampling block: GELU(dcn_stride2(x) + conv1x1_stride2(x)). With
// `deformable` false the main path is a plain strided convolution with the
// same kernel.
struct DrbsParams {
  DcnParams main;
  ConvSpec skip;
};

DrbsParams MakeDrbs(int in_ch, int out_ch);
Tensor Drbs(const Tensor& x, const DrbsParams& p, bool deformable = true);

// Upsampling block: GELU(pixel_shuffle(dcn(x), 2) + up2(conv1x1(x))), where
// the DCN emits 4 * out channels and up2 is bilinear.
struct DrbuParams {
  DcnParams main;
  ConvSpec skip;

  int out_channels() const { return skip.out_channels(); }
};

DrbuParams MakeDrbu(int in_ch, int out_ch);
Tensor Drbu(const Tensor& x, const DrbuParams& p, bool deformable = true);

// Recurrent residual block: X_i = F(X_{i-1}) + X_{i-1} for i = 1..t with
// F(X) = GELU(conv2(GELU(conv1(X)))); the same two convolutions every pass.
struct R2bParams {
  ConvSpec conv1;
  ConvSpec conv2;
  int t = 2;

  std::size_t ParameterCount() const;
};

R2bParams MakeR2b(int channels, int t);
Tensor R2b(const Tensor& x, const R2bParams& p);
// Same with the recursion count overridden.
Tensor R2b(const Tensor& x, const R2bParams& p, int t);
// One pass of the recursion, X + F(X).
Tensor R2bStep(const Tensor& x, const R2bParams& p);

}  // namespace cleric

#endif  // CLERIC_BLOCKS_H_
