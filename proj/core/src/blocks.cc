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

#include "cleric/blocks.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cleric/error.h"
#include "internal/gemm.h"

namespace cleric {
namespace {

void ExpectShape(const Tensor& t, const Shape& want, const char* what) {
  if (t.shape() != want) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": expected " +
                                               want.ToString() + ", got " +
                                               t.shape().ToString());
  }
}

// Four bilinear neighbors of one sample, weights pre-multiplied by the
// modulation scalar.
struct Gather {
  std::array<int, 4> idx;
  std::array<float, 4> wt;
};

}  // namespace

DcnParams MakeDcn(int out_ch, int in_ch, int stride) {
  DcnParams p{MakeConv(out_ch, in_ch, 3, stride),
              MakeConv(3 * 9, in_ch, 3, stride)};
  return p;
}

Tensor Dcnv2(const Tensor& x, const ConvSpec& kernel, const Tensor& offsets,
             const Tensor& modulation) {
  CheckNonEmpty(x, "dcnv2");
  kernel.Validate();
  if (x.c() != kernel.in_channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "dcnv2 expects " + std::to_string(kernel.in_channels()) +
                    " input channels, got " + std::to_string(x.c()));
  }
  const int kh = kernel.kernel_h();
  const int kw = kernel.kernel_w();
  const int taps = kh * kw;
  const int s = kernel.stride;
  const int h = x.h();
  const int w = x.w();
  const int oh = ConvOutputSize(h, s);
  const int ow = ConvOutputSize(w, s);
  ExpectShape(offsets, Shape{x.n(), 2 * taps, oh, ow}, "dcnv2 offsets");
  ExpectShape(modulation, Shape{x.n(), taps, oh, ow}, "dcnv2 modulation");

  const int cin = x.c();
  const int cout = kernel.out_channels();
  const int positions = oh * ow;
  const int rows = cin * taps;
  Tensor out(x.n(), cout, oh, ow);
  std::vector<Gather> gather(static_cast<std::size_t>(taps) * positions);
  std::vector<float> col(static_cast<std::size_t>(rows) * positions);

  for (int b = 0; b < x.n(); ++b) {
    for (int k = 0; k < taps; ++k) {
      const int ky = k / kw - (kh - 1) / 2;
      const int kx = k % kw - (kw - 1) / 2;
      const float* dy = offsets.plane(b, 2 * k);
      const float* dx = offsets.plane(b, 2 * k + 1);
      const float* m = modulation.plane(b, k);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const int p = oy * ow + ox;
          const float row = static_cast<float>(oy * s + ky) + dy[p];
          const float colf = static_cast<float>(ox * s + kx) + dx[p];
          const float fy = std::floor(row);
          const float fx = std::floor(colf);
          const float wy = row - fy;
          const float wx = colf - fx;
          const int y0 =
              static_cast<int>(std::clamp(fy, -1.0f, static_cast<float>(h)));
          const int x0 =
              static_cast<int>(std::clamp(fx, -1.0f, static_cast<float>(w)));
          const int ya = std::clamp(y0, 0, h - 1);
          const int yb = std::clamp(y0 + 1, 0, h - 1);
          const int xa = std::clamp(x0, 0, w - 1);
          const int xb = std::clamp(x0 + 1, 0, w - 1);
          const float mod = m[p];
          Gather& g = gather[static_cast<std::size_t>(k) * positions + p];
          g.idx = {ya * w + xa, ya * w + xb, yb * w + xa, yb * w + xb};
          g.wt = {mod * (1.0f - wy) * (1.0f - wx), mod * (1.0f - wy) * wx,
                  mod * wy * (1.0f - wx), mod * wy * wx};
        }
      }
    }
    for (int ci = 0; ci < cin; ++ci) {
      const float* plane = x.plane(b, ci);
      for (int k = 0; k < taps; ++k) {
        float* dst =
            col.data() + (static_cast<std::size_t>(ci) * taps + k) * positions;
        const Gather* g =
            gather.data() + static_cast<std::size_t>(k) * positions;
        for (int p = 0; p < positions; ++p) {
          dst[p] = g[p].wt[0] * plane[g[p].idx[0]] +
                   g[p].wt[1] * plane[g[p].idx[1]] +
                   g[p].wt[2] * plane[g[p].idx[2]] +
                   g[p].wt[3] * plane[g[p].idx[3]];
        }
      }
    }
    float* dst = out.plane(b, 0);
    internal::Gemm(kernel.weight.data(), col.data(), dst, cout, rows,
                   positions);
    for (int co = 0; co < cout; ++co) {
      float* o = dst + static_cast<std::size_t>(co) * positions;
      for (int p = 0; p < positions; ++p) o[p] += kernel.bias[co];
    }
  }
  return out;
}

OffsetField PredictOffsets(const Tensor& x, const DcnParams& p) {
  const int taps = p.taps();
  if (p.offset_net.out_channels() != 3 * taps) {
    throw Error(
        ErrorCode::kInvalidArgument,
        "offset net must emit 3K = " + std::to_string(3 * taps) + " channels");
  }
  if (p.offset_net.stride != p.kernel.stride) {
    throw Error(ErrorCode::kInvalidArgument,
                "offset net stride differs from kernel stride");
  }
  const Tensor raw = Conv2d(x, p.offset_net);
  OffsetField f;
  f.offsets = SliceChannels(raw, 0, 2 * taps);
  f.modulation = SliceChannels(raw, 2 * taps, taps);
  ActivateInPlace(f.modulation, Activation::kSigmoid);
  return f;
}

Tensor DeformableConv(const Tensor& x, const DcnParams& p) {
  const OffsetField f = PredictOffsets(x, p);
  return Dcnv2(x, p.kernel, f.offsets, f.modulation);
}

DrbsParams MakeDrbs(int in_ch, int out_ch) {
  return DrbsParams{MakeDcn(out_ch, in_ch, 2), MakeConv(out_ch, in_ch, 1, 2)};
}

Tensor Drbs(const Tensor& x, const DrbsParams& p, bool deformable) {
  CheckNonEmpty(x, "drbs");
  if (x.h() % 2 != 0 || x.w() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "drbs needs even spatial dims, got " + x.shape().ToString());
  }
  Tensor y = deformable ? DeformableConv(x, p.main) : Conv2d(x, p.main.kernel);
  AddInPlace(y, Conv2d(x, p.skip));
  ActivateInPlace(y, Activation::kGelu);
  return y;
}

DrbuParams MakeDrbu(int in_ch, int out_ch) {
  return DrbuParams{MakeDcn(4 * out_ch, in_ch, 1), MakeConv(out_ch, in_ch, 1)};
}

Tensor Drbu(const Tensor& x, const DrbuParams& p, bool deformable) {
  CheckNonEmpty(x, "drbu");
  if (p.main.kernel.out_channels() != 4 * p.out_channels()) {
    throw Error(ErrorCode::kInvalidArgument,
                "drbu main path must emit 4x the shortcut channels");
  }
  Tensor main =
      deformable ? DeformableConv(x, p.main) : Conv2d(x, p.main.kernel);
  Tensor y = PixelShuffle(main, 2);
  AddInPlace(y, Resample(Conv2d(x, p.skip), ResampleMode::kBilinear, 2 * x.h(),
                         2 * x.w()));
  ActivateInPlace(y, Activation::kGelu);
  return y;
}

std::size_t R2bParams::ParameterCount() const {
  return conv1.weight.size() + conv1.bias.size() + conv2.weight.size() +
         conv2.bias.size();
}

R2bParams MakeR2b(int channels, int t) {
  return R2bParams{MakeConv(channels, channels, 3),
                   MakeConv(channels, channels, 3), t};
}

Tensor R2bStep(const Tensor& x, const R2bParams& p) {
  Tensor f = Conv2d(x, p.conv1);
  ActivateInPlace(f, Activation::kGelu);
  f = Conv2d(f, p.conv2);
  ActivateInPlace(f, Activation::kGelu);
  AddInPlace(f, x);
  return f;
}

Tensor R2b(const Tensor& x, const R2bParams& p) { return R2b(x, p, p.t); }

Tensor R2b(const Tensor& x, const R2bParams& p, int t) {
  const int width = p.conv1.in_channels();
  if (p.conv1.out_channels() != width || p.conv2.in_channels() != width ||
      p.conv2.out_channels() != width) {
    throw Error(ErrorCode::kInvalidArgument,
                "r2b convolutions must preserve channel count");
  }
  if (t < 0) throw Error(ErrorCode::kInvalidArgument, "r2b: t < 0");
  Tensor out = x;
  for (int i = 0; i < t; ++i) out = R2bStep(out, p);
  return out;
}

}  // namespace cleric
