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

#include "cleric/numerics.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "cleric/error.h"
#include "internal/gemm.h"

namespace cleric {
namespace {

inline int ClampIndex(int i, int n) { return std::clamp(i, 0, n - 1); }

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " +
                                               a.shape().ToString() + " vs " +
                                               b.shape().ToString());
  }
}

}  // namespace

namespace internal {

void PinGemmBlocking() {
  // Fixed cache sizes give a host-independent GEMM blocking.
  static std::once_flag once;
  std::call_once(once, [] {
    Eigen::setCpuCacheSizes(32 * 1024, 256 * 1024, 2 * 1024 * 1024);
  });
}

void Gemm(const float* a, const float* b, float* c, int m, int k, int n) {
  PinGemmBlocking();
  using RowMat =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> ma(a, m, k);
  Eigen::Map<const RowMat> mb(b, k, n);
  Eigen::Map<RowMat> mc(c, m, n);
  mc.noalias() = ma * mb;
}

}  // namespace internal

void ConvSpec::Validate() const {
  if (weight.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "convolution has no weights");
  }
  if (kernel_h() % 2 == 0 || kernel_w() % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel size must be odd, got " + weight.shape().ToString());
  }
  if (stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  }
  if (static_cast<int>(bias.size()) != out_channels()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bias length " + std::to_string(bias.size()) +
                    " != out channels " + std::to_string(out_channels()));
  }
}

ConvSpec MakeConv(int out_ch, int in_ch, int kernel, int stride) {
  ConvSpec spec;
  spec.weight = Tensor(out_ch, in_ch, kernel, kernel);
  spec.bias.assign(out_ch, 0.0f);
  spec.stride = stride;
  return spec;
}

int ConvOutputSize(int input, int stride) {
  return (input + stride - 1) / stride;
}

Tensor Conv2d(const Tensor& x, const ConvSpec& spec) {
  CheckNonEmpty(x, "conv2d");
  spec.Validate();
  if (x.c() != spec.in_channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "conv2d expects " + std::to_string(spec.in_channels()) +
                    " input channels, got " + std::to_string(x.c()));
  }
  const int kh = spec.kernel_h();
  const int kw = spec.kernel_w();
  const int s = spec.stride;
  const int ph = (kh - 1) / 2;
  const int pw = (kw - 1) / 2;
  const int in_h = x.h();
  const int in_w = x.w();
  const int out_h = ConvOutputSize(in_h, s);
  const int out_w = ConvOutputSize(in_w, s);
  const int cin = x.c();
  const int cout = spec.out_channels();
  const int rows = cin * kh * kw;
  const int cols = out_h * out_w;

  Tensor out(x.n(), cout, out_h, out_w);
  const bool direct = kh == 1 && kw == 1 && s == 1;
  std::vector<float> col(direct ? 0 : static_cast<std::size_t>(rows) * cols);

  for (int b = 0; b < x.n(); ++b) {
    const float* src = x.plane(b, 0);
    if (!direct) {
      float* dst = col.data();
      for (int ci = 0; ci < cin; ++ci) {
        const float* in_plane = x.plane(b, ci);
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            for (int oy = 0; oy < out_h; ++oy) {
              const float* in_row =
                  in_plane +
                  static_cast<std::size_t>(ClampIndex(oy * s + ky - ph, in_h)) *
                      in_w;
              for (int ox = 0; ox < out_w; ++ox) {
                *dst++ = in_row[ClampIndex(ox * s + kx - pw, in_w)];
              }
            }
          }
        }
      }
      src = col.data();
    }
    float* dst = out.plane(b, 0);
    internal::Gemm(spec.weight.data(), src, dst, cout, rows, cols);
    for (int co = 0; co < cout; ++co) {
      const float bias = spec.bias[co];
      float* p = dst + static_cast<std::size_t>(co) * cols;
      for (int i = 0; i < cols; ++i) p[i] += bias;
    }
  }
  return out;
}

Tensor PixelShuffle(const Tensor& x, int r) {
  CheckNonEmpty(x, "pixel_shuffle");
  if (r < 1 || x.c() % (r * r) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "pixel_shuffle: channels " + std::to_string(x.c()) +
                    " not divisible by r^2 = " + std::to_string(r * r));
  }
  const int oc = x.c() / (r * r);
  Tensor out(x.n(), oc, x.h() * r, x.w() * r);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < oc; ++c) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
          const float* src = x.plane(b, c * r * r + i * r + j);
          for (int y = 0; y < x.h(); ++y) {
            for (int xx = 0; xx < x.w(); ++xx) {
              out.at(b, c, y * r + i, xx * r + j) = src[y * x.w() + xx];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor PixelUnshuffle(const Tensor& x, int r) {
  CheckNonEmpty(x, "pixel_unshuffle");
  if (r < 1 || x.h() % r != 0 || x.w() % r != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "pixel_unshuffle: spatial dims not divisible by r");
  }
  const int h = x.h() / r;
  const int w = x.w() / r;
  Tensor out(x.n(), x.c() * r * r, h, w);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
          float* dst = out.plane(b, c * r * r + i * r + j);
          for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
              dst[y * w + xx] = x.at(b, c, y * r + i, xx * r + j);
            }
          }
        }
      }
    }
  }
  return out;
}

float Gelu(float v) {
  return 0.5f * v * (1.0f + std::erf(v * 0.70710678118654752440f));
}

float Sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

void ActivateInPlace(Tensor& x, Activation kind) {
  for (float& v : x.values()) {
    v = kind == Activation::kGelu ? Gelu(v) : Sigmoid(v);
  }
}

Tensor Activate(const Tensor& x, Activation kind) {
  Tensor out = x;
  ActivateInPlace(out, kind);
  return out;
}

Tensor Resample(const Tensor& x, ResampleMode mode, int out_h, int out_w) {
  CheckNonEmpty(x, "resample");
  if (mode == ResampleMode::kAvgPool2) {
    if (x.h() % 2 != 0 || x.w() % 2 != 0) {
      throw Error(
          ErrorCode::kInvalidArgument,
          "avgpool2 requires even spatial dims, got " + x.shape().ToString());
    }
    Tensor out(x.n(), x.c(), x.h() / 2, x.w() / 2);
    for (int b = 0; b < x.n(); ++b) {
      for (int c = 0; c < x.c(); ++c) {
        for (int y = 0; y < out.h(); ++y) {
          for (int xx = 0; xx < out.w(); ++xx) {
            const float sum = x.at(b, c, 2 * y, 2 * xx) +
                              x.at(b, c, 2 * y, 2 * xx + 1) +
                              x.at(b, c, 2 * y + 1, 2 * xx) +
                              x.at(b, c, 2 * y + 1, 2 * xx + 1);
            out.at(b, c, y, xx) = 0.25f * sum;
          }
        }
      }
    }
    return out;
  }

  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bilinear: bad output size");
  }
  struct Tap {
    int i0, i1;
    float frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(out);
    const float scale = static_cast<float>(in) / static_cast<float>(out);
    for (int o = 0; o < out; ++o) {
      float src = (static_cast<float>(o) + 0.5f) * scale - 0.5f;
      if (src < 0.0f) src = 0.0f;
      const int i0 = std::min(static_cast<int>(src), in - 1);
      const int i1 = std::min(i0 + 1, in - 1);
      t[o] = {i0, i1, src - static_cast<float>(i0)};
    }
    return t;
  };
  const std::vector<Tap> ty = taps(x.h(), out_h);
  const std::vector<Tap> tx = taps(x.w(), out_w);
  Tensor out(x.n(), x.c(), out_h, out_w);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      const float* p = x.plane(b, c);
      float* dst = out.plane(b, c);
      for (int y = 0; y < out_h; ++y) {
        const float* r0 = p + static_cast<std::size_t>(ty[y].i0) * x.w();
        const float* r1 = p + static_cast<std::size_t>(ty[y].i1) * x.w();
        const float fy = ty[y].frac;
        for (int xx = 0; xx < out_w; ++xx) {
          const Tap& t = tx[xx];
          const float top = r0[t.i0] + t.frac * (r0[t.i1] - r0[t.i0]);
          const float bot = r1[t.i0] + t.frac * (r1[t.i1] - r1[t.i0]);
          dst[y * out_w + xx] = top + fy * (bot - top);
        }
      }
    }
  }
  return out;
}

float BilinearSample(const float* plane, int h, int w, float row, float col) {
  const float fy = std::floor(row);
  const float fx = std::floor(col);
  const float wy = row - fy;
  const float wx = col - fx;
  // Clamped in float before the int cast.
  const int y0 = static_cast<int>(std::clamp(fy, -1.0f, static_cast<float>(h)));
  const int x0 = static_cast<int>(std::clamp(fx, -1.0f, static_cast<float>(w)));
  const int ya = ClampIndex(y0, h);
  const int yb = ClampIndex(y0 + 1, h);
  const int xa = ClampIndex(x0, w);
  const int xb = ClampIndex(x0 + 1, w);
  const float v00 = plane[static_cast<std::size_t>(ya) * w + xa];
  const float v01 = plane[static_cast<std::size_t>(ya) * w + xb];
  const float v10 = plane[static_cast<std::size_t>(yb) * w + xa];
  const float v11 = plane[static_cast<std::size_t>(yb) * w + xb];
  return (1.0f - wy) * ((1.0f - wx) * v00 + wx * v01) +
         wy * ((1.0f - wx) * v10 + wx * v11);
}

std::vector<float> BilinearSample(const Tensor& x, int batch, int channel,
                                  std::span<const SampleCoord> coords) {
  CheckNonEmpty(x, "bilinear_sample");
  if (batch < 0 || batch >= x.n() || channel < 0 || channel >= x.c()) {
    throw Error(ErrorCode::kOutOfRange, "bilinear_sample: bad plane index");
  }
  std::vector<float> out;
  out.reserve(coords.size());
  const float* p = x.plane(batch, channel);
  for (const SampleCoord& c : coords) {
    out.push_back(BilinearSample(p, x.h(), x.w(), c.row, c.col));
  }
  return out;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  AddInPlace(out, b);
  return out;
}

void AddInPlace(Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "add");
  float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

Tensor ConcatChannels(std::span<const Tensor* const> parts) {
  if (parts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "concat: no inputs");
  }
  const Shape& first = parts.front()->shape();
  int channels = 0;
  for (const Tensor* t : parts) {
    const Shape& s = t->shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw Error(ErrorCode::kShapeMismatch,
                  "concat: " + first.ToString() + " vs " + s.ToString());
    }
    channels += s.c;
  }
  Tensor out(first.n, channels, first.h, first.w);
  const std::size_t plane = first.plane();
  for (int b = 0; b < first.n; ++b) {
    float* dst = out.plane(b, 0);
    for (const Tensor* t : parts) {
      const float* src = t->plane(b, 0);
      dst = std::copy(src, src + plane * t->c(), dst);
    }
  }
  return out;
}

Tensor ConcatChannels(const Tensor& a, const Tensor& b) {
  const Tensor* parts[] = {&a, &b};
  return ConcatChannels(parts);
}

Tensor SliceChannels(const Tensor& x, int begin, int count) {
  if (begin < 0 || count < 1 || begin + count > x.c()) {
    throw Error(ErrorCode::kOutOfRange,
                "slice_channels: [" + std::to_string(begin) + ", +" +
                    std::to_string(count) + ") of " + std::to_string(x.c()));
  }
  Tensor out(x.n(), count, x.h(), x.w());
  const std::size_t len = x.shape().plane() * count;
  for (int b = 0; b < x.n(); ++b) {
    const float* src = x.plane(b, begin);
    std::copy(src, src + len, out.plane(b, 0));
  }
  return out;
}

Tensor TransposeSpatial(const Tensor& x) {
  Tensor out(x.n(), x.c(), x.w(), x.h());
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      const float* src = x.plane(b, c);
      float* dst = out.plane(b, c);
      for (int y = 0; y < x.h(); ++y) {
        for (int xx = 0; xx < x.w(); ++xx) {
          dst[static_cast<std::size_t>(xx) * x.h() + y] =
              src[static_cast<std::size_t>(y) * x.w() + xx];
        }
      }
    }
  }
  return out;
}

Tensor PadReplicate(const Tensor& x, int h, int w) {
  if (h < x.h() || w < x.w()) {
    throw Error(ErrorCode::kInvalidArgument, "pad: target smaller than input");
  }
  Tensor out(x.n(), x.c(), h, w);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      const float* src = x.plane(b, c);
      float* dst = out.plane(b, c);
      for (int y = 0; y < h; ++y) {
        const float* row =
            src + static_cast<std::size_t>(std::min(y, x.h() - 1)) * x.w();
        for (int xx = 0; xx < w; ++xx) {
          dst[static_cast<std::size_t>(y) * w + xx] =
              row[std::min(xx, x.w() - 1)];
        }
      }
    }
  }
  return out;
}

Tensor Crop(const Tensor& x, int h, int w) {
  if (h > x.h() || w > x.w() || h < 1 || w < 1) {
    throw Error(ErrorCode::kInvalidArgument, "crop: bad target size");
  }
  Tensor out(x.n(), x.c(), h, w);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      for (int y = 0; y < h; ++y) {
        const float* src = x.plane(b, c) + static_cast<std::size_t>(y) * x.w();
        std::copy(src, src + w,
                  out.plane(b, c) + static_cast<std::size_t>(y) * w);
      }
    }
  }
  return out;
}

void ClampInPlace(Tensor& x, float lo, float hi) {
  for (float& v : x.values()) v = std::clamp(v, lo, hi);
}

}  // namespace cleric
