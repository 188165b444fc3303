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

#include "cleric/lifting.h"

#include <algorithm>
#include <string>

#include "cleric/error.h"

namespace cleric {
namespace {

// Lifting is implemented along the height axis; column passes transpose.
enum class Neighbor { kNext, kPrev };

// out[n] = coeff * (src[n] + src[n +/- 1]) with mirrored borders: the
// successor of the last row is itself, the predecessor of row 0 is row 0.
Tensor NeighborSum(const Tensor& src, double coeff, Neighbor which) {
  const int rows = src.h();
  const int w = src.w();
  const float c = static_cast<float>(coeff);
  Tensor out(src.shape());
  for (int b = 0; b < src.n(); ++b) {
    for (int ch = 0; ch < src.c(); ++ch) {
      const float* p = src.plane(b, ch);
      float* o = out.plane(b, ch);
      for (int r = 0; r < rows; ++r) {
        const int nb = which == Neighbor::kNext ? std::min(r + 1, rows - 1)
                                                : std::max(r - 1, 0);
        const float* a = p + static_cast<std::size_t>(r) * w;
        const float* bb = p + static_cast<std::size_t>(nb) * w;
        float* dst = o + static_cast<std::size_t>(r) * w;
        for (int x = 0; x < w; ++x) dst[x] = c * (a[x] + bb[x]);
      }
    }
  }
  return out;
}

Tensor Step(const Tensor& src, double coeff, Neighbor which,
            const RefineOp& refine) {
  return refine.Apply(NeighborSum(src, coeff, which));
}

void SubInPlace(Tensor& a, const Tensor& b) {
  float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] -= pb[i];
}

void ScaleInPlace(Tensor& a, float s) {
  for (float& v : a.values()) v *= s;
}

void CheckPair(const Tensor& a, const Tensor& b, const char* what) {
  CheckNonEmpty(a, what);
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " +
                                               a.shape().ToString() + " vs " +
                                               b.shape().ToString());
  }
}

std::pair<Tensor, Tensor> ForwardRows(Tensor s, Tensor d,
                                      const LiftingStage& stage) {
  const LiftingCoefficients& k = stage.coeffs;
  AddInPlace(d, Step(s, k.alpha, Neighbor::kNext, stage.refine));
  AddInPlace(s, Step(d, k.beta, Neighbor::kPrev, stage.refine));
  AddInPlace(d, Step(s, k.gamma, Neighbor::kNext, stage.refine));
  AddInPlace(s, Step(d, k.delta, Neighbor::kPrev, stage.refine));
  ScaleInPlace(s, static_cast<float>(k.k_scale));
  ScaleInPlace(d, static_cast<float>(1.0 / k.k_scale));
  return {std::move(s), std::move(d)};
}

std::pair<Tensor, Tensor> InverseRows(Tensor s, Tensor d,
                                      const LiftingStage& stage) {
  const LiftingCoefficients& k = stage.coeffs;
  ScaleInPlace(s, static_cast<float>(1.0 / k.k_scale));
  ScaleInPlace(d, static_cast<float>(k.k_scale));
  SubInPlace(s, Step(d, k.delta, Neighbor::kPrev, stage.refine));
  SubInPlace(d, Step(s, k.gamma, Neighbor::kNext, stage.refine));
  SubInPlace(s, Step(d, k.beta, Neighbor::kPrev, stage.refine));
  SubInPlace(d, Step(s, k.alpha, Neighbor::kNext, stage.refine));
  return {std::move(s), std::move(d)};
}

}  // namespace

RefineOp RefineOp::Zero(int channels) {
  return RefineOp{MakeConv(kRefineHidden, channels, 3),
                  MakeConv(channels, kRefineHidden, 3)};
}

Tensor RefineOp::Apply(const Tensor& v) const {
  Tensor hidden = Conv2d(v, conv1);
  ActivateInPlace(hidden, Activation::kGelu);
  Tensor out = Conv2d(hidden, conv2);
  AddInPlace(out, v);
  return out;
}

std::pair<Tensor, Tensor> SplitEvenOdd(const Tensor& x, Axis axis) {
  CheckNonEmpty(x, "split_even_odd");
  if (axis == Axis::kCol) {
    auto [e, o] = SplitEvenOdd(TransposeSpatial(x), Axis::kRow);
    return {TransposeSpatial(e), TransposeSpatial(o)};
  }
  if (x.h() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "split_even_odd: odd length " + std::to_string(x.h()));
  }
  const int half = x.h() / 2;
  const int w = x.w();
  Tensor even(x.n(), x.c(), half, w);
  Tensor odd(x.n(), x.c(), half, w);
  for (int b = 0; b < x.n(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      const float* src = x.plane(b, c);
      for (int r = 0; r < half; ++r) {
        const float* r0 = src + static_cast<std::size_t>(2 * r) * w;
        std::copy(r0, r0 + w,
                  even.plane(b, c) + static_cast<std::size_t>(r) * w);
        std::copy(r0 + w, r0 + 2 * w,
                  odd.plane(b, c) + static_cast<std::size_t>(r) * w);
      }
    }
  }
  return {std::move(even), std::move(odd)};
}

Tensor MergeEvenOdd(const Tensor& even, const Tensor& odd, Axis axis) {
  CheckPair(even, odd, "merge_even_odd");
  if (axis == Axis::kCol) {
    return TransposeSpatial(MergeEvenOdd(TransposeSpatial(even),
                                         TransposeSpatial(odd), Axis::kRow));
  }
  const int half = even.h();
  const int w = even.w();
  Tensor out(even.n(), even.c(), 2 * half, w);
  for (int b = 0; b < even.n(); ++b) {
    for (int c = 0; c < even.c(); ++c) {
      float* dst = out.plane(b, c);
      for (int r = 0; r < half; ++r) {
        const float* e = even.plane(b, c) + static_cast<std::size_t>(r) * w;
        const float* o = odd.plane(b, c) + static_cast<std::size_t>(r) * w;
        std::copy(e, e + w, dst + static_cast<std::size_t>(2 * r) * w);
        std::copy(o, o + w, dst + static_cast<std::size_t>(2 * r + 1) * w);
      }
    }
  }
  return out;
}

std::pair<Tensor, Tensor> LiftForward1d(const Tensor& even, const Tensor& odd,
                                        const LiftingStage& stage, Axis axis) {
  CheckPair(even, odd, "lift_forward_1d");
  if (axis == Axis::kCol) {
    auto [lo, hi] =
        ForwardRows(TransposeSpatial(even), TransposeSpatial(odd), stage);
    return {TransposeSpatial(lo), TransposeSpatial(hi)};
  }
  return ForwardRows(even, odd, stage);
}

std::pair<Tensor, Tensor> LiftInverse1d(const Tensor& low, const Tensor& high,
                                        const LiftingStage& stage, Axis axis) {
  CheckPair(low, high, "lift_inverse_1d");
  if (axis == Axis::kCol) {
    auto [e, o] =
        InverseRows(TransposeSpatial(low), TransposeSpatial(high), stage);
    return {TransposeSpatial(e), TransposeSpatial(o)};
  }
  return InverseRows(low, high, stage);
}

SubbandSet ForwardDwt2d(const Tensor& x, const LiftingStage& stage) {
  CheckNonEmpty(x, "forward_dwt2d");
  if (x.h() % 2 != 0 || x.w() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "forward_dwt2d needs even dims, got " + x.shape().ToString());
  }
  auto [even_rows, odd_rows] = SplitEvenOdd(x, Axis::kRow);
  auto [low, high] = LiftForward1d(even_rows, odd_rows, stage, Axis::kRow);

  // Column passes run directly in transposed space.
  auto column_pass = [&](const Tensor& band) {
    auto [e, o] = SplitEvenOdd(TransposeSpatial(band), Axis::kRow);
    auto [lo, hi] = ForwardRows(std::move(e), std::move(o), stage);
    return std::pair{TransposeSpatial(lo), TransposeSpatial(hi)};
  };
  SubbandSet out;
  std::tie(out.ll, out.lh) = column_pass(low);
  std::tie(out.hl, out.hh) = column_pass(high);
  out.half = Resample(x, ResampleMode::kAvgPool2);
  return out;
}

Tensor InverseDwt2d(const SubbandSet& s, const LiftingStage& stage) {
  CheckNonEmpty(s.ll, "inverse_dwt2d");
  for (const Tensor* t : {&s.lh, &s.hl, &s.hh}) {
    if (t->shape() != s.ll.shape()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "inverse_dwt2d: subband " + t->shape().ToString() + " vs " +
                      s.ll.shape().ToString());
    }
  }
  auto column_inverse = [&](const Tensor& lo, const Tensor& hi) {
    auto [e, o] =
        InverseRows(TransposeSpatial(lo), TransposeSpatial(hi), stage);
    return TransposeSpatial(MergeEvenOdd(e, o, Axis::kRow));
  };
  Tensor low = column_inverse(s.ll, s.lh);
  Tensor high = column_inverse(s.hl, s.hh);
  auto [even_rows, odd_rows] =
      InverseRows(std::move(low), std::move(high), stage);
  return MergeEvenOdd(even_rows, odd_rows, Axis::kRow);
}

}  // namespace cleric
