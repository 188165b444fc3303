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

#ifndef CLERIC_LIFTING_H_
#define CLERIC_LIFTING_H_

#include <utility>

#include "cleric/numerics.h"
#include "cleric/tensor.h"

namespace cleric {

// CDF 9/7 lifting factorization.
struct LiftingCoefficients {
  double alpha = -1.586134342059924;
  double beta = -0.052980118572961;
  double gamma = 0.882911075530934;
  double delta = 0.443506852043971;
  double k_scale = 1.149604398860241;
};

inline constexpr int kRefineHidden = 16;

// Learned correction applied on top of every classical predict and update
// output: v + conv2(gelu(conv1(v))). conv1 is (16, c, 3, 3), conv2 is
// (c, 16, 3, 3). A single instance is shared by all four lifting steps and by
// the row and column passes.
struct RefineOp {
  ConvSpec conv1;
  ConvSpec conv2;

  static RefineOp Zero(int channels = 3);
  int channels() const { return conv1.in_channels(); }
  Tensor Apply(const Tensor& v) const;
};

struct LiftingStage {
  LiftingCoefficients coeffs;
  RefineOp refine = RefineOp::Zero();
};

enum class Axis { kRow, kCol };

// x_LL, x_LH, x_HL, x_HH use (row band, column band) order: `lh` is low-pass
// along rows and high-pass along columns. `half` is the 2x2-mean downsampled
// input. All members share one shape.
struct SubbandSet {
  Tensor ll;
  Tensor lh;
  Tensor hl;
  Tensor hh;
  Tensor half;
};

// Axis kRow splits rows (height), kCol splits columns (width).
std::pair<Tensor, Tensor> SplitEvenOdd(const Tensor& x, Axis axis);
Tensor MergeEvenOdd(const Tensor& even, const Tensor& odd, Axis axis);

// Four refined lifting steps (predict alpha, update beta, predict gamma,
// update delta) with whole-sample symmetric extension at the borders, then
// low *= k_scale, high /= k_scale. Returns (low, high).
std::pair<Tensor, Tensor> LiftForward1d(const Tensor& even, const Tensor& odd,
                                        const LiftingStage& stage,
                                        Axis axis = Axis::kRow);
// Undoes LiftForward1d step by step. Returns (even, odd).
std::pair<Tensor, Tensor> LiftInverse1d(const Tensor& low, const Tensor& high,
                                        const LiftingStage& stage,
                                        Axis axis = Axis::kRow);

SubbandSet ForwardDwt2d(const Tensor& x, const LiftingStage& stage);
// Ignores `half`.
Tensor InverseDwt2d(const SubbandSet& s, const LiftingStage& stage);

}  // namespace cleric

#endif  // CLERIC_LIFTING_H_
