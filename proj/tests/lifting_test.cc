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

#include <array>
#include <vector>

#include "cleric/error.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace cleric {
namespace {

using test::MaxAbsDiff;
using test::RandomConv;
using test::RandomTensor;

using test::FirDwt2d;
using test::kHighTaps;
using test::kLowTaps;

void ExpectMatchesFir(const Tensor& x) {
  LiftingStage stage;
  stage.refine = RefineOp::Zero(x.c());
  const SubbandSet s = ForwardDwt2d(x, stage);
  const std::array<Tensor, 4> want = FirDwt2d(x);
  EXPECT_LT(MaxAbsDiff(s.ll, want[0]), 1e-5);
  EXPECT_LT(MaxAbsDiff(s.lh, want[1]), 1e-5);
  EXPECT_LT(MaxAbsDiff(s.hl, want[2]), 1e-5);
  EXPECT_LT(MaxAbsDiff(s.hh, want[3]), 1e-5);
}

LiftingStage RandomStage(Rng& rng) {
  LiftingStage s;
  s.refine.conv1 = RandomConv(kRefineHidden, 3, 3, 1, rng);
  s.refine.conv2 = RandomConv(3, kRefineHidden, 3, 1, rng);
  return s;
}

TEST(LiftingTest, FirOracleTapsHaveUnitDcGain) {
  double low = kLowTaps[0];
  for (int k = 1; k < 5; ++k) low += 2 * kLowTaps[k];
  double high = kHighTaps[0];
  for (int k = 1; k < 4; ++k) high += 2 * kHighTaps[k];
  EXPECT_NEAR(low, std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(high, 0.0, 1e-9);
}

TEST(LiftingTest, ZeroRefineMatchesFirOnImpulses) {
  for (int pos : {0, 1, 7, 14, 15}) {
    Tensor x(1, 1, 16, 16, 0.0f);
    x.at(0, 0, pos, (pos * 3) % 16) = 1.0f;
    LiftingStage stage;
    stage.refine = RefineOp::Zero(1);
    const SubbandSet s = ForwardDwt2d(x, stage);
    const std::array<Tensor, 4> want = FirDwt2d(x);
    EXPECT_LT(MaxAbsDiff(s.ll, want[0]), 1e-5) << pos;
    EXPECT_LT(MaxAbsDiff(s.lh, want[1]), 1e-5) << pos;
    EXPECT_LT(MaxAbsDiff(s.hl, want[2]), 1e-5) << pos;
    EXPECT_LT(MaxAbsDiff(s.hh, want[3]), 1e-5) << pos;
  }
}

TEST(LiftingTest, ConstantInputHasOnlyLowBand) {
  const Tensor x(1, 3, 8, 12, 0.6f);
  const SubbandSet s = ForwardDwt2d(x, LiftingStage{});
  // Two low-pass passes at sqrt(2) DC gain each.
  for (float v : s.ll.values()) EXPECT_NEAR(v, 1.2f, 1e-5);
  for (const Tensor* t : {&s.lh, &s.hl, &s.hh}) {
    for (float v : t->values()) EXPECT_NEAR(v, 0.0f, 1e-5);
  }
}

TEST(LiftingTest, ZeroRefineMatchesFirOnConstantsAndRandomImages) {
  ExpectMatchesFir(Tensor(1, 1, 8, 8, 0.3f));
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    Tensor x = RandomTensor(1, 3, 16 + 2 * (i % 4), 24, rng);
    for (int c = 0; c < 3; ++c) {
      ExpectMatchesFir(SliceChannels(x, c, 1));
    }
  }
}

TEST(LiftingTest, HalfIsAveragePool) {
  Rng rng(8);
  const Tensor x = RandomTensor(1, 3, 8, 8, rng);
  const SubbandSet s = ForwardDwt2d(x, LiftingStage{});
  EXPECT_EQ(s.half, Resample(x, ResampleMode::kAvgPool2));
  EXPECT_EQ(s.half.shape(), s.ll.shape());
}

TEST(LiftingTest, PerfectReconstructionWithRandomRefinement) {
  Rng rng(9);
  double worst = 0;
  for (int draw = 0; draw < 3; ++draw) {
    const LiftingStage stage = RandomStage(rng);
    for (int i = 0; i < 5; ++i) {
      const Tensor x = RandomTensor(1, 3, 32, 32, rng);
      const Tensor y = InverseDwt2d(ForwardDwt2d(x, stage), stage);
      worst = std::max(worst, MaxAbsDiff(x, y));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(LiftingTest, RefinementChangesSubbands) {
  Rng rng(10);
  const Tensor x = RandomTensor(1, 3, 16, 16, rng);
  const SubbandSet plain = ForwardDwt2d(x, LiftingStage{});
  const SubbandSet refined = ForwardDwt2d(x, RandomStage(rng));
  EXPECT_GT(MaxAbsDiff(plain.hh, refined.hh), 1e-3);
}

TEST(LiftingTest, OneDimensionalInverse) {
  Rng rng(11);
  const LiftingStage stage = RandomStage(rng);
  const Tensor x = RandomTensor(1, 3, 10, 6, rng);
  for (Axis axis : {Axis::kRow, Axis::kCol}) {
    const Tensor v = axis == Axis::kRow ? x : TransposeSpatial(x);
    auto [e, o] = SplitEvenOdd(v, axis);
    auto [lo, hi] = LiftForward1d(e, o, stage, axis);
    auto [e2, o2] = LiftInverse1d(lo, hi, stage, axis);
    EXPECT_LT(MaxAbsDiff(MergeEvenOdd(e2, o2, axis), v), 1e-5);
  }
}

TEST(LiftingTest, SplitMergeRoundTrip) {
  Rng rng(12);
  const Tensor x = RandomTensor(2, 2, 6, 8, rng);
  for (Axis axis : {Axis::kRow, Axis::kCol}) {
    auto [e, o] = SplitEvenOdd(x, axis);
    EXPECT_EQ(MergeEvenOdd(e, o, axis), x);
  }
  auto [e, o] = SplitEvenOdd(x, Axis::kRow);
  EXPECT_EQ(e.at(1, 1, 2, 5), x.at(1, 1, 4, 5));
  EXPECT_EQ(o.at(1, 1, 2, 5), x.at(1, 1, 5, 5));
}

TEST(LiftingTest, RejectsOddDimensions) {
  EXPECT_THROW(ForwardDwt2d(Tensor(1, 3, 7, 8), LiftingStage{}), Error);
  EXPECT_THROW(ForwardDwt2d(Tensor(1, 3, 8, 9), LiftingStage{}), Error);
}

TEST(LiftingTest, InverseRejectsMismatchedSubbands) {
  SubbandSet s;
  s.ll = s.lh = s.hl = Tensor(1, 3, 4, 4);
  s.hh = Tensor(1, 3, 4, 5);
  EXPECT_THROW(InverseDwt2d(s, LiftingStage{}), Error);
}

}  // namespace
}  // namespace cleric
