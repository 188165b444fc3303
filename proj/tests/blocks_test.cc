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

#include <cmath>

#include "cleric/error.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace cleric {
namespace {

using test::GeluOracle;
using test::MaxAbsDiff;
using test::NaiveConv2d;
using test::RandomConv;
using test::RandomTensor;

using test::NaiveDcn;
using test::SampleOracle;

Tensor GeluOracleTensor(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.values()) v = static_cast<float>(GeluOracle(v));
  return y;
}

void RandomizeDcn(DcnParams& p, Rng& rng, float offset_scale) {
  p.kernel = RandomConv(p.kernel.out_channels(), p.kernel.in_channels(), 3,
                        p.kernel.stride, rng);
  for (float& v : p.offset_net.weight.values()) v = rng.Symmetric(offset_scale);
  for (float& v : p.offset_net.bias) v = rng.Symmetric(offset_scale);
}

TEST(Dcnv2Test, ZeroOffsetsUnitModulationEqualsConv2d) {
  Rng rng(20);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int in = 1 + trial % 4;
    const int out = 1 + (trial * 3) % 5;
    const int stride = 1 + trial % 2;
    const int h = 4 + trial % 9;
    const int w = 4 + (trial * 7) % 9;
    const Tensor x = RandomTensor(1, in, h, w, rng, -1, 1);
    const ConvSpec k = RandomConv(out, in, 3, stride, rng);
    const int oh = ConvOutputSize(h, stride);
    const int ow = ConvOutputSize(w, stride);
    const Tensor y =
        Dcnv2(x, k, Tensor(1, 18, oh, ow, 0.0f), Tensor(1, 9, oh, ow, 1.0f));
    worst = std::max(worst, MaxAbsDiff(y, Conv2d(x, k)));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Dcnv2Test, ZeroModulationGivesBias) {
  Rng rng(21);
  const Tensor x = RandomTensor(1, 3, 6, 6, rng);
  const ConvSpec k = RandomConv(4, 3, 3, 1, rng);
  const Tensor y =
      Dcnv2(x, k, RandomTensor(1, 18, 6, 6, rng, -2, 2), Tensor(1, 9, 6, 6));
  for (int o = 0; o < 4; ++o) {
    for (int i = 0; i < 36; ++i) EXPECT_EQ(y.plane(0, o)[i], k.bias[o]);
  }
}

TEST(Dcnv2Test, UnitColumnOffsetEqualsShiftedInputConv) {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = RandomTensor(1, 2, 7, 9, rng, -1, 1);
    const ConvSpec k = RandomConv(3, 2, 3, 1, rng);
    Tensor off(1, 18, 7, 9, 0.0f);
    for (int tap = 0; tap < 9; ++tap) {
      float* p = off.plane(0, 2 * tap + 1);
      std::fill(p, p + 63, 1.0f);
    }
    const Tensor y = Dcnv2(x, k, off, Tensor(1, 9, 7, 9, 1.0f));
    EXPECT_LT(MaxAbsDiff(y, NaiveConv2d(x, k, 1)), 1e-5);
  }
}

TEST(Dcnv2Test, MatchesNaiveOracleWithFractionalOffsets) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int stride = 1 + trial % 2;
    const Tensor x = RandomTensor(1, 3, 8, 10, rng, -1, 1);
    const ConvSpec k = RandomConv(2, 3, 3, stride, rng);
    const int oh = ConvOutputSize(8, stride);
    const int ow = ConvOutputSize(10, stride);
    const Tensor off = RandomTensor(1, 18, oh, ow, rng, -3, 3);
    const Tensor mod = RandomTensor(1, 9, oh, ow, rng);
    EXPECT_LT(MaxAbsDiff(Dcnv2(x, k, off, mod), NaiveDcn(x, k, off, mod)),
              1e-5);
  }
}

TEST(Dcnv2Test, LinearInSingleTapModulation) {
  Rng rng(24);
  const Tensor x = RandomTensor(1, 2, 6, 6, rng);
  ConvSpec k = RandomConv(2, 2, 3, 1, rng);
  std::fill(k.bias.begin(), k.bias.end(), 0.0f);
  const Tensor off = RandomTensor(1, 18, 6, 6, rng, -1, 1);
  Tensor mod(1, 9, 6, 6, 0.0f);
  std::fill(mod.plane(0, 4), mod.plane(0, 4) + 36, 1.0f);
  const Tensor unit = Dcnv2(x, k, off, mod);
  std::fill(mod.plane(0, 4), mod.plane(0, 4) + 36, 0.375f);
  const Tensor scaled = Dcnv2(x, k, off, mod);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    EXPECT_NEAR(scaled.data()[i], 0.375f * unit.data()[i], 1e-6);
  }
}

TEST(Dcnv2Test, RejectsMismatchedOffsets) {
  const ConvSpec k = MakeConv(1, 1, 3, 1);
  EXPECT_THROW(
      Dcnv2(Tensor(1, 1, 4, 4), k, Tensor(1, 17, 4, 4), Tensor(1, 9, 4, 4)),
      Error);
  EXPECT_THROW(
      Dcnv2(Tensor(1, 2, 4, 4), k, Tensor(1, 18, 4, 4), Tensor(1, 9, 4, 4)),
      Error);
}

TEST(PredictOffsetsTest, ZeroNetGivesZeroOffsetsHalfModulation) {
  Rng rng(25);
  const DcnParams p = MakeDcn(4, 3, 1);
  EXPECT_EQ(p.offset_net.out_channels(), 27);
  const OffsetField f = PredictOffsets(RandomTensor(1, 3, 5, 5, rng), p);
  for (float v : f.offsets.values()) EXPECT_EQ(v, 0.0f);
  for (float v : f.modulation.values()) EXPECT_EQ(v, 0.5f);
}

TEST(PredictOffsetsTest, SaturatedLogitsAndRange) {
  Rng rng(26);
  DcnParams p = MakeDcn(4, 3, 2);
  for (int k = 18; k < 27; ++k) p.offset_net.bias[k] = 20.0f;
  OffsetField f = PredictOffsets(RandomTensor(1, 3, 8, 8, rng), p);
  EXPECT_EQ(f.modulation.shape(), (Shape{1, 9, 4, 4}));
  for (float v : f.modulation.values()) EXPECT_NEAR(v, 1.0f, 1e-6);

  RandomizeDcn(p, rng, 3.0f);
  f = PredictOffsets(RandomTensor(1, 3, 8, 8, rng), p);
  for (float v : f.modulation.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(DrbsTest, ShapeContract) {
  Rng rng(27);
  const DrbsParams p = MakeDrbs(6, 192);
  const Tensor y = Drbs(RandomTensor(1, 6, 128, 128, rng), p);
  EXPECT_EQ(y.shape(), (Shape{1, 192, 64, 64}));
  EXPECT_THROW(Drbs(Tensor(1, 6, 9, 8), p), Error);
}

TEST(DrbsTest, ZeroMainPathIsGeluOfShortcut) {
  Rng rng(28);
  DrbsParams p = MakeDrbs(3, 5);
  p.skip = RandomConv(5, 3, 1, 2, rng);
  const Tensor x = RandomTensor(1, 3, 10, 12, rng, -1, 1);
  EXPECT_LT(MaxAbsDiff(Drbs(x, p), GeluOracleTensor(Conv2d(x, p.skip))), 1e-6);
}

TEST(DrbsTest, MatchesCompositionalOracle) {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    DrbsParams p = MakeDrbs(3, 4);
    RandomizeDcn(p.main, rng, 0.3f);
    p.skip = RandomConv(4, 3, 1, 2, rng);
    const Tensor x = RandomTensor(1, 3, 8, 10, rng, -1, 1);
    const OffsetField f = PredictOffsets(x, p.main);
    Tensor sum = NaiveDcn(x, p.main.kernel, f.offsets, f.modulation);
    const Tensor skip = NaiveConv2d(x, p.skip);
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum.data()[i] += skip.data()[i];
    }
    EXPECT_LT(MaxAbsDiff(Drbs(x, p), GeluOracleTensor(sum)), 1e-5);
  }
}

TEST(DrbsTest, RegularGridModeUsesPlainConv) {
  Rng rng(30);
  DrbsParams p = MakeDrbs(3, 4);
  RandomizeDcn(p.main, rng, 0.5f);
  p.skip = RandomConv(4, 3, 1, 2, rng);
  const Tensor x = RandomTensor(1, 3, 8, 8, rng);
  Tensor want = Conv2d(x, p.main.kernel);
  AddInPlace(want, Conv2d(x, p.skip));
  EXPECT_LT(MaxAbsDiff(Drbs(x, p, false), GeluOracleTensor(want)), 1e-6);
}

TEST(DrbuTest, ShapeContract) {
  Rng rng(31);
  const DrbuParams p = MakeDrbu(320, 192);
  const Tensor y = Drbu(RandomTensor(1, 320, 16, 16, rng), p);
  EXPECT_EQ(y.shape(), (Shape{1, 192, 32, 32}));
}

TEST(DrbuTest, ZeroMainPathIsGeluOfUpsampledShortcut) {
  Rng rng(32);
  DrbuParams p = MakeDrbu(3, 2);
  p.skip = RandomConv(2, 3, 1, 1, rng);
  const Tensor x = RandomTensor(1, 3, 5, 6, rng, -1, 1);
  const Tensor up =
      Resample(Conv2d(x, p.skip), ResampleMode::kBilinear, 10, 12);
  EXPECT_LT(MaxAbsDiff(Drbu(x, p), GeluOracleTensor(up)), 1e-6);
}

TEST(DrbuTest, ConstantInputGivesConstantOutput) {
  Rng rng(33);
  DrbuParams p = MakeDrbu(3, 2);
  p.main.kernel = RandomConv(8, 3, 3, 1, rng);
  for (int k = 18; k < 27; ++k) p.main.offset_net.bias[k] = 30.0f;
  p.skip = RandomConv(2, 3, 1, 1, rng);
  Tensor x(1, 3, 6, 6);
  for (int c = 0; c < 3; ++c) {
    std::fill(x.plane(0, c), x.plane(0, c) + 36, 0.2f * (c + 1));
  }
  const Tensor y = Drbu(x, p);
  // Each output channel holds four pixel-shuffle phases with distinct
  // kernels, so constancy holds per phase.
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const float ref = y.at(0, c, i, j);
        for (int yy = i; yy < 12; yy += 2) {
          for (int xx = j; xx < 12; xx += 2) {
            EXPECT_NEAR(y.at(0, c, yy, xx), ref, 1e-6);
          }
        }
      }
    }
  }
}

TEST(BlocksTest, ShapeContractsOverEvenSizes) {
  const DrbsParams s = MakeDrbs(2, 3);
  const DrbuParams u = MakeDrbu(2, 3);
  for (int size = 8; size <= 256; size += 8) {
    const Tensor x(1, 2, size, size + 2, 0.5f);
    EXPECT_EQ(Drbs(x, s).shape(), (Shape{1, 3, size / 2, size / 2 + 1}));
    EXPECT_EQ(Drbu(x, u).shape(), (Shape{1, 3, size * 2, size * 2 + 4}));
  }
}

TEST(R2bTest, ZeroRecursionsIsIdentity) {
  Rng rng(34);
  R2bParams p = MakeR2b(4, 0);
  p.conv1 = RandomConv(4, 4, 3, 1, rng);
  p.conv2 = RandomConv(4, 4, 3, 1, rng);
  const Tensor x = RandomTensor(1, 4, 6, 6, rng, -3, 3);
  EXPECT_EQ(R2b(x, p), x);
}

TEST(R2bTest, ZeroWeightsAreIdentityForAnyDepth) {
  Rng rng(35);
  const Tensor x = RandomTensor(1, 3, 5, 5, rng, -3, 3);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(R2b(x, MakeR2b(3, t)), x);
}

TEST(R2bTest, ScalarErfGeluOracle) {
  R2bParams p = MakeR2b(1, 1);
  p.conv1 = MakeConv(1, 1, 1, 1);
  p.conv2 = MakeConv(1, 1, 1, 1);
  p.conv1.weight.data()[0] = 1.0f;
  p.conv2.weight.data()[0] = 1.0f;
  const double want = 1.0 + GeluOracle(GeluOracle(1.0));
  EXPECT_NEAR(want, 1.6730, 1e-4);
  const Tensor y = R2b(Tensor(1, 1, 1, 1, 1.0f), p);
  EXPECT_NEAR(y.data()[0], want, 1e-6);
}

TEST(R2bTest, WeightsAreSharedAcrossRecursions) {
  Rng rng(36);
  R2bParams p = MakeR2b(3, 2);
  p.conv1 = RandomConv(3, 3, 3, 1, rng);
  p.conv2 = RandomConv(3, 3, 3, 1, rng);
  const std::size_t count = p.ParameterCount();
  EXPECT_EQ(count, 2u * (3 * 3 * 9 + 3));
  const Tensor x = RandomTensor(1, 3, 6, 6, rng);
  for (int t = 0; t < 4; ++t) {
    p.t = t;
    EXPECT_EQ(p.ParameterCount(), count);
    EXPECT_EQ(R2b(x, p, t + 1), R2bStep(R2b(x, p, t), p));
  }
}

TEST(R2bTest, RejectsWidthChange) {
  R2bParams p = MakeR2b(3, 1);
  p.conv2 = MakeConv(4, 3, 3, 1);
  EXPECT_THROW(R2b(Tensor(1, 3, 4, 4), p), Error);
  EXPECT_THROW(R2b(Tensor(1, 3, 4, 4), MakeR2b(3, 1), -1), Error);
}

}  // namespace
}  // namespace cleric
