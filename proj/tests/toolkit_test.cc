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

#include "cleric/toolkit.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cleric/error.h"
#include "oracles.h"
#include "test_util.h"

namespace cleric {
namespace {

using test::RandomTensor;

Tensor Offset(const Tensor& t, float d) {
  Tensor out = t;
  for (float& v : out.values()) v += d;
  return out;
}

using test::ReferenceMsSsim;

TEST(PsnrTest, ClosedForms) {
  const Tensor a(1, 3, 8, 8, 0.5f);
  EXPECT_EQ(Psnr(a, a), kPsnrInfinite);
  EXPECT_NEAR(Psnr(a, Offset(a, 1.0f / 255)), 20 * std::log10(255.0), 1e-3);
  EXPECT_NEAR(Psnr(a, Offset(a, 1.0f / 255)), 48.13, 0.01);
  EXPECT_NEAR(Psnr(a, Offset(a, 10.0f / 255)), 28.13, 0.01);
  EXPECT_THROW(Psnr(a, Tensor(1, 3, 8, 9)), Error);
}

TEST(PsnrTest, DecreasesWithNoiseAmplitude) {
  Rng rng(1);
  const Tensor a = RandomTensor(1, 3, 32, 32, rng, 0.2f, 0.8f);
  double prev = kPsnrInfinite;
  for (int step = 1; step <= 20; ++step) {
    Tensor b = a;
    Rng noise(2);
    const float amp = 0.01f * step;
    for (float& v : b.values()) v += noise.Symmetric(amp);
    const double p = Psnr(a, b);
    EXPECT_LT(p, prev) << step;
    prev = p;
  }
}

TEST(MsSsimTest, IdenticalIsOneAndSymmetric) {
  Rng rng(3);
  const Tensor a = RandomTensor(1, 3, 170, 180, rng);
  EXPECT_EQ(MsSsim(a, a), 1.0);
  Tensor b = a;
  for (float& v : b.values()) v = std::clamp(v + rng.Symmetric(0.1f), 0.f, 1.f);
  EXPECT_EQ(MsSsim(a, b), MsSsim(b, a));
  Tensor tiny = a;
  tiny.data()[100] = tiny.data()[100] > 0.5f ? 0.0f : 1.0f;
  EXPECT_LT(MsSsim(a, tiny), 1.0 - 1e-9);
}

TEST(MsSsimTest, MatchesDirectWindowReference) {
  Rng rng(4);
  for (int pair = 0; pair < 20; ++pair) {
    const int h = 161 + pair % 4 * 7;
    const int w = 161 + pair % 3 * 11;
    const int c = pair % 2 == 0 ? 3 : 1;
    const Tensor a = RandomTensor(1, c, h, w, rng);
    Tensor b = a;
    const float amp = 0.02f + 0.05f * (pair % 5);
    for (float& v : b.values()) {
      v = std::clamp(v + rng.Symmetric(amp), 0.0f, 1.0f);
    }
    const double got = MsSsim(a, b);
    EXPECT_NEAR(got, ReferenceMsSsim(a, b), 1e-6) << "pair " << pair;
    EXPECT_GT(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(MsSsimTest, StructuredImagesStayInRange) {
  Tensor a(1, 3, 200, 200);
  Tensor b(1, 3, 200, 200);
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      for (int c = 0; c < 3; ++c) {
        a.at(0, c, y, x) = ((x / 8 + y / 8) % 2) ? 0.9f : 0.1f;
        b.at(0, c, y, x) = 0.5f + 0.4f * std::sin(0.1f * x + 0.05f * y);
      }
    }
  }
  const double s = MsSsim(a, b);
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, 1.0);
  EXPECT_NEAR(s, ReferenceMsSsim(a, b), 1e-6);
}

TEST(MsSsimTest, RejectsSmallOrMismatched) {
  EXPECT_THROW(MsSsim(Tensor(1, 3, 160, 200), Tensor(1, 3, 160, 200)), Error);
  EXPECT_THROW(MsSsim(Tensor(1, 3, 200, 160), Tensor(1, 3, 200, 160)), Error);
  EXPECT_THROW(MsSsim(Tensor(1, 3, 200, 200), Tensor(1, 3, 200, 201)), Error);
  EXPECT_NO_THROW(MsSsim(Tensor(1, 3, 161, 161), Tensor(1, 3, 161, 161)));
}

TEST(BppTest, Arithmetic) {
  EXPECT_DOUBLE_EQ(Bpp(8192, 512, 512), 0.25);
  EXPECT_DOUBLE_EQ(Bpp(0, 512, 512), 0.0);
  EXPECT_DOUBLE_EQ(Bpp(16384, 512, 512), 2 * Bpp(8192, 512, 512));
  EXPECT_THROW(Bpp(10, 0, 512), Error);
  EXPECT_THROW(Bpp(10, 512, 0), Error);
}

RdCurve Reference() {
  return RdCurve{{{0.10, 30.0, 0.90},
                  {0.22, 33.1, 0.93},
                  {0.41, 35.8, 0.96},
                  {0.83, 39.2, 0.98},
                  {1.40, 41.0, 0.99}}};
}

RdCurve ScaleBpp(RdCurve c, double k) {
  for (RdPoint& p : c.points) p.bpp *= k;
  return c;
}

TEST(BdRateTest, ConstantOffsets) {
  const RdCurve ref = Reference();
  EXPECT_NEAR(BdRate(ref, ref), 0.0, 1e-9);
  EXPECT_NEAR(BdRate(ref, ScaleBpp(ref, 1.10)), 10.0, 0.01);
  EXPECT_NEAR(BdRate(ref, ScaleBpp(ref, 0.769)), -23.1, 0.1);
}

TEST(BdRateTest, Antisymmetry) {
  const RdCurve ref = Reference();
  for (double k : {0.5, 0.769, 0.9, 1.1, 1.7}) {
    const RdCurve test = ScaleBpp(ref, k);
    const double ab = BdRate(ref, test);
    const double ba = BdRate(test, ref);
    EXPECT_NEAR(ab, -ba / (1 + ba / 100), 0.1) << k;
  }
}

TEST(BdRateTest, QualityShiftReducesRate) {
  RdCurve better = Reference();
  for (RdPoint& p : better.points) p.psnr += 0.5;
  EXPECT_LT(BdRate(Reference(), better), 0.0);
}

TEST(BdRateTest, Errors) {
  RdCurve three = Reference();
  three.points.resize(3);
  EXPECT_THROW(BdRate(three, Reference()), Error);
  EXPECT_THROW(BdRate(Reference(), three), Error);
  RdCurve disjoint = Reference();
  for (RdPoint& p : disjoint.points) p.psnr += 50;
  EXPECT_THROW(BdRate(Reference(), disjoint), Error);
  RdCurve unsorted = Reference();
  std::swap(unsorted.points[0], unsorted.points[1]);
  EXPECT_THROW(unsorted.Validate(), Error);
  const RdCurve single{{{0.1, 30, 0.9}}};
  EXPECT_THROW(single.Validate(), Error);
  EXPECT_NO_THROW(three.Validate());
}

TEST(DiffMapTest, Cases) {
  Rng rng(5);
  const Tensor a = RandomTensor(1, 3, 12, 10, rng);
  const Image8 same = DiffMap(a, a);
  EXPECT_EQ(same.width, 10);
  EXPECT_EQ(same.height, 12);
  EXPECT_EQ(same.channels, 1);
  EXPECT_TRUE(std::all_of(same.pixels.begin(), same.pixels.end(),
                          [](std::uint8_t v) { return v == 0; }));

  Tensor b = a;
  b.at(0, 1, 4, 7) += 0.3f;
  const Image8 one = DiffMap(a, b);
  int nonzero = 0;
  for (std::size_t i = 0; i < one.pixels.size(); ++i) {
    if (one.pixels[i] != 0) {
      ++nonzero;
      EXPECT_EQ(one.pixels[i], 255);
      EXPECT_EQ(i, 4u * 10 + 7);
    }
  }
  EXPECT_EQ(nonzero, 1);

  Tensor c = a;
  for (float& v : c.values()) v += rng.Symmetric(0.2f);
  EXPECT_EQ(DiffMap(a, c), DiffMap(c, a));
  EXPECT_THROW(DiffMap(a, Tensor(1, 3, 12, 11)), Error);
}

TEST(CsvTest, Format) {
  const std::string csv = FormatRdCsv(
      {{"level0", {0.25, 31.5, 0.95}}, {"all", {0.5, kPsnrInfinite, 1.0}}});
  EXPECT_EQ(csv,
            "label,bpp,psnr,ms_ssim\n"
            "level0,0.250000,31.500000,0.950000\n"
            "all,0.500000,inf,1.000000\n");
}

}  // namespace
}  // namespace cleric
