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

#include "cleric/entropy.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cleric/error.h"
#include "cleric/rng.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace cleric {
namespace {

using test::RandomTable;
using test::Sample;

CdfTable UniformTable(int n) {
  return QuantizePmf(std::vector<double>(n, 1.0), 0);
}

TEST(CdfTableTest, QuantizedTablesAreValid) {
  Rng rng(40);
  for (int i = 0; i < 200; ++i) {
    const CdfTable t = RandomTable(rng);
    ASSERT_TRUE(t.IsValid());
    EXPECT_EQ(t.cdf.front(), 0u);
    EXPECT_EQ(t.cdf.back(), kCdfTotal);
    for (int s = t.min_symbol; s <= t.max_symbol(); ++s)
      EXPECT_GE(t.Pmf(s), 1u);
  }
}

TEST(CdfTableTest, UniformQuantization) {
  const CdfTable t = UniformTable(4);
  for (int s = 0; s < 4; ++s) EXPECT_EQ(t.Pmf(s), kCdfTotal / 4);
}

TEST(CdfTableTest, TinyProbabilitiesKeepOneCount) {
  const std::vector<double> pmf = {1.0, 1e-30, 1e-30};
  const CdfTable t = QuantizePmf(pmf, -1);
  EXPECT_EQ(t.Pmf(0), 1u);
  EXPECT_EQ(t.Pmf(1), 1u);
  EXPECT_EQ(t.Pmf(-1), kCdfTotal - 2);
}

TEST(CdfTableTest, InvalidInputsRejected) {
  EXPECT_THROW(QuantizePmf(std::vector<double>{}, 0), Error);
  EXPECT_THROW(QuantizePmf(std::vector<double>{0.0, 0.0}, 0), Error);
  EXPECT_THROW(QuantizePmf(std::vector<double>{1.0, -0.5}, 0), Error);
  CdfTable t = UniformTable(3);
  t.cdf[2] = t.cdf[1];
  EXPECT_FALSE(t.IsValid());
  EXPECT_THROW(t.Validate(), Error);
  t = UniformTable(3);
  t.cdf.back() = kCdfTotal - 1;
  EXPECT_FALSE(t.IsValid());
}

TEST(CdfTableTest, ClampToSupport) {
  CdfTable t = UniformTable(5);
  t.min_symbol = -2;
  EXPECT_EQ(t.Clamp(-10), -2);
  EXPECT_EQ(t.Clamp(10), 2);
  EXPECT_EQ(t.Clamp(1), 1);
}

TEST(GaussianTableTest, SymmetricAndTailBounded) {
  for (int i = 0; i < kNumScales; ++i) {
    const CdfTable t = GaussianCdfTable(i);
    ASSERT_TRUE(t.IsValid());
    EXPECT_EQ(t.min_symbol, -t.max_symbol());
    for (int s = 1; s <= t.max_symbol(); ++s) {
      EXPECT_EQ(t.Pmf(s), t.Pmf(-s)) << "index " << i << " symbol " << s;
    }
    const double sigma = ScaleForIndex(i);
    const int support = t.max_symbol();
    const double tail = std::erfc((support + 0.5) / sigma / std::sqrt(2.0));
    EXPECT_LT(tail, std::ldexp(1.0, -20));
  }
  EXPECT_NEAR(ScaleForIndex(0), kScaleMin, 1e-12);
  EXPECT_NEAR(ScaleForIndex(kNumScales - 1), kScaleMax, 1e-9);
}

TEST(GaussianTableTest, CentralMassMatchesErf) {
  for (int i = 0; i < kNumScales; ++i) {
    const double sigma = ScaleForIndex(i);
    const double want = std::erf(0.5 / (sigma * std::sqrt(2.0)));
    const CdfTable t = GaussianCdfTable(i);
    // Quantization to 2^16 counts and the >= 1 floor on tail bins.
    const double slack = (t.num_symbols() + 2.0) / kCdfTotal;
    EXPECT_NEAR(t.Pmf(0) / static_cast<double>(kCdfTotal), want, slack) << i;
  }
  EXPECT_GT(GaussianCdfTable(0).Pmf(0), 0.99 * kCdfTotal);
  EXPECT_THROW(GaussianCdfTable(-1), Error);
  EXPECT_THROW(GaussianCdfTable(kNumScales), Error);
}

TEST(GaussianTableTest, IndexForIsNearestInLogSpace) {
  const ScaleTable& st = ScaleTable::Default();
  for (int i = 0; i < kNumScales; ++i) {
    EXPECT_EQ(st.IndexFor(static_cast<float>(st.scale(i))), i);
  }
  EXPECT_EQ(st.IndexFor(0.0f), 0);
  EXPECT_EQ(st.IndexFor(1e9f), kNumScales - 1);
  for (float s = 0.2f; s < 200; s *= 1.37f) {
    const int i = st.IndexFor(s);
    const double d = std::abs(std::log(s) - std::log(st.scale(i)));
    if (i > 0) EXPECT_LE(d, std::abs(std::log(s) - std::log(st.scale(i - 1))));
    if (i + 1 < kNumScales) {
      EXPECT_LE(d, std::abs(std::log(s) - std::log(st.scale(i + 1))));
    }
  }
}

TEST(RangeCoderTest, MillionRandomizedRoundTrips) {
  Rng rng(41);
  std::size_t total = 0;
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<CdfTable> tables;
    const int ntables = 1 + trial % 8;
    for (int i = 0; i < ntables; ++i) tables.push_back(RandomTable(rng));
    std::vector<std::int32_t> symbols(1000);
    std::vector<const CdfTable*> per(1000);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      per[i] = &tables[static_cast<std::size_t>(rng.Uniform01() * ntables)];
      symbols[i] = Sample(*per[i], rng);
    }
    const auto bytes = EncodeSymbols(symbols, per);
    const auto back = DecodeSymbols(bytes, per);
    ASSERT_EQ(back.size(), symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      mismatches += back[i] != symbols[i];
    }
    total += symbols.size();
  }
  EXPECT_EQ(total, 1000000u);
  EXPECT_EQ(mismatches, 0u);
}

TEST(RangeCoderTest, ExtremeSymbolsRoundTrip) {
  const std::vector<double> pmf = {1.0, 1e-12, 1e-12, 1.0};
  const CdfTable t = QuantizePmf(pmf, 0);
  std::vector<std::int32_t> symbols;
  for (int i = 0; i < 5000; ++i) symbols.push_back(i % 7 == 0 ? 1 + i % 2 : 0);
  std::vector<const CdfTable*> per(symbols.size(), &t);
  EXPECT_EQ(DecodeSymbols(EncodeSymbols(symbols, per), per), symbols);
}

TEST(RangeCoderTest, UniformOverFourCompressesToTwoBitsEach) {
  Rng rng(42);
  const CdfTable t = UniformTable(4);
  std::vector<std::int32_t> symbols(100000);
  for (auto& s : symbols) s = static_cast<std::int32_t>(rng.Next() & 3);
  std::vector<const CdfTable*> per(symbols.size(), &t);
  const auto bytes = EncodeSymbols(symbols, per);
  EXPECT_GE(bytes.size(), 24999u);
  EXPECT_LE(bytes.size(), 25033u);
  EXPECT_EQ(DecodeSymbols(bytes, per), symbols);
}

TEST(RangeCoderTest, WholeScaleTableRoundTripAndOverheadBound) {
  Rng rng(45);
  const ScaleTable& st = ScaleTable::Default();
  std::vector<std::int32_t> symbols;
  std::vector<const CdfTable*> per;
  for (int rep = 0; rep < 200; ++rep) {
    for (int i = 0; i < kNumScales; ++i) {
      per.push_back(&st.table(i));
      symbols.push_back(Sample(st.table(i), rng));
    }
  }
  const auto bytes = EncodeSymbols(symbols, per);
  EXPECT_EQ(DecodeSymbols(bytes, per), symbols);
  EXPECT_LE(static_cast<double>(bytes.size()),
            EstimateRate(symbols, per) / 8 + 32);
}

TEST(RangeCoderTest, EmptyStream) {
  const auto bytes = EncodeSymbols({}, {});
  EXPECT_EQ(bytes.size(), 6u);
  EXPECT_LE(bytes.size(), 8u);
  EXPECT_TRUE(DecodeSymbols(bytes, {}).empty());
}

TEST(RangeCoderTest, SingleSymbolTableCostsNothing) {
  const CdfTable t = QuantizePmf(std::vector<double>{1.0}, 3);
  std::vector<std::int32_t> symbols(10000, 3);
  std::vector<const CdfTable*> per(symbols.size(), &t);
  const auto bytes = EncodeSymbols(symbols, per);
  EXPECT_EQ(bytes.size(), 6u);
  EXPECT_EQ(DecodeSymbols(bytes, per), symbols);
}

TEST(RangeCoderTest, OutOfSupportSymbolIsAnError) {
  const CdfTable t = UniformTable(4);
  const std::vector<std::int32_t> symbols = {4};
  const std::vector<const CdfTable*> per = {&t};
  EXPECT_THROW(EncodeSymbols(symbols, per), Error);
}

TEST(RangeCoderTest, TruncationAndTrailingBytesDetected) {
  Rng rng(43);
  const CdfTable t = UniformTable(16);
  std::vector<std::int32_t> symbols(2000);
  for (auto& s : symbols) s = static_cast<std::int32_t>(rng.Next() & 15);
  std::vector<const CdfTable*> per(symbols.size(), &t);
  auto bytes = EncodeSymbols(symbols, per);
  auto shorter = bytes;
  shorter.resize(bytes.size() / 2);
  try {
    DecodeSymbols(shorter, per);
    FAIL() << "truncated stream decoded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncated);
  }
  bytes.push_back(0);
  try {
    DecodeSymbols(bytes, per);
    FAIL() << "trailing byte accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorrupt);
  }
}

TEST(RateEstimateTest, MatchesActualSizeOnLargePayloads) {
  Rng rng(44);
  const ScaleTable& st = ScaleTable::Default();
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::int32_t> symbols;
    std::vector<const CdfTable*> per;
    const int n = 100000 + trial * 50000;
    for (int i = 0; i < n; ++i) {
      const CdfTable& t =
          trial == 0 ? st.table(0)
                     : st.table(static_cast<int>(rng.Uniform01() * 10 * trial));
      per.push_back(&t);
      symbols.push_back(Sample(t, rng));
    }
    const double estimate = EstimateRate(symbols, per);
    const double actual = 8.0 * EncodeSymbols(symbols, per).size();
    EXPECT_LE(std::abs(actual - estimate), 64 + 0.001 * estimate)
        << "trial " << trial << " actual " << actual << " estimate "
        << estimate;
  }
}

TEST(RateEstimateTest, EstimateIsInformationContent) {
  const CdfTable t = UniformTable(8);
  std::vector<std::int32_t> symbols = {0, 1, 7};
  std::vector<const CdfTable*> per(3, &t);
  EXPECT_DOUBLE_EQ(EstimateRate(symbols, per), 9.0);
  const CdfTable half = UniformTable(2);
  const std::vector<std::int32_t> one = {1};
  const std::vector<const CdfTable*> one_table = {&half};
  EXPECT_DOUBLE_EQ(EstimateRate(one, one_table), 1.0);
  EXPECT_EQ(EstimateRate({}, {}), 0.0);
}

TEST(RdLossTest, Decomposition) {
  const Tensor x(1, 3, 4, 4, 0.5f);
  Tensor y = x;
  for (float& v : y.values()) v += 1.0f / 255;
  const RdReport r = RdLoss(x, y, 32.0, 16.0, 0.01);
  EXPECT_DOUBLE_EQ(r.bpp_y, 2.0);
  EXPECT_DOUBLE_EQ(r.bpp_z, 1.0);
  EXPECT_NEAR(r.mse, 1.0, 1e-4);
  EXPECT_NEAR(r.loss, 3.0 + 0.01 * r.mse, 1e-12);

  const RdReport top_lambda = RdLoss(x, y, 0, 0, 0.0335);
  EXPECT_NEAR(top_lambda.loss, 0.0335, 1e-5);
  EXPECT_EQ(RdLoss(x, x, 0, 0, 0.0335).loss, 0.0);
  EXPECT_DOUBLE_EQ(RdLoss(x, x, 16, 0, 0.0335).loss, 1.0);
  EXPECT_THROW(RdLoss(x, Tensor(1, 3, 4, 5), 0, 0, 0.1), Error);
}

}  // namespace
}  // namespace cleric
