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
#include <numeric>
#include <string>

#include "cleric/error.h"

namespace cleric {
namespace {

// 48-bit range, renormalized a byte at a time below 2^40.
constexpr std::uint64_t kTopValue = 1ull << 40;
constexpr int kRangeBytes = 6;
constexpr std::uint64_t kLowMask = (1ull << 48) - 1;

// Upper tail of the standard normal, computed without cancellation.
double UpperTail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::uint64_t CountsAtScale(std::span<const double> pmf, double scale,
                            std::vector<std::uint32_t>* out) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double v = std::max(1.0, std::round(pmf[i] * scale));
    const auto c = static_cast<std::uint32_t>(std::min(v, 4294967295.0));
    if (out) (*out)[i] = c;
    sum += c;
  }
  return sum;
}

void CheckTables(std::size_t symbols, std::size_t tables) {
  if (symbols != tables) {
    throw Error(ErrorCode::kInvalidArgument,
                std::to_string(symbols) + " symbols but " +
                    std::to_string(tables) + " tables");
  }
}

}  // namespace

std::int32_t CdfTable::Clamp(std::int32_t s) const {
  return std::clamp(s, min_symbol, max_symbol());
}

bool CdfTable::IsValid() const {
  if (cdf.size() < 2 || cdf.front() != 0 || cdf.back() != kCdfTotal) {
    return false;
  }
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i] <= cdf[i - 1]) return false;
  }
  return true;
}

void CdfTable::Validate() const {
  if (!IsValid()) {
    throw Error(ErrorCode::kCorrupt,
                "cdf table over [" + std::to_string(min_symbol) + ", " +
                    std::to_string(max_symbol()) +
                    "] is not a strictly increasing 0..2^16 cdf");
  }
}

CdfTable QuantizePmf(std::span<const double> pmf, std::int32_t min_symbol) {
  if (pmf.empty() || pmf.size() > kCdfTotal) {
    throw Error(ErrorCode::kInvalidArgument, "pmf size out of range");
  }
  double total = 0;
  for (double p : pmf) {
    if (!(p >= 0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "pmf entries must be >= 0");
    }
    total += p;
  }
  if (total <= 0) throw Error(ErrorCode::kInvalidArgument, "pmf sums to 0");
  std::vector<double> norm(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) norm[i] = pmf[i] / total;

  // Largest scale whose rounded counts (floored at 1) still fit in 2^16; the
  // remainder goes to the largest bin.
  double lo = 0.0;
  double hi = static_cast<double>(kCdfTotal);
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (CountsAtScale(norm, mid, nullptr) <= kCdfTotal) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::vector<std::uint32_t> counts(norm.size());
  const std::uint64_t sum = CountsAtScale(norm, lo, &counts);
  if (sum > kCdfTotal) {
    throw Error(ErrorCode::kInvalidArgument, "pmf has too many symbols");
  }
  // Ties go to the bin nearest the middle.
  const std::size_t mid = (counts.size() - 1) / 2;
  std::size_t largest = mid;
  for (std::size_t d = 1; d <= mid + 1; ++d) {
    for (const std::size_t i : {mid - std::min(d, mid), mid + d}) {
      if (i < counts.size() && counts[i] > counts[largest]) largest = i;
    }
  }
  counts[largest] += static_cast<std::uint32_t>(kCdfTotal - sum);

  CdfTable t;
  t.min_symbol = min_symbol;
  t.cdf.resize(counts.size() + 1);
  t.cdf[0] = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    t.cdf[i + 1] = t.cdf[i] + counts[i];
  }
  return t;
}

double ScaleForIndex(int index) {
  if (index < 0 || index >= kNumScales) {
    throw Error(ErrorCode::kOutOfRange,
                "sigma index " + std::to_string(index) + " not in [0, 63]");
  }
  const double lmin = std::log(kScaleMin);
  const double lmax = std::log(kScaleMax);
  return std::exp(lmin + (lmax - lmin) * index / (kNumScales - 1));
}

CdfTable GaussianCdfTable(int sigma_index) {
  const double sigma = ScaleForIndex(sigma_index);
  constexpr double kTail = 1.0 / (1 << 20);
  int support = 0;
  while (2.0 * UpperTail((support + 0.5) / sigma) >= kTail) ++support;

  // Mass of bin k >= 0, mirrored so pmf(k) == pmf(-k) exactly.
  std::vector<double> half(support + 1);
  half[0] = 1.0 - 2.0 * UpperTail(0.5 / sigma);
  for (int k = 1; k <= support; ++k) {
    half[k] = UpperTail((k - 0.5) / sigma) - UpperTail((k + 0.5) / sigma);
  }
  std::vector<double> pmf(2 * support + 1);
  for (int k = -support; k <= support; ++k) {
    pmf[k + support] = half[std::abs(k)];
  }
  return QuantizePmf(pmf, -support);
}

const ScaleTable& ScaleTable::Default() {
  static const ScaleTable table;
  return table;
}

ScaleTable::ScaleTable() {
  tables_.reserve(kNumScales);
  for (int i = 0; i < kNumScales; ++i) {
    scales_[i] = ScaleForIndex(i);
    tables_.push_back(GaussianCdfTable(i));
  }
}

int ScaleTable::IndexFor(float sigma) const {
  const double s = std::clamp(static_cast<double>(sigma), kScaleMin, kScaleMax);
  const double lmin = std::log(kScaleMin);
  const double lmax = std::log(kScaleMax);
  const double pos = (std::log(s) - lmin) / (lmax - lmin) * (kNumScales - 1);
  return std::clamp(static_cast<int>(std::lround(pos)), 0, kNumScales - 1);
}

void RangeEncoder::Encode(const CdfTable& table, std::int32_t symbol) {
  if (!table.Contains(symbol)) {
    throw Error(ErrorCode::kOutOfRange,
                "symbol " + std::to_string(symbol) + " outside support [" +
                    std::to_string(table.min_symbol) + ", " +
                    std::to_string(table.max_symbol()) + "]");
  }
  const std::size_t i = static_cast<std::size_t>(symbol - table.min_symbol);
  const std::uint32_t start = table.cdf[i];
  const std::uint32_t freq = table.cdf[i + 1] - start;
  const std::uint64_t r = range_ >> kCdfPrecisionBits;
  low_ += r * start;
  range_ = r * freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::ShiftLow() {
  if ((low_ & kLowMask) < 0xFF0000000000ull || (low_ >> 48) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 48);
    std::uint8_t temp = cache_;
    do {
      if (first_byte_) {
        first_byte_ = false;
      } else {
        out_.push_back(static_cast<std::uint8_t>(temp + carry));
      }
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 40);
  }
  ++cache_size_;
  low_ = (low_ & 0xFFFFFFFFFFull) << 8;
}

std::vector<std::uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i <= kRangeBytes; ++i) ShiftLow();
  std::vector<std::uint8_t> out = std::move(out_);
  *this = RangeEncoder();
  return out;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes)
    : bytes_(bytes) {
  for (int i = 0; i < kRangeBytes; ++i) code_ = (code_ << 8) | NextByte();
}

std::uint8_t RangeDecoder::NextByte() {
  if (pos_ >= bytes_.size()) {
    throw Error(ErrorCode::kTruncated, "range coder stream ended early");
  }
  return bytes_[pos_++];
}

std::int32_t RangeDecoder::Decode(const CdfTable& table) {
  const std::uint64_t r = range_ >> kCdfPrecisionBits;
  const std::uint64_t value = code_ / r;
  if (value >= kCdfTotal) {
    throw Error(ErrorCode::kCorrupt, "range coder value out of range");
  }
  // Last index i with cdf[i] <= value.
  const auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(),
                                   static_cast<std::uint32_t>(value));
  const std::size_t i = static_cast<std::size_t>(it - table.cdf.begin()) - 1;
  const std::uint32_t start = table.cdf[i];
  const std::uint32_t freq = table.cdf[i + 1] - start;
  code_ -= r * start;
  range_ = r * freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
  return table.min_symbol + static_cast<std::int32_t>(i);
}

std::vector<std::uint8_t> EncodeSymbols(
    std::span<const std::int32_t> symbols,
    std::span<const CdfTable* const> tables) {
  CheckTables(symbols.size(), tables.size());
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    enc.Encode(*tables[i], symbols[i]);
  }
  return enc.Finish();
}

std::vector<std::int32_t> DecodeSymbols(
    std::span<const std::uint8_t> bytes,
    std::span<const CdfTable* const> tables) {
  RangeDecoder dec(bytes);
  std::vector<std::int32_t> out;
  out.reserve(tables.size());
  for (const CdfTable* t : tables) out.push_back(dec.Decode(*t));
  if (!dec.AtEnd()) {
    throw Error(ErrorCode::kCorrupt, "trailing bytes after range coder stream");
  }
  return out;
}

double EstimateRate(std::span<const std::int32_t> symbols,
                    std::span<const CdfTable* const> tables) {
  CheckTables(symbols.size(), tables.size());
  double bits = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (!tables[i]->Contains(symbols[i])) {
      throw Error(ErrorCode::kOutOfRange,
                  "symbol " + std::to_string(symbols[i]) + " outside support");
    }
    bits -=
        std::log2(static_cast<double>(tables[i]->Pmf(symbols[i])) / kCdfTotal);
  }
  return bits;
}

RdReport RdLoss(const Tensor& x, const Tensor& x_hat, double bits_y,
                double bits_z, double lambda) {
  if (x.shape() != x_hat.shape()) {
    throw Error(
        ErrorCode::kShapeMismatch,
        "rd_loss: " + x.shape().ToString() + " vs " + x_hat.shape().ToString());
  }
  CheckNonEmpty(x, "rd_loss");
  double se = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d =
        255.0 * (static_cast<double>(x.data()[i]) - x_hat.data()[i]);
    se += d * d;
  }
  const double pixels = static_cast<double>(x.n()) * x.h() * x.w();
  RdReport r;
  r.bits_y = bits_y;
  r.bits_z = bits_z;
  r.bpp_y = bits_y / pixels;
  r.bpp_z = bits_z / pixels;
  r.mse = se / static_cast<double>(x.size());
  r.lambda = lambda;
  r.loss = r.bpp_y + r.bpp_z + lambda * r.mse;
  return r;
}

}  // namespace cleric
