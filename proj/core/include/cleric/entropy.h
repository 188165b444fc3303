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

#ifndef CLERIC_ENTROPY_H_
#define CLERIC_ENTROPY_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cleric/tensor.h"

namespace cleric {

inline constexpr int kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

// Quantized cumulative distribution over the contiguous support
// [min_symbol, min_symbol + cdf.size() - 2]. cdf[0] == 0, cdf.back() == 2^16
// and every in-support symbol has mass >= 1.
struct CdfTable {
  std::int32_t min_symbol = 0;
  std::vector<std::uint32_t> cdf;

  int num_symbols() const { return static_cast<int>(cdf.size()) - 1; }
  std::int32_t max_symbol() const { return min_symbol + num_symbols() - 1; }
  bool Contains(std::int32_t s) const {
    return s >= min_symbol && s <= max_symbol();
  }
  std::uint32_t Pmf(std::int32_t s) const {
    const std::size_t i = static_cast<std::size_t>(s - min_symbol);
    return cdf[i + 1] - cdf[i];
  }
  std::int32_t Clamp(std::int32_t s) const;

  bool IsValid() const;
  // Throws kCorrupt when IsValid() is false.
  void Validate() const;

  bool operator==(const CdfTable&) const = default;
};

// Quantizes a probability vector (need not be normalized) to 2^16 counts with
// every bin >= 1.
CdfTable QuantizePmf(std::span<const double> pmf, std::int32_t min_symbol);

inline constexpr int kNumScales = 64;
inline constexpr double kScaleMin = 0.11;
inline constexpr double kScaleMax = 256.0;

// sigma of table `index`, log-spaced over [0.11, 256].
double ScaleForIndex(int index);

// Zero-mean discretized Gaussian: pmf(k) ~ Phi((k + 0.5) / s) -
// Phi((k - 0.5) / s) on the smallest symmetric support whose tail mass is
// below 2^-20.
CdfTable GaussianCdfTable(int sigma_index);

// The 64 Gaussian tables, built once.
class ScaleTable {
 public:
  static const ScaleTable& Default();

  // Nearest table in log space; sigma is clamped to [0.11, 256] first.
  int IndexFor(float sigma) const;
  const CdfTable& table(int index) const { return tables_.at(index); }
  double scale(int index) const { return scales_.at(index); }

 private:
  ScaleTable();

  std::array<double, kNumScales> scales_{};
  std::vector<CdfTable> tables_;
};

// Byte-oriented range coder with 48-bit range, 16-bit probabilities and
// carry propagation. The stream is big-endian; the first emitted byte, which
// is always zero for this construction, is omitted.
class RangeEncoder {
 public:
  void Encode(const CdfTable& table, std::int32_t symbol);
  std::vector<std::uint8_t> Finish();

 private:
  void ShiftLow();

  std::uint64_t low_ = 0;
  std::uint64_t range_ = 0xFFFFFFFFFFFFull;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool first_byte_ = true;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  std::int32_t Decode(const CdfTable& table);
  // True once every input byte has been consumed.
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  std::uint8_t NextByte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t code_ = 0;
  std::uint64_t range_ = 0xFFFFFFFFFFFFull;
};

// tables[i] governs symbols[i]. Out-of-support symbols are a hard error.
std::vector<std::uint8_t> EncodeSymbols(
    std::span<const std::int32_t> symbols,
    std::span<const CdfTable* const> tables);
// Throws kTruncated if the stream ends early, kCorrupt on trailing bytes.
std::vector<std::int32_t> DecodeSymbols(
    std::span<const std::uint8_t> bytes,
    std::span<const CdfTable* const> tables);

// Sum of -log2(pmf / 2^16), in bits.
double EstimateRate(std::span<const std::int32_t> symbols,
                    std::span<const CdfTable* const> tables);

// Evaluation-only rate-distortion decomposition.
struct RdReport {
  double bits_y = 0;
  double bits_z = 0;
  double bpp_y = 0;
  double bpp_z = 0;
  double mse = 0;  // 8-bit scale
  double lambda = 0;
  double loss = 0;  // bpp_y + bpp_z + lambda * mse
};

// x and x_hat in [0, 1]; bpp is over batch * height * width pixels.
RdReport RdLoss(const Tensor& x, const Tensor& x_hat, double bits_y,
                double bits_z, double lambda);

}  // namespace cleric

#endif  // CLERIC_ENTROPY_H_
