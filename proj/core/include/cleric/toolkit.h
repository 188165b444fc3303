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

#ifndef CLERIC_TOOLKIT_H_
#define CLERIC_TOOLKIT_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "cleric/image.h"
#include "cleric/tensor.h"

namespace cleric {

// Returned by Psnr for identical inputs.
inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

// Inputs in [0, 1]; MSE is measured on the 8-bit scale.
double Psnr(const Tensor& a, const Tensor& b);

// Multi-scale structural similarity.
struct MsSsimOptions {
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
  double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
};

inline constexpr int kMsSsimMinSize = 161;

// Five-scale MS-SSIM over each channel, averaged over channels and batch.
// Windows are valid (no padding); between scales the image is 2x2 averaged,
// with odd trailing rows/columns averaged over the available pixels. Inputs
// in [0, 1], dynamic range 255. Throws kInvalidArgument when the smaller
// side is below 161.
double MsSsim(const Tensor& a, const Tensor& b,
              const MsSsimOptions& options = {});

double Bpp(std::uint64_t payload_bytes, std::uint64_t width,
           std::uint64_t height);

struct RdPoint {
  double bpp = 0;
  double psnr = 0;
  double ms_ssim = 0;
};

struct RdCurve {
  std::vector<RdPoint> points;  // strictly increasing bpp

  void Validate() const;
};

// Bjontegaard delta rate in percent: cubic fits of ln(bpp) over PSNR,
// integrated over the shared PSNR interval. Negative means `test` needs fewer
// bits than `reference` at equal quality.
double BdRate(const RdCurve& reference, const RdCurve& test);

// Per-pixel mean absolute channel difference, min-max normalized to 0..255.
Image8 DiffMap(const Tensor& a, const Tensor& b);

struct RdRow {
  std::string label;
  RdPoint point;
};

// "label,bpp,psnr,ms_ssim" with a header line; infinite PSNR is written as
// "inf".
std::string FormatRdCsv(const std::vector<RdRow>& rows);

}  // namespace cleric

#endif  // CLERIC_TOOLKIT_H_
