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

#ifndef CLERIC_CONFIG_H_
#define CLERIC_CONFIG_H_

#include <array>
#include <cstdint>

namespace cleric {

// Rate-distortion trade-off values of the trained model family.
inline constexpr std::array<double, 5> kLambdaGrid = {0.005, 0.0075, 0.011,
                                                      0.02, 0.0335};

struct CodecConfig {
  int n = 192;     // hidden width
  int m = 320;     // latent channels
  int t = 2;       // R2B recursions
  int slices = 5;  // channel-context slices
  bool lifting_enabled = true;
  bool drb_enabled = true;
  bool r2b_enabled = true;
  double lambda = 0.0335;

  int slice_channels() const { return m / slices; }
  // Recursions actually run: with R2B disabled every block is a plain
  // single-pass residual block.
  int effective_t() const { return r2b_enabled ? t : 1; }

  std::uint8_t ToggleBits() const;
  void SetToggleBits(std::uint8_t bits);

  // Throws kInvalidArgument.
  void Validate() const;

  bool operator==(const CodecConfig&) const = default;
};

}  // namespace cleric

#endif  // CLERIC_CONFIG_H_
