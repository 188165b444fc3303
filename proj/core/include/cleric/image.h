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

#ifndef CLERIC_IMAGE_H_
#define CLERIC_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cleric/tensor.h"

namespace cleric {

// 8-bit image, interleaved, `channels` is 1 (gray) or 3 (RGB).
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  static Image8 Filled(int width, int height, int channels, std::uint8_t v) {
    return Image8{width, height, channels,
                  std::vector<std::uint8_t>(
                      static_cast<std::size_t>(width) * height * channels, v)};
  }
  bool operator==(const Image8&) const = default;
};

// PNG (8-bit gray/RGB/RGBA, alpha dropped) or binary PPM (P6, maxval 255),
// detected from the file signature. Gray inputs are expanded to RGB.
Image8 ReadImage(const std::filesystem::path& path);
Image8 DecodeImage(std::span<const std::uint8_t> bytes);

// Deterministic PNG encoding (fixed zlib level, no ancillary chunks).
std::vector<std::uint8_t> EncodePng(const Image8& image);
void WritePng(const std::filesystem::path& path, const Image8& image);
void WritePpm(const std::filesystem::path& path, const Image8& image);

// RGB image -> (1, 3, h, w) in [0, 1].
Tensor ImageToTensor(const Image8& image);
// (1, 3, h, w) -> RGB, values clamped to [0, 1] and rounded to 8 bits.
Image8 TensorToImage(const Tensor& t);

}  // namespace cleric

#endif  // CLERIC_IMAGE_H_
