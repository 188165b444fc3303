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

#include "cleric/image.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <string>

#include "cleric/error.h"
#include "cleric/store.h"

namespace cleric {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P',  'N',  'G',
                                           '\r', '\n', 0x1a, '\n'};

struct PngReadState {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

void PngRead(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->data.size()) png_error(png, "truncated");
  std::memcpy(out, st->data.data() + st->pos, n);
  st->pos += n;
}

void PngWrite(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void PngFlush(png_structp) {}

void PngErrorFn(png_structp png, png_const_charp) { png_longjmp(png, 1); }

void PngWarnFn(png_structp, png_const_charp) {}

Image8 DecodePngBytes(std::span<const std::uint8_t> bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           PngErrorFn, PngWarnFn);
  if (png == nullptr) throw Error(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIo, "png: out of memory");
  }
  PngReadState st{bytes, 0};
  Image8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kCorrupt, "png: malformed image");
  }
  png_set_read_fn(png, &st, PngRead);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = 3;
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(img.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kCorrupt, "png: unsupported pixel layout");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// Parses one whitespace/comment-delimited PPM header integer.
int PpmInt(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  long v = 0;
  std::size_t start = pos;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > (1 << 20)) throw Error(ErrorCode::kCorrupt, "ppm: value too large");
    ++pos;
  }
  if (pos == start) throw Error(ErrorCode::kCorrupt, "ppm: malformed header");
  return static_cast<int>(v);
}

Image8 DecodePpmBytes(std::span<const std::uint8_t> b) {
  std::size_t pos = 2;
  Image8 img;
  img.width = PpmInt(b, pos);
  img.height = PpmInt(b, pos);
  const int maxval = PpmInt(b, pos);
  if (maxval != 255)
    throw Error(ErrorCode::kCorrupt, "ppm: maxval must be 255");
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw Error(ErrorCode::kCorrupt, "ppm: malformed header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * 3;
  if (b.size() - pos < n) throw Error(ErrorCode::kTruncated, "ppm: short data");
  img.pixels.assign(b.begin() + pos, b.begin() + pos + n);
  return img;
}

Image8 ToRgb(const Image8& image) {
  if (image.channels == 3) return image;
  if (image.channels != 1) {
    throw Error(ErrorCode::kInvalidArgument, "image: channels must be 1 or 3");
  }
  Image8 out = Image8::Filled(image.width, image.height, 3, 0);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] =
        image.pixels[i];
  }
  return out;
}

}  // namespace

Image8 DecodeImage(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature),
                                      std::end(kPngSignature), bytes.begin())) {
    return DecodePngBytes(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    return DecodePpmBytes(bytes);
  }
  throw Error(ErrorCode::kBadMagic, "image: not a PNG or binary PPM");
}

Image8 ReadImage(const std::filesystem::path& path) {
  const Bytes bytes = ReadFileBytes(path);
  try {
    return DecodeImage(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodePng(const Image8& image) {
  if (image.width <= 0 || image.height <= 0 ||
      (image.channels != 1 && image.channels != 3) ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 image.height * image.channels) {
    throw Error(ErrorCode::kInvalidArgument, "png: malformed image buffer");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            PngErrorFn, PngWarnFn);
  if (png == nullptr) throw Error(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "png: out of memory");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(image.height);
  const std::size_t stride =
      static_cast<std::size_t>(image.width) * image.channels;
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.pixels.data() + y * stride);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "png: encode failed");
  }
  png_set_write_fn(png, &out, PngWrite, PngFlush);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void WritePng(const std::filesystem::path& path, const Image8& image) {
  WriteFileBytes(path, EncodePng(image));
}

void WritePpm(const std::filesystem::path& path, const Image8& image) {
  const Image8 rgb = ToRgb(image);
  const std::string header = "P6\n" + std::to_string(rgb.width) + " " +
                             std::to_string(rgb.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), rgb.pixels.begin(), rgb.pixels.end());
  WriteFileBytes(path, out);
}

Tensor ImageToTensor(const Image8& image) {
  const Image8 rgb = ToRgb(image);
  Tensor t(1, 3, rgb.height, rgb.width);
  const std::size_t plane = static_cast<std::size_t>(rgb.height) * rgb.width;
  float* d = t.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      d[c * plane + i] = static_cast<float>(rgb.pixels[3 * i + c]) / 255.0f;
    }
  }
  return t;
}

Image8 TensorToImage(const Tensor& t) {
  if (t.n() != 1 || t.c() != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                "image: expected (1, 3, h, w), got " + t.shape().ToString());
  }
  Image8 img = Image8::Filled(t.w(), t.h(), 3, 0);
  const std::size_t plane = static_cast<std::size_t>(t.h()) * t.w();
  const float* d = t.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = std::clamp(d[c * plane + i], 0.0f, 1.0f);
      img.pixels[3 * i + c] =
          static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return img;
}

}  // namespace cleric
