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

#include <gtest/gtest.h>

#include <fstream>

#include "cleric/error.h"
#include "test_util.h"

namespace cleric {
namespace {

Image8 Gradient(int w, int h) {
  Image8 img = Image8::Filled(w, h, 3, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t* p = &img.pixels[(static_cast<std::size_t>(y) * w + x) * 3];
      p[0] = static_cast<std::uint8_t>(x * 7);
      p[1] = static_cast<std::uint8_t>(y * 13);
      p[2] = static_cast<std::uint8_t>(x ^ y);
    }
  }
  return img;
}

TEST(ImageTest, PngRoundTripAndDeterminism) {
  const Image8 img = Gradient(37, 21);
  const auto png = EncodePng(img);
  EXPECT_EQ(png, EncodePng(img));
  EXPECT_EQ(DecodeImage(png), img);
  const auto dir = test::TempDir("image_png");
  WritePng(dir / "a.png", img);
  EXPECT_EQ(ReadImage(dir / "a.png"), img);
}

TEST(ImageTest, PpmRoundTrip) {
  const Image8 img = Gradient(5, 9);
  const auto dir = test::TempDir("image_ppm");
  WritePpm(dir / "a.ppm", img);
  EXPECT_EQ(ReadImage(dir / "a.ppm"), img);
}

TEST(ImageTest, PpmWithCommentsParses) {
  const auto dir = test::TempDir("image_ppm_comment");
  {
    std::ofstream f(dir / "c.ppm", std::ios::binary);
    f << "P6\n# comment\n2 1\n255\n";
    const char px[6] = {1, 2, 3, 4, 5, 6};
    f.write(px, 6);
  }
  const Image8 img = ReadImage(dir / "c.ppm");
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6}));
}

TEST(ImageTest, GrayExpandsToRgb) {
  Image8 gray = Image8::Filled(4, 3, 1, 0);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
    gray.pixels[i] = static_cast<std::uint8_t>(i * 20);
  }
  const Image8 rgb = DecodeImage(EncodePng(gray));
  ASSERT_EQ(rgb.channels, 3);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
    for (int c = 0; c < 3; ++c)
      EXPECT_EQ(rgb.pixels[i * 3 + c], gray.pixels[i]);
  }
}

TEST(ImageTest, CorruptInputs) {
  EXPECT_THROW(DecodeImage(std::vector<std::uint8_t>{}), Error);
  EXPECT_THROW(DecodeImage(std::vector<std::uint8_t>{'G', 'I', 'F', '8'}),
               Error);
  auto png = EncodePng(Gradient(16, 16));
  png.resize(png.size() / 2);
  EXPECT_THROW(DecodeImage(png), Error);
  const std::string ppm = "P6\n2 2\n65535\n";
  EXPECT_THROW(DecodeImage(std::vector<std::uint8_t>(ppm.begin(), ppm.end())),
               Error);
  const std::string short_ppm = "P6\n2 2\n255\nabc";
  EXPECT_THROW(DecodeImage(std::vector<std::uint8_t>(short_ppm.begin(),
                                                     short_ppm.end())),
               Error);
  EXPECT_THROW(ReadImage("/nonexistent/file.png"), Error);
}

TEST(ImageTest, TensorConversion) {
  const Image8 img = Gradient(6, 4);
  const Tensor t = ImageToTensor(img);
  EXPECT_EQ(t.shape(), (Shape{1, 3, 4, 6}));
  EXPECT_FLOAT_EQ(t.at(0, 0, 0, 1), 7.0f / 255);
  EXPECT_EQ(TensorToImage(t), img);

  Tensor out(1, 3, 1, 2);
  out.at(0, 0, 0, 0) = -0.5f;
  out.at(0, 0, 0, 1) = 1.5f;
  out.at(0, 1, 0, 0) = 0.5f;
  const Image8 clamped = TensorToImage(out);
  EXPECT_EQ(clamped.pixels[0], 0);
  EXPECT_EQ(clamped.pixels[3], 255);
  EXPECT_EQ(clamped.pixels[1], 128);
  EXPECT_THROW(TensorToImage(Tensor(1, 2, 1, 1)), Error);
}

}  // namespace
}  // namespace cleric
