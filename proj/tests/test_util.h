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

#ifndef CLERIC_TESTS_TEST_UTIL_H_
#define CLERIC_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "cleric/config.h"
#include "cleric/entropy.h"
#include "cleric/numerics.h"
#include "cleric/rng.h"
#include "cleric/tensor.h"

namespace cleric::test {

inline Tensor RandomTensor(int n, int c, int h, int w, Rng& rng,
                           float lo = 0.0f, float hi = 1.0f) {
  Tensor t(n, c, h, w);
  for (float& v : t.values()) v = lo + (hi - lo) * rng.Uniform01();
  return t;
}

inline ConvSpec RandomConv(int out, int in, int k, int stride, Rng& rng) {
  ConvSpec c = MakeConv(out, in, k, stride);
  const float a = 1.0f / std::sqrt(static_cast<float>(in * k * k));
  for (float& v : c.weight.values()) v = rng.Symmetric(a);
  for (float& v : c.bias) v = rng.Symmetric(0.1f);
  return c;
}

inline double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
  }
  return m;
}

// Direct-loop convolution with replicate padding, computed in double.
// `shift_x` is added to the input column before edge clamping.
inline Tensor NaiveConv2d(const Tensor& x, const ConvSpec& c, int shift_x = 0) {
  const int kh = c.kernel_h();
  const int kw = c.kernel_w();
  const int s = c.stride;
  const int oh = (x.h() + s - 1) / s;
  const int ow = (x.w() + s - 1) / s;
  Tensor out(x.n(), c.out_channels(), oh, ow);
  for (int b = 0; b < x.n(); ++b) {
    for (int o = 0; o < c.out_channels(); ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int xo = 0; xo < ow; ++xo) {
          double acc = c.bias[o];
          for (int i = 0; i < x.c(); ++i) {
            for (int ky = 0; ky < kh; ++ky) {
              for (int kx = 0; kx < kw; ++kx) {
                const int sy =
                    std::clamp(y * s + ky - (kh - 1) / 2, 0, x.h() - 1);
                const int sx = std::clamp(xo * s + kx - (kw - 1) / 2 + shift_x,
                                          0, x.w() - 1);
                acc += static_cast<double>(c.weight.at(o, i, ky, kx)) *
                       x.at(b, i, sy, sx);
              }
            }
          }
          out.at(b, o, y, xo) = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

inline double GeluOracle(double v) {
  return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
}

// Random skewed table with 1..300 symbols.
inline CdfTable RandomTable(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.Uniform01() * 300);
  std::vector<double> pmf(n);
  const double skew = 1 + 20 * rng.Uniform01();
  for (double& p : pmf) p = std::pow(rng.Uniform01(), skew) + 1e-9;
  const int min_symbol = static_cast<int>(rng.Uniform01() * 400) - 200;
  return QuantizePmf(pmf, min_symbol);
}

// Draws a symbol distributed as the table's pmf.
inline std::int32_t Sample(const CdfTable& t, Rng& rng) {
  const auto target = static_cast<std::uint32_t>(rng.Uniform01() * kCdfTotal);
  const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), target);
  return t.min_symbol + static_cast<std::int32_t>(it - t.cdf.begin()) - 1;
}

// Small architecture for fast codec tests.
inline CodecConfig TinyConfig() {
  CodecConfig c;
  c.n = 8;
  c.m = 20;
  c.t = 2;
  c.slices = 5;
  return c;
}

// Removes registered directories at process exit.
class TempDirRegistry {
 public:
  ~TempDirRegistry() {
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove_all(p, ec);
  }
  void Add(const std::filesystem::path& p) { paths_.push_back(p); }

 private:
  std::vector<std::filesystem::path> paths_;
};

// Fresh directory, unique per process, deleted at exit.
inline std::filesystem::path TempDir(const std::string& name) {
  static TempDirRegistry registry;
  const std::filesystem::path p =
      std::filesystem::temp_directory_path() /
      ("cleric_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  registry.Add(p);
  return p;
}

}  // namespace cleric::test

#endif  // CLERIC_TESTS_TEST_UTIL_H_
