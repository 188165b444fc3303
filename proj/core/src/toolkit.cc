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

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cleric/error.h"

namespace cleric {
namespace {

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": " +
                                               a.shape().ToString() + " vs " +
                                               b.shape().ToString());
  }
  CheckNonEmpty(a, what);
}

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;
};

std::vector<double> GaussianWindow(int size, double sigma) {
  std::vector<double> g(size);
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double x = i - (size - 1) / 2.0;
    g[i] = std::exp(-x * x / (2 * sigma * sigma));
    sum += g[i];
  }
  for (double& x : g) x /= sum;
  return g;
}

// Separable valid correlation.
Plane Filter(const Plane& p, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const int oh = p.h - k + 1;
  const int ow = p.w - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(p.h) * ow);
  for (int y = 0; y < p.h; ++y) {
    const double* row = p.v.data() + static_cast<std::size_t>(y) * p.w;
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) s += g[i] * row[x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  Plane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < k; ++i) {
        s += g[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      }
      out.v[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

Plane Multiply(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// 2x2 mean; trailing odd rows/columns average the available pixels.
Plane Downsample(const Plane& p) {
  const int oh = (p.h + 1) / 2;
  const int ow = (p.w + 1) / 2;
  Plane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sy = 2 * y + dy;
          const int sx = 2 * x + dx;
          if (sy < p.h && sx < p.w) {
            s += p.v[static_cast<std::size_t>(sy) * p.w + sx];
            ++n;
          }
        }
      }
      out.v[static_cast<std::size_t>(y) * ow + x] = s / n;
    }
  }
  return out;
}

// Mean SSIM and mean contrast-structure term at one scale.
std::pair<double, double> SsimAt(const Plane& x, const Plane& y,
                                 const std::vector<double>& g, double c1,
                                 double c2) {
  const Plane mx = Filter(x, g);
  const Plane my = Filter(y, g);
  const Plane exx = Filter(Multiply(x, x), g);
  const Plane eyy = Filter(Multiply(y, y), g);
  const Plane exy = Filter(Multiply(x, y), g);
  double ssim_sum = 0;
  double cs_sum = 0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double ux = mx.v[i];
    const double uy = my.v[i];
    const double sxx = exx.v[i] - ux * ux;
    const double syy = eyy.v[i] - uy * uy;
    const double sxy = exy.v[i] - ux * uy;
    const double cs = (2 * sxy + c2) / (sxx + syy + c2);
    const double l = (2 * ux * uy + c1) / (ux * ux + uy * uy + c1);
    ssim_sum += l * cs;
    cs_sum += cs;
  }
  const double n = static_cast<double>(mx.v.size());
  return {ssim_sum / n, cs_sum / n};
}

Plane ExtractPlane(const Tensor& t, int b, int c) {
  Plane p{t.h(), t.w(), {}};
  const float* src = t.plane(b, c);
  p.v.resize(t.shape().plane());
  for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = 255.0 * src[i];
  return p;
}

// Coefficients of the least-squares cubic y(x), lowest order first.
std::array<double, 4> FitCubic(const std::vector<double>& x,
                               const std::vector<double>& y) {
  Eigen::MatrixXd a(x.size(), 4);
  Eigen::VectorXd rhs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1;
    for (int j = 0; j < 4; ++j) {
      a(i, j) = p;
      p *= x[i];
    }
    rhs(i) = y[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
  return {c(0), c(1), c(2), c(3)};
}

double IntegrateCubic(const std::array<double, 4>& c, double lo, double hi) {
  auto prim = [&](double x) {
    return c[0] * x + c[1] * x * x / 2 + c[2] * x * x * x / 3 +
           c[3] * x * x * x * x / 4;
  };
  return prim(hi) - prim(lo);
}

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

double Psnr(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "psnr");
  double sse = 0;
  const float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = 255.0 * (static_cast<double>(pa[i]) - pb[i]);
    sse += d * d;
  }
  if (sse == 0) return kPsnrInfinite;
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double MsSsim(const Tensor& a, const Tensor& b, const MsSsimOptions& options) {
  CheckSameShape(a, b, "ms_ssim");
  if (std::min(a.h(), a.w()) < kMsSsimMinSize) {
    throw Error(
        ErrorCode::kInvalidArgument,
        "ms_ssim: image too small (" + a.shape().ToString() +
            "), smaller side must be >= " + std::to_string(kMsSsimMinSize));
  }
  const std::vector<double> g = GaussianWindow(options.window, options.sigma);
  const double c1 = std::pow(options.k1 * 255.0, 2);
  const double c2 = std::pow(options.k2 * 255.0, 2);
  double total = 0;
  for (int n = 0; n < a.n(); ++n) {
    for (int c = 0; c < a.c(); ++c) {
      Plane x = ExtractPlane(a, n, c);
      Plane y = ExtractPlane(b, n, c);
      double score = 1;
      for (int s = 0; s < 5; ++s) {
        const auto [ssim, cs] = SsimAt(x, y, g, c1, c2);
        if (s < 4) {
          score *= std::pow(std::max(cs, 0.0), options.weights[s]);
          x = Downsample(x);
          y = Downsample(y);
        } else {
          score *= std::pow(std::max(ssim, 0.0), options.weights[s]);
        }
      }
      total += score;
    }
  }
  return total / (static_cast<double>(a.n()) * a.c());
}

double Bpp(std::uint64_t payload_bytes, std::uint64_t width,
           std::uint64_t height) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bpp: zero-area image");
  }
  return 8.0 * static_cast<double>(payload_bytes) /
         (static_cast<double>(width) * static_cast<double>(height));
}

void RdCurve::Validate() const {
  if (points.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "rd curve: needs >= 2 points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RdPoint& p = points[i];
    if (!(p.bpp > 0) || !std::isfinite(p.bpp) || !std::isfinite(p.psnr)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rd curve: bpp must be positive and psnr finite");
    }
    if (i > 0 && !(p.bpp > points[i - 1].bpp)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "rd curve: bpp must be strictly increasing");
    }
  }
}

double BdRate(const RdCurve& reference, const RdCurve& test) {
  reference.Validate();
  test.Validate();
  if (reference.points.size() < 4 || test.points.size() < 4) {
    throw Error(ErrorCode::kInvalidArgument, "bd_rate: needs >= 4 points");
  }
  auto split = [](const RdCurve& c, std::vector<double>& q,
                  std::vector<double>& lr) {
    for (const RdPoint& p : c.points) {
      q.push_back(p.psnr);
      lr.push_back(std::log(p.bpp));
    }
  };
  std::vector<double> q_ref, lr_ref, q_test, lr_test;
  split(reference, q_ref, lr_ref);
  split(test, q_test, lr_test);
  const double lo = std::max(*std::min_element(q_ref.begin(), q_ref.end()),
                             *std::min_element(q_test.begin(), q_test.end()));
  const double hi = std::min(*std::max_element(q_ref.begin(), q_ref.end()),
                             *std::max_element(q_test.begin(), q_test.end()));
  if (!(hi > lo)) {
    throw Error(ErrorCode::kInvalidArgument, "bd_rate: no PSNR overlap");
  }
  const double int_ref = IntegrateCubic(FitCubic(q_ref, lr_ref), lo, hi);
  const double int_test = IntegrateCubic(FitCubic(q_test, lr_test), lo, hi);
  const double avg = (int_test - int_ref) / (hi - lo);
  return (std::exp(avg) - 1.0) * 100.0;
}

Image8 DiffMap(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "diff_map");
  if (a.n() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "diff_map: batch must be 1");
  }
  const std::size_t plane = a.shape().plane();
  std::vector<double> d(plane, 0.0);
  for (int c = 0; c < a.c(); ++c) {
    const float* pa = a.plane(0, c);
    const float* pb = b.plane(0, c);
    for (std::size_t i = 0; i < plane; ++i) {
      d[i] += std::abs(static_cast<double>(pa[i]) - pb[i]);
    }
  }
  for (double& v : d) v /= a.c();
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  const double lo = *mn;
  const double range = *mx - lo;
  Image8 out = Image8::Filled(a.w(), a.h(), 1, 0);
  if (range > 0) {
    for (std::size_t i = 0; i < plane; ++i) {
      out.pixels[i] =
          static_cast<std::uint8_t>(std::lround((d[i] - lo) / range * 255.0));
    }
  }
  return out;
}

std::string FormatRdCsv(const std::vector<RdRow>& rows) {
  std::ostringstream os;
  os << "label,bpp,psnr,ms_ssim\n";
  for (const RdRow& r : rows) {
    os << r.label << ',' << FormatDouble(r.point.bpp) << ','
       << FormatDouble(r.point.psnr) << ',' << FormatDouble(r.point.ms_ssim)
       << '\n';
  }
  return os.str();
}

}  // namespace cleric
