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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>
#include <string>

#include "cleric/error.h"
#include "cleric/rng.h"
#include "cleric_tools/parallel.h"
#include "cleric_tools/pipeline.h"

namespace cleric::tools {

namespace fs = std::filesystem;

int ResolveJobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CLERIC_JOBS")) {
    int v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    if (std::from_chars(env, end, v).ptr == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

bool TissueFilter(const Image8& patch, const TissueThresholds& t) {
  const std::size_t n = static_cast<std::size_t>(patch.width) * patch.height;
  if (n == 0) return false;
  const int ch = patch.channels;
  std::size_t tissue = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = patch.pixels.data() + i * ch;
    const int r = p[0];
    const int g = ch == 3 ? p[1] : p[0];
    const int b = ch == 3 ? p[2] : p[0];
    const double chroma = (std::max({r, g, b}) - std::min({r, g, b})) / 255.0;
    const double luma = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    if (chroma >= t.min_chroma && luma <= t.max_luma) ++tissue;
  }
  return static_cast<double>(tissue) >= t.min_coverage * static_cast<double>(n);
}

PatchSource PatchSource::Scan(const fs::path& root,
                              std::optional<int> max_levels) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIo,
                "patch source is not a directory: " + root.string());
  }
  static const std::regex kName(R"(tile_(\d+)_(\d+)\.(png|ppm))");
  PatchSource src;
  src.root = root;
  for (int level = 0;; ++level) {
    if (max_levels && level >= *max_levels) break;
    const fs::path dir = root / ("level" + std::to_string(level));
    if (!fs::is_directory(dir)) break;
    PatchLevel pl;
    pl.level = level;
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file()) entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
    for (const fs::path& p : entries) {
      std::smatch m;
      const std::string name = p.filename().string();
      if (!std::regex_match(name, m, kName)) continue;
      const int col = std::stoi(m[1]);
      const int row = std::stoi(m[2]);
      if (!pl.files.emplace(std::make_pair(col, row), p).second) {
        throw Error(
            ErrorCode::kInvalidArgument,
            "duplicate patch position in " + dir.string() + ": " + name);
      }
      pl.cols = std::max(pl.cols, col + 1);
      pl.rows = std::max(pl.rows, row + 1);
    }
    if (pl.files.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no tile_{col}_{row} patches in " + dir.string());
    }
    src.levels.push_back(std::move(pl));
  }
  if (src.levels.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no level0 directory under " + root.string());
  }
  for (PatchLevel& pl : src.levels) {
    for (const auto& [pos, path] : pl.files) {
      const Image8 img = ReadImage(path);
      if (pl.patch_width == 0) {
        pl.patch_width = img.width;
        pl.patch_height = img.height;
      } else if (img.width != pl.patch_width || img.height != pl.patch_height) {
        throw Error(ErrorCode::kShapeMismatch,
                    "mixed patch dimensions in level" +
                        std::to_string(pl.level) + ": " + path.string());
      }
    }
  }
  return src;
}

Image8 PatchSource::LoadLevel(std::size_t index) const {
  const PatchLevel& pl = levels.at(index);
  Image8 raster = Image8::Filled(pl.width(), pl.height(), 3, 255);
  for (const auto& [pos, path] : pl.files) {
    const Image8 img = ReadImage(path);
    if (img.width != pl.patch_width || img.height != pl.patch_height) {
      throw Error(ErrorCode::kShapeMismatch,
                  "patch changed size while reading: " + path.string());
    }
    const int x0 = pos.first * pl.patch_width;
    const int y0 = pos.second * pl.patch_height;
    for (int y = 0; y < img.height; ++y) {
      std::copy_n(
          img.pixels.begin() + static_cast<std::size_t>(y) * img.width * 3,
          static_cast<std::size_t>(img.width) * 3,
          raster.pixels.begin() +
              (static_cast<std::size_t>(y0 + y) * raster.width + x0) * 3);
    }
  }
  return raster;
}

LevelGrid GridFor(int width, int height, int tile_size) {
  if (width <= 0 || height <= 0 || tile_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid: non-positive dimension");
  }
  LevelGrid g;
  g.width = static_cast<std::uint32_t>(width);
  g.height = static_cast<std::uint32_t>(height);
  g.tile_width = g.tile_height = static_cast<std::uint32_t>(tile_size);
  g.cols = (g.width + g.tile_width - 1) / g.tile_width;
  g.rows = (g.height + g.tile_height - 1) / g.tile_height;
  return g;
}

Image8 CropTile(const Image8& raster, const LevelGrid& grid, int col, int row) {
  const int x0 = col * static_cast<int>(grid.tile_width);
  const int y0 = row * static_cast<int>(grid.tile_height);
  const int w = std::min<int>(grid.tile_width, raster.width - x0);
  const int h = std::min<int>(grid.tile_height, raster.height - y0);
  if (w <= 0 || h <= 0) {
    throw Error(ErrorCode::kOutOfRange, "tile outside the raster");
  }
  const int ch = raster.channels;
  Image8 out = Image8::Filled(w, h, ch, 0);
  for (int y = 0; y < h; ++y) {
    std::copy_n(raster.pixels.begin() +
                    (static_cast<std::size_t>(y0 + y) * raster.width + x0) * ch,
                static_cast<std::size_t>(w) * ch,
                out.pixels.begin() + static_cast<std::size_t>(y) * w * ch);
  }
  return out;
}

namespace {

struct Blob {
  double cx, cy, rx, ry;
};

Image8 Halve(const Image8& src) {
  Image8 out = Image8::Filled(src.width / 2, src.height / 2, 3, 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int s = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            s += src.pixels[(static_cast<std::size_t>(2 * y + dy) * src.width +
                             2 * x + dx) *
                                3 +
                            c];
          }
        }
        out.pixels[(static_cast<std::size_t>(y) * out.width + x) * 3 + c] =
            static_cast<std::uint8_t>((s + 2) / 4);
      }
    }
  }
  return out;
}

}  // namespace

void WriteSyntheticSlide(const fs::path& root, int levels, int tile_size,
                         std::uint64_t seed) {
  if (levels < 1 || tile_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic slide: bad geometry");
  }
  const int size = tile_size << (levels - 1);
  Rng rng(seed);
  std::vector<Blob> blobs;
  for (int i = 0; i < 7; ++i) {
    blobs.push_back({size * (0.3 + 0.7 * rng.Uniform01()),
                     size * (0.3 + 0.7 * rng.Uniform01()),
                     size * (0.12 + 0.2 * rng.Uniform01()),
                     size * (0.12 + 0.2 * rng.Uniform01())});
  }
  // Stain colors: eosin-pink stroma, hematoxylin-purple nuclei.
  constexpr double kEosin[3] = {232, 150, 196};
  constexpr double kNuclei[3] = {110, 60, 150};
  Image8 raster = Image8::Filled(size, size, 3, 255);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double density = 0;
      for (const Blob& b : blobs) {
        const double dx = (x - b.cx) / b.rx;
        const double dy = (y - b.cy) / b.ry;
        density += std::exp(-(dx * dx + dy * dy));
      }
      density = std::min(1.0, density);
      const double texture =
          0.5 + 0.25 * std::sin(0.11 * x + 0.5 * std::sin(0.05 * y)) *
                    std::cos(0.09 * y - 0.3 * std::sin(0.07 * x));
      const double nucleus =
          std::pow(std::max(0.0, std::sin(0.31 * x) * std::sin(0.27 * y)), 8);
      const double noise = 8.0 * (rng.Uniform01() - 0.5);
      for (int c = 0; c < 3; ++c) {
        const double stain =
            kEosin[c] * (1 - nucleus) + kNuclei[c] * nucleus - 30 * texture;
        const double v =
            255.0 * (1 - density) + stain * density + noise * density;
        raster.pixels[(static_cast<std::size_t>(y) * size + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  for (int y = 0; y < tile_size; ++y) {
    std::fill_n(raster.pixels.begin() + static_cast<std::size_t>(y) * size * 3,
                static_cast<std::size_t>(tile_size) * 3, 255);
  }
  for (int level = 0; level < levels; ++level) {
    if (level > 0) raster = Halve(raster);
    const fs::path dir = root / ("level" + std::to_string(level));
    fs::create_directories(dir);
    const LevelGrid grid = GridFor(raster.width, raster.height, tile_size);
    for (std::uint32_t r = 0; r < grid.rows; ++r) {
      for (std::uint32_t c = 0; c < grid.cols; ++c) {
        WritePng(
            dir / ("tile_" + std::to_string(c) + "_" + std::to_string(r) +
                   ".png"),
            CropTile(raster, grid, static_cast<int>(c), static_cast<int>(r)));
      }
    }
  }
}

}  // namespace cleric::tools
