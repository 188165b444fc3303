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

#ifndef CLERIC_TOOLS_PIPELINE_H_
#define CLERIC_TOOLS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cleric/config.h"
#include "cleric/image.h"
#include "cleric/store.h"
#include "cleric/toolkit.h"

namespace cleric::tools {

// --- tissue filter -----------------------------------------------------------

struct TissueThresholds {
  double min_chroma = 0.06;    // (max(R,G,B) - min(R,G,B)) / 255
  double max_luma = 0.92;      // Rec. 601 luma / 255
  double min_coverage = 0.05;  // fraction of qualifying pixels
};

// True iff at least `min_coverage` of the pixels have chroma >= min_chroma
// and luma <= max_luma.
bool TissueFilter(const Image8& patch, const TissueThresholds& t = {});

// --- patch source ------------------------------------------------------------

// One pyramid level of a patch directory: "levelK/tile_{col}_{row}.png|.ppm".
struct PatchLevel {
  int level = 0;
  int cols = 0;
  int rows = 0;
  int patch_width = 0;
  int patch_height = 0;
  std::map<std::pair<int, int>, std::filesystem::path> files;  // (col, row)

  int width() const { return cols * patch_width; }
  int height() const { return rows * patch_height; }
};

struct PatchSource {
  std::filesystem::path root;
  std::vector<PatchLevel> levels;  // level0 first, contiguous

  // Scans level0..levelN; stops at the first missing level directory.
  // `max_levels` limits how many are kept. Throws kInvalidArgument on an
  // empty source, malformed file names or mixed patch sizes within a level.
  static PatchSource Scan(const std::filesystem::path& root,
                          std::optional<int> max_levels = std::nullopt);

  // Level raster assembled from its patches; missing patches are white.
  Image8 LoadLevel(std::size_t index) const;
};

// Splits a raster into tile_size tiles (edge tiles cropped), row-major.
LevelGrid GridFor(int width, int height, int tile_size);
Image8 CropTile(const Image8& raster, const LevelGrid& grid, int col, int row);

// --- synthetic slides --------------------------------------------------------

// Writes a deterministic tissue-like pyramid of `levels` levels to `root`.
// Level 0 is (tile_size * 2^(levels-1)) square, split into tile_size PNG
// patches; each further level halves the resolution. The top-left level-0
// patch is pure white background.
void WriteSyntheticSlide(const std::filesystem::path& root, int levels,
                         int tile_size, std::uint64_t seed);

// --- commands ----------------------------------------------------------------

struct MakeWeightsOptions {
  std::filesystem::path out;
  CodecConfig config;
  std::uint64_t seed = 7;
};
CodecId CmdMakeWeights(const MakeWeightsOptions& options);

struct Toggles {
  bool lifting = true;
  bool drb = true;
  bool r2b = true;
};

struct EncodeOptions {
  std::filesystem::path source;
  std::filesystem::path weights;
  std::filesystem::path out;
  int tile_size = 256;
  std::optional<int> levels;
  Toggles toggles;
  TissueThresholds tissue;
  int jobs = 0;
};

struct LevelSummary {
  int level = 0;
  LevelGrid grid;
  int coded = 0;
  int skipped = 0;
  std::uint64_t payload_bytes = 0;
  double bpp = 0;
};

struct EncodeSummary {
  CodecId codec_id{};
  std::vector<LevelSummary> levels;
  std::uint64_t container_bytes = 0;
};
EncodeSummary CmdEncode(const EncodeOptions& options);

struct DecodeOptions {
  std::filesystem::path container;
  std::filesystem::path weights;
  std::filesystem::path out_dir;
  std::optional<int> level;
  std::optional<std::pair<int, int>> tile;  // (col, row), needs `level`
  int jobs = 0;
};

struct DecodeSummary {
  int decoded = 0;  // tiles reconstructed from a bitstream
  int empty = 0;    // empty-flagged tiles written as white patches
  std::uint64_t payload_bytes_read = 0;
};
DecodeSummary CmdDecode(const DecodeOptions& options);

struct MetricsOptions {
  std::filesystem::path source;
  std::filesystem::path container;
  std::filesystem::path weights;
  std::optional<std::filesystem::path> diff_dir;
  std::optional<std::filesystem::path> csv_out;
  int jobs = 0;
};

struct LevelMetrics {
  int level = 0;
  RdPoint point;  // ms_ssim is NaN when the level is below the MS-SSIM size
  std::uint64_t payload_bytes = 0;
  std::uint64_t pixels = 0;
  int coded = 0;
  int empty = 0;
};

struct MetricsReport {
  std::vector<LevelMetrics> levels;
  RdPoint aggregate;  // pixel-weighted over all levels
  std::string csv;
};
MetricsReport CmdMetrics(const MetricsOptions& options);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Embedded property suite over a weight file. Never throws for problems
// with the file itself; they are reported as failed checks.
std::vector<CheckResult> CmdVerify(const std::filesystem::path& weights);

void PrintEncodeSummary(std::ostream& os, const EncodeSummary& s);
void PrintDecodeSummary(std::ostream& os, const DecodeSummary& s);
void PrintMetricsReport(std::ostream& os, const MetricsReport& r);
void PrintChecks(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace cleric::tools

#endif  // CLERIC_TOOLS_PIPELINE_H_
