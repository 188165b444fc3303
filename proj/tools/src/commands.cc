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

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cleric/codec.h"
#include "cleric/error.h"
#include "cleric_tools/parallel.h"
#include "cleric_tools/pipeline.h"

namespace cleric::tools {

namespace fs = std::filesystem;

namespace {

struct TileJob {
  std::size_t level;
  std::uint32_t col;
  std::uint32_t row;
};

fs::path TilePath(const fs::path& dir, std::size_t level, std::uint32_t col,
                  std::uint32_t row) {
  return dir / ("level" + std::to_string(level)) /
         ("tile_" + std::to_string(col) + "_" + std::to_string(row) + ".png");
}

std::pair<int, int> TileExtent(const LevelGrid& g, std::uint32_t col,
                               std::uint32_t row) {
  const int w =
      static_cast<int>(std::min(g.tile_width, g.width - col * g.tile_width));
  const int h =
      static_cast<int>(std::min(g.tile_height, g.height - row * g.tile_height));
  return {w, h};
}

Model LoadModel(const fs::path& weights) {
  return Model::FromWeights(ReadWeights(weights));
}

void CheckContainerId(const ContainerReader& reader, const Model& model) {
  if (reader.codec_id() != model.codec_id()) {
    throw Error(ErrorCode::kCodecIdMismatch,
                "container codec id " + CodecIdHex(reader.codec_id()) +
                    " does not match weights " + CodecIdHex(model.codec_id()));
  }
}

// Decoded tile as an 8-bit image; empty-flagged tiles are white.
Image8 ReconstructTile(const ContainerReader& reader, const Model& model,
                       std::size_t level, std::uint32_t col,
                       std::uint32_t row) {
  const LevelGrid& g = reader.level(level);
  const auto [w, h] = TileExtent(g, col, row);
  const std::optional<TileBitstream> bs = reader.FetchTile(level, col, row);
  if (!bs) return Image8::Filled(w, h, 3, 255);
  if (static_cast<int>(bs->width) != w || static_cast<int>(bs->height) != h) {
    throw Error(ErrorCode::kCorrupt,
                "tile size disagrees with the container grid");
  }
  return TensorToImage(DecodeTile(*bs, model).image);
}

std::string Fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double SquaredError(const Image8& a, const Image8& b) {
  double sse = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    sse += d * d;
  }
  return sse;
}

void Paste(Image8& raster, const Image8& tile, const LevelGrid& g,
           std::uint32_t col, std::uint32_t row) {
  const std::size_t x0 = col * g.tile_width;
  const std::size_t y0 = row * g.tile_height;
  for (int y = 0; y < tile.height; ++y) {
    std::copy_n(
        tile.pixels.begin() + static_cast<std::size_t>(y) * tile.width * 3,
        static_cast<std::size_t>(tile.width) * 3,
        raster.pixels.begin() + ((y0 + y) * raster.width + x0) * 3);
  }
}

}  // namespace

CodecId CmdMakeWeights(const MakeWeightsOptions& options) {
  const WeightStore ws = MakeSeededWeights(options.config, options.seed);
  WriteWeights(ws, options.out);
  return ws.Id();
}

EncodeSummary CmdEncode(const EncodeOptions& options) {
  if (options.tile_size <= 0 || options.tile_size % 64 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "--tile-size must be a positive multiple of 64");
  }
  if (options.levels && *options.levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "--levels must be >= 1");
  }
  const WeightStore ws = ReadWeights(options.weights);
  if (!options.toggles.lifting && ws.config.lifting_enabled) {
    throw Error(ErrorCode::kInvalidArgument,
                "--no-lifting needs weights made with make-weights "
                "--no-lifting");
  }
  const Model model = Model::FromWeights(ws).WithToggles(options.toggles.drb,
                                                         options.toggles.r2b);
  const PatchSource src = PatchSource::Scan(options.source, options.levels);

  std::vector<Image8> rasters;
  std::vector<LevelTiles> levels;
  std::vector<TileJob> jobs;
  for (std::size_t l = 0; l < src.levels.size(); ++l) {
    rasters.push_back(src.LoadLevel(l));
    LevelTiles lt;
    lt.grid =
        GridFor(rasters.back().width, rasters.back().height, options.tile_size);
    lt.tiles.resize(lt.grid.tile_count());
    for (std::uint32_t r = 0; r < lt.grid.rows; ++r) {
      for (std::uint32_t c = 0; c < lt.grid.cols; ++c)
        jobs.push_back({l, c, r});
    }
    levels.push_back(std::move(lt));
  }

  ParallelFor(jobs.size(), ResolveJobs(options.jobs), [&](std::size_t i) {
    const TileJob& j = jobs[i];
    LevelTiles& lt = levels[j.level];
    const Image8 tile =
        CropTile(rasters[j.level], lt.grid, static_cast<int>(j.col),
                 static_cast<int>(j.row));
    if (!TissueFilter(tile, options.tissue)) return;
    const EncodedTile enc = EncodeTile(ImageToTensor(tile), model);
    lt.tiles[static_cast<std::size_t>(j.row) * lt.grid.cols + j.col] =
        WriteTile(enc.bitstream);
  });

  const Bytes container = BuildContainer(model.codec_id(), levels);
  WriteFileBytes(options.out, container);

  EncodeSummary summary;
  summary.codec_id = model.codec_id();
  summary.container_bytes = container.size();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    LevelSummary s;
    s.level = static_cast<int>(l);
    s.grid = levels[l].grid;
    for (const auto& t : levels[l].tiles) {
      if (t) {
        ++s.coded;
        s.payload_bytes += t->size();
      } else {
        ++s.skipped;
      }
    }
    s.bpp = Bpp(s.payload_bytes, s.grid.width, s.grid.height);
    summary.levels.push_back(s);
  }
  return summary;
}

DecodeSummary CmdDecode(const DecodeOptions& options) {
  const ContainerReader reader = ContainerReader::Open(options.container);
  const Model model = LoadModel(options.weights);
  CheckContainerId(reader, model);

  std::vector<TileJob> jobs;
  if (options.tile && !options.level) {
    throw Error(ErrorCode::kInvalidArgument, "--tile needs --level");
  }
  for (std::size_t l = 0; l < reader.level_count(); ++l) {
    if (options.level && static_cast<std::size_t>(*options.level) != l) {
      continue;
    }
    const LevelGrid& g = reader.level(l);
    for (std::uint32_t r = 0; r < g.rows; ++r) {
      for (std::uint32_t c = 0; c < g.cols; ++c) {
        if (options.tile &&
            (static_cast<std::uint32_t>(options.tile->first) != c ||
             static_cast<std::uint32_t>(options.tile->second) != r)) {
          continue;
        }
        jobs.push_back({l, c, r});
      }
    }
  }
  if (jobs.empty()) {
    throw Error(ErrorCode::kOutOfRange,
                "selection matches no tiles in the container");
  }

  std::vector<char> was_empty(jobs.size(), 0);
  ParallelFor(jobs.size(), ResolveJobs(options.jobs), [&](std::size_t i) {
    const TileJob& j = jobs[i];
    was_empty[i] = reader.entry(j.level, j.col, j.row).empty;
    const Image8 img = ReconstructTile(reader, model, j.level, j.col, j.row);
    const fs::path path = TilePath(options.out_dir, j.level, j.col, j.row);
    fs::create_directories(path.parent_path());
    WritePng(path, img);
  });

  DecodeSummary s;
  for (char e : was_empty) (e ? s.empty : s.decoded)++;
  s.payload_bytes_read = reader.payload_bytes_read();
  return s;
}

MetricsReport CmdMetrics(const MetricsOptions& options) {
  const ContainerReader reader = ContainerReader::Open(options.container);
  const Model model = LoadModel(options.weights);
  CheckContainerId(reader, model);
  const PatchSource src = PatchSource::Scan(options.source);
  if (src.levels.size() < reader.level_count()) {
    throw Error(ErrorCode::kShapeMismatch,
                "source has " + std::to_string(src.levels.size()) +
                    " levels, container has " +
                    std::to_string(reader.level_count()));
  }

  const std::size_t nlevels = reader.level_count();
  std::vector<Image8> originals;
  std::vector<Image8> recon;
  std::vector<TileJob> jobs;
  for (std::size_t l = 0; l < nlevels; ++l) {
    originals.push_back(src.LoadLevel(l));
    const LevelGrid& g = reader.level(l);
    if (static_cast<std::uint32_t>(originals.back().width) != g.width ||
        static_cast<std::uint32_t>(originals.back().height) != g.height) {
      throw Error(ErrorCode::kShapeMismatch,
                  "level" + std::to_string(l) +
                      " size differs between source and container");
    }
    recon.push_back(Image8::Filled(g.width, g.height, 3, 255));
    for (std::uint32_t r = 0; r < g.rows; ++r) {
      for (std::uint32_t c = 0; c < g.cols; ++c) jobs.push_back({l, c, r});
    }
  }

  ParallelFor(jobs.size(), ResolveJobs(options.jobs), [&](std::size_t i) {
    const TileJob& j = jobs[i];
    const Image8 img = ReconstructTile(reader, model, j.level, j.col, j.row);
    Paste(recon[j.level], img, reader.level(j.level), j.col, j.row);
  });

  MetricsReport report;
  double total_sse = 0;
  double total_values = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t total_pixels = 0;
  double ssim_weighted = 0;
  double ssim_pixels = 0;
  std::vector<RdRow> rows;
  for (std::size_t l = 0; l < nlevels; ++l) {
    const LevelGrid& g = reader.level(l);
    LevelMetrics m;
    m.level = static_cast<int>(l);
    m.pixels = static_cast<std::uint64_t>(g.width) * g.height;
    for (std::uint32_t r = 0; r < g.rows; ++r) {
      for (std::uint32_t c = 0; c < g.cols; ++c) {
        const TileIndexEntry& e = reader.entry(l, c, r);
        (e.empty ? m.empty : m.coded)++;
        m.payload_bytes += e.length;
      }
    }
    if (m.payload_bytes != reader.LevelPayloadBytes(l)) {
      throw Error(ErrorCode::kCorrupt, "container index byte count mismatch");
    }
    const Tensor a = ImageToTensor(originals[l]);
    const Tensor b = ImageToTensor(recon[l]);
    m.point.bpp = Bpp(m.payload_bytes, g.width, g.height);
    m.point.psnr = Psnr(a, b);
    m.point.ms_ssim = std::min(g.width, g.height) >= kMsSsimMinSize
                          ? MsSsim(a, b)
                          : std::numeric_limits<double>::quiet_NaN();
    if (!std::isnan(m.point.ms_ssim)) {
      ssim_weighted += m.point.ms_ssim * static_cast<double>(m.pixels);
      ssim_pixels += static_cast<double>(m.pixels);
    }
    if (options.diff_dir) {
      fs::create_directories(*options.diff_dir);
      WritePng(*options.diff_dir / ("level" + std::to_string(l) + ".png"),
               DiffMap(a, b));
    }
    total_sse += SquaredError(originals[l], recon[l]);
    total_values += static_cast<double>(originals[l].pixels.size());
    total_bytes += m.payload_bytes;
    total_pixels += m.pixels;
    rows.push_back({"level" + std::to_string(l), m.point});
    report.levels.push_back(m);
  }
  report.aggregate.bpp = 8.0 * static_cast<double>(total_bytes) /
                         static_cast<double>(total_pixels);
  report.aggregate.psnr =
      total_sse == 0
          ? kPsnrInfinite
          : 10.0 * std::log10(255.0 * 255.0 * total_values / total_sse);
  report.aggregate.ms_ssim = ssim_pixels > 0
                                 ? ssim_weighted / ssim_pixels
                                 : std::numeric_limits<double>::quiet_NaN();
  rows.push_back({"all", report.aggregate});
  report.csv = FormatRdCsv(rows);
  if (options.csv_out) {
    const std::string& csv = report.csv;
    WriteFileBytes(*options.csv_out, Bytes(csv.begin(), csv.end()));
  }
  return report;
}

void PrintEncodeSummary(std::ostream& os, const EncodeSummary& s) {
  os << "codec_id " << CodecIdHex(s.codec_id) << "\n";
  std::uint64_t bytes = 0;
  double pixels = 0;
  for (const LevelSummary& l : s.levels) {
    os << "level" << l.level << "  grid " << l.grid.cols << "x" << l.grid.rows
       << "  coded " << l.coded << "  skipped " << l.skipped << "  bytes "
       << l.payload_bytes << "  bpp " << Fixed(l.bpp, 4) << "\n";
    bytes += l.payload_bytes;
    pixels += static_cast<double>(l.grid.width) * l.grid.height;
  }
  os << "total payload " << bytes << " bytes, mean bpp "
     << Fixed(pixels > 0 ? 8.0 * static_cast<double>(bytes) / pixels : 0, 4)
     << ", container " << s.container_bytes << " bytes\n";
}

void PrintDecodeSummary(std::ostream& os, const DecodeSummary& s) {
  os << "decoded " << s.decoded << " tiles, " << s.empty
     << " empty, payload bytes read " << s.payload_bytes_read << "\n";
}

void PrintMetricsReport(std::ostream& os, const MetricsReport& r) {
  for (const LevelMetrics& m : r.levels) {
    os << "level" << m.level << "  bpp " << Fixed(m.point.bpp, 4) << "  psnr "
       << Fixed(m.point.psnr, 3) << "  ms_ssim " << Fixed(m.point.ms_ssim, 5)
       << "  coded " << m.coded << "  empty " << m.empty << "\n";
  }
  os << "all     bpp " << Fixed(r.aggregate.bpp, 4) << "  psnr "
     << Fixed(r.aggregate.psnr, 3) << "  ms_ssim "
     << Fixed(r.aggregate.ms_ssim, 5) << "\n";
}

void PrintChecks(std::ostream& os, const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
}

}  // namespace cleric::tools
