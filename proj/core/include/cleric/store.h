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

#ifndef CLERIC_STORE_H_
#define CLERIC_STORE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cleric/config.h"
#include "cleric/entropy.h"
#include "cleric/tensor.h"

namespace cleric {

using CodecId = std::array<std::uint8_t, 32>;
using Bytes = std::vector<std::uint8_t>;

std::string CodecIdHex(const CodecId& id);

inline constexpr std::uint32_t kWeightFormatVersion = 1;
inline constexpr std::uint16_t kTileFormatVersion = 1;
inline constexpr std::uint32_t kContainerFormatVersion = 1;

// Every learned parameter, the codec hyperparameters and the factorized
// hyperprior tables (one per hyperlatent channel). The codec id is the
// SHA-256 of the canonical serialization and is recomputed on demand.
class WeightStore {
 public:
  CodecConfig config;
  std::map<std::string, Tensor> tensors;
  std::vector<CdfTable> factorized;

  // Throws kMissingParameter naming the first absent tensor.
  const Tensor& Get(const std::string& name) const;

  Bytes Serialize() const;
  CodecId Id() const;

  struct ParseOptions {
    // Compare the trailing SHA-256 against the contents.
    bool verify_hash = true;
    // Verify every factorized table against the CdfTable invariants.
    bool validate_tables = true;
    // Check that the architecture's required tensors are present with the
    // right shapes.
    bool check_layout = true;
  };
  static WeightStore Parse(std::span<const std::uint8_t> bytes,
                           const ParseOptions& options);
  static WeightStore Parse(std::span<const std::uint8_t> bytes) {
    return Parse(bytes, ParseOptions{});
  }

  bool operator==(const WeightStore&) const = default;
};

void WriteWeights(const WeightStore& w, const std::filesystem::path& path);
WeightStore ReadWeights(const std::filesystem::path& path,
                        const WeightStore::ParseOptions& options);
WeightStore ReadWeights(const std::filesystem::path& path);

// One entropy-coded tile. The flags byte records the architecture toggles
// the tile was coded with.
struct TileBitstream {
  CodecId codec_id{};
  std::uint8_t flags = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t padded_height = 0;
  std::uint32_t padded_width = 0;
  double lambda = 0;
  Bytes z_payload;
  std::vector<Bytes> y_payloads;  // one per channel slice

  bool operator==(const TileBitstream&) const = default;
};

// Smallest multiple of 64 that is >= v.
std::uint32_t PadTo64(std::uint32_t v);

Bytes WriteTile(const TileBitstream& t);
// Throws kBadMagic, kVersionMismatch, kTruncated, kCrcMismatch or kCorrupt.
TileBitstream ReadTile(std::span<const std::uint8_t> bytes);
// ReadTile plus a kCodecIdMismatch check against the loaded weights.
TileBitstream ReadTile(std::span<const std::uint8_t> bytes,
                       const CodecId& expected);

struct LevelGrid {
  std::uint32_t cols = 0;
  std::uint32_t rows = 0;
  std::uint32_t tile_width = 0;
  std::uint32_t tile_height = 0;
  std::uint32_t width = 0;   // level pixel width
  std::uint32_t height = 0;  // level pixel height

  std::size_t tile_count() const {
    return static_cast<std::size_t>(cols) * rows;
  }
  bool operator==(const LevelGrid&) const = default;
};

// Input to BuildContainer: tiles in row-major order, nullopt marks an empty
// (background) tile.
struct LevelTiles {
  LevelGrid grid;
  std::vector<std::optional<Bytes>> tiles;
};

Bytes BuildContainer(const CodecId& codec_id,
                     std::span<const LevelTiles> levels);

struct TileIndexEntry {
  std::uint64_t offset = 0;  // relative to the payload region
  std::uint64_t length = 0;
  bool empty = false;
};

// Read-only view of a pyramid container: header and index are parsed up
// front, tile payloads are read on demand with positional reads, so one
// reader may be shared by any number of threads.
class ContainerReader {
 public:
  static ContainerReader Open(const std::filesystem::path& path);
  static ContainerReader FromBytes(Bytes bytes);

  ContainerReader(ContainerReader&&) noexcept;
  ContainerReader& operator=(ContainerReader&&) noexcept;
  ~ContainerReader();

  const CodecId& codec_id() const { return codec_id_; }
  std::size_t level_count() const { return levels_.size(); }
  const LevelGrid& level(std::size_t l) const;
  std::size_t entry_count() const { return index_.size(); }
  const TileIndexEntry& entry(std::size_t level, std::uint32_t col,
                              std::uint32_t row) const;
  // Sum of non-empty tile lengths on one level.
  std::uint64_t LevelPayloadBytes(std::size_t level) const;

  // nullopt for empty-flagged tiles, which never touch the payload region.
  std::optional<Bytes> FetchTileBytes(std::size_t level, std::uint32_t col,
                                      std::uint32_t row) const;
  std::optional<TileBitstream> FetchTile(std::size_t level, std::uint32_t col,
                                         std::uint32_t row) const;

  // Payload bytes read so far, across all threads.
  std::uint64_t payload_bytes_read() const;

 private:
  ContainerReader() = default;
  void ParseHeader(std::span<const std::uint8_t> head, std::uint64_t file_size);
  std::size_t FlatIndex(std::size_t level, std::uint32_t col,
                        std::uint32_t row) const;

  struct Source;
  std::unique_ptr<Source> source_;
  CodecId codec_id_{};
  std::vector<LevelGrid> levels_;
  std::vector<std::size_t> level_base_;
  std::vector<TileIndexEntry> index_;
  std::uint64_t payload_start_ = 0;
};

Bytes ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace cleric

#endif  // CLERIC_STORE_H_
