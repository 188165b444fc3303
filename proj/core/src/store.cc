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

#include "cleric/store.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <string>

#include "cleric/codec.h"
#include "cleric/error.h"
#include "internal/bytes.h"
#include "internal/hash.h"

namespace cleric {
namespace {

using internal::ByteReader;
using internal::ByteWriter;

constexpr char kWeightMagic[] = "CLWT";
constexpr char kTileMagic[] = "CLTB";
constexpr char kContainerMagic[] = "CLWS";

void ExpectMagic(ByteReader& r, const char* magic, const char* what) {
  if (r.Str(4) != magic) {
    throw Error(ErrorCode::kBadMagic,
                std::string(what) + " lacks magic " + magic);
  }
}

CodecId ReadId(ByteReader& r) {
  CodecId id;
  auto b = r.Bytes(id.size());
  std::copy(b.begin(), b.end(), id.begin());
  return id;
}

void WriteConfig(ByteWriter& w, const CodecConfig& c) {
  w.U32(static_cast<std::uint32_t>(c.n));
  w.U32(static_cast<std::uint32_t>(c.m));
  w.U32(static_cast<std::uint32_t>(c.t));
  w.U32(static_cast<std::uint32_t>(c.slices));
  w.U8(c.ToggleBits());
  w.F64(c.lambda);
}

CodecConfig ReadConfig(ByteReader& r) {
  CodecConfig c;
  c.n = static_cast<int>(r.U32());
  c.m = static_cast<int>(r.U32());
  c.t = static_cast<int>(r.U32());
  c.slices = static_cast<int>(r.U32());
  c.SetToggleBits(r.U8());
  c.lambda = r.F64();
  try {
    c.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("weight config: ") + e.what());
  }
  return c;
}

Bytes SerializeBody(const WeightStore& ws) {
  ByteWriter w;
  w.Str(kWeightMagic);
  w.U32(kWeightFormatVersion);
  WriteConfig(w, ws.config);
  w.U32(static_cast<std::uint32_t>(ws.tensors.size()));
  for (const auto& [name, t] : ws.tensors) {
    if (name.size() > 0xFFFF) {
      throw Error(ErrorCode::kInvalidArgument, "tensor name too long");
    }
    w.U16(static_cast<std::uint16_t>(name.size()));
    w.Str(name);
    const Shape& s = t.shape();
    for (int d : {s.n, s.c, s.h, s.w}) w.U32(static_cast<std::uint32_t>(d));
    for (float v : t.values()) w.F32(v);
  }
  w.U32(static_cast<std::uint32_t>(ws.factorized.size()));
  for (const CdfTable& table : ws.factorized) {
    w.I32(table.min_symbol);
    w.U32(static_cast<std::uint32_t>(table.num_symbols()));
    for (std::uint32_t v : table.cdf) w.U32(v);
  }
  return w.Take();
}

}  // namespace

std::string CodecIdHex(const CodecId& id) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (std::uint8_t b : id) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 15]);
  }
  return s;
}

const Tensor& WeightStore::Get(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw Error(ErrorCode::kMissingParameter, name);
  }
  return it->second;
}

Bytes WeightStore::Serialize() const {
  Bytes body = SerializeBody(*this);
  const CodecId id = internal::Sha256(body);
  body.insert(body.end(), id.begin(), id.end());
  return body;
}

CodecId WeightStore::Id() const {
  return internal::Sha256(SerializeBody(*this));
}

WeightStore WeightStore::Parse(std::span<const std::uint8_t> bytes,
                               const ParseOptions& options) {
  ByteReader r(bytes, "weight file");
  ExpectMagic(r, kWeightMagic, "weight file");
  const std::uint32_t version = r.U32();
  if (version != kWeightFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "weight file version " + std::to_string(version));
  }
  if (bytes.size() < 32) {
    throw Error(ErrorCode::kTruncated, "weight file ends early");
  }
  const auto body = bytes.first(bytes.size() - 32);
  const CodecId stored = [&] {
    CodecId id;
    std::copy(bytes.end() - 32, bytes.end(), id.begin());
    return id;
  }();
  if (options.verify_hash && internal::Sha256(body) != stored) {
    throw Error(ErrorCode::kHashMismatch,
                "weight file codec id does not match its contents");
  }

  ByteReader br(body, "weight file");
  br.Bytes(8);
  WeightStore ws;
  ws.config = ReadConfig(br);
  const std::uint32_t count = br.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = br.Str(br.U16());
    Shape s;
    s.n = static_cast<int>(br.U32());
    s.c = static_cast<int>(br.U32());
    s.h = static_cast<int>(br.U32());
    s.w = static_cast<int>(br.U32());
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0 ||
        s.numel() * 4 > br.remaining()) {
      throw Error(ErrorCode::kCorrupt, "tensor " + name + " has bad shape");
    }
    std::vector<float> data(s.numel());
    for (float& v : data) v = br.F32();
    if (!ws.tensors.emplace(name, Tensor(s, std::move(data))).second) {
      throw Error(ErrorCode::kCorrupt, "duplicate tensor " + name);
    }
  }
  const std::uint32_t tables = br.U32();
  for (std::uint32_t i = 0; i < tables; ++i) {
    CdfTable t;
    t.min_symbol = br.I32();
    const std::uint32_t n = br.U32();
    if (static_cast<std::uint64_t>(n + 1) * 4 > br.remaining()) {
      throw Error(ErrorCode::kCorrupt, "factorized table too long");
    }
    t.cdf.resize(n + 1);
    for (auto& v : t.cdf) v = br.U32();
    if (options.validate_tables) t.Validate();
    ws.factorized.push_back(std::move(t));
  }
  if (br.remaining() != 0) {
    throw Error(ErrorCode::kCorrupt, "trailing bytes in weight file");
  }
  if (options.check_layout) CheckLayout(ws);
  return ws;
}

void WriteWeights(const WeightStore& w, const std::filesystem::path& path) {
  WriteFileBytes(path, w.Serialize());
}

WeightStore ReadWeights(const std::filesystem::path& path,
                        const WeightStore::ParseOptions& options) {
  return WeightStore::Parse(ReadFileBytes(path), options);
}

WeightStore ReadWeights(const std::filesystem::path& path) {
  return ReadWeights(path, WeightStore::ParseOptions{});
}

std::uint32_t PadTo64(std::uint32_t v) { return (v + 63u) / 64u * 64u; }

Bytes WriteTile(const TileBitstream& t) {
  ByteWriter w;
  w.Str(kTileMagic);
  w.U16(kTileFormatVersion);
  w.U8(t.flags);
  w.U8(0);
  w.Bytes(t.codec_id);
  w.U32(t.height);
  w.U32(t.width);
  w.U32(t.padded_height);
  w.U32(t.padded_width);
  w.F64(t.lambda);
  w.U32(static_cast<std::uint32_t>(t.z_payload.size()));
  w.Bytes(t.z_payload);
  w.U32(static_cast<std::uint32_t>(t.y_payloads.size()));
  for (const Bytes& p : t.y_payloads) {
    w.U32(static_cast<std::uint32_t>(p.size()));
    w.Bytes(p);
  }
  const std::uint32_t crc = internal::Crc32(w.buffer());
  w.U32(crc);
  return w.Take();
}

TileBitstream ReadTile(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "tile bitstream");
  ExpectMagic(r, kTileMagic, "tile bitstream");
  const std::uint16_t version = r.U16();
  if (version != kTileFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "tile version " + std::to_string(version));
  }
  if (bytes.size() < 8) throw Error(ErrorCode::kTruncated, "tile ends early");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4), "tile crc");
  if (internal::Crc32(body) != tail.U32()) {
    throw Error(ErrorCode::kCrcMismatch, "tile bitstream crc check failed");
  }
  ByteReader br(body, "tile bitstream");
  br.Bytes(6);
  TileBitstream t;
  t.flags = br.U8();
  br.U8();
  t.codec_id = ReadId(br);
  t.height = br.U32();
  t.width = br.U32();
  t.padded_height = br.U32();
  t.padded_width = br.U32();
  t.lambda = br.F64();
  auto z = br.Bytes(br.U32());
  t.z_payload.assign(z.begin(), z.end());
  const std::uint32_t slices = br.U32();
  if (slices > br.remaining() / 4) {
    throw Error(ErrorCode::kCorrupt, "tile slice count too large");
  }
  for (std::uint32_t i = 0; i < slices; ++i) {
    auto p = br.Bytes(br.U32());
    t.y_payloads.emplace_back(p.begin(), p.end());
  }
  if (br.remaining() != 0) {
    throw Error(ErrorCode::kCorrupt, "trailing bytes in tile bitstream");
  }
  if (t.height == 0 || t.width == 0 || t.padded_height != PadTo64(t.height) ||
      t.padded_width != PadTo64(t.width)) {
    throw Error(ErrorCode::kCorrupt, "tile dimensions inconsistent");
  }
  return t;
}

TileBitstream ReadTile(std::span<const std::uint8_t> bytes,
                       const CodecId& expected) {
  TileBitstream t = ReadTile(bytes);
  if (t.codec_id != expected) {
    throw Error(ErrorCode::kCodecIdMismatch,
                "tile coded with " + CodecIdHex(t.codec_id) + ", weights are " +
                    CodecIdHex(expected));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Pyramid container

Bytes BuildContainer(const CodecId& codec_id,
                     std::span<const LevelTiles> levels) {
  ByteWriter w;
  w.Str(kContainerMagic);
  w.U32(kContainerFormatVersion);
  w.Bytes(codec_id);
  w.U32(static_cast<std::uint32_t>(levels.size()));
  for (const LevelTiles& l : levels) {
    const LevelGrid& g = l.grid;
    if (l.tiles.size() != g.tile_count()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "level grid " + std::to_string(g.cols) + "x" +
                      std::to_string(g.rows) + " but " +
                      std::to_string(l.tiles.size()) + " tiles");
    }
    if (g.cols == 0 || g.rows == 0 || g.tile_width == 0 || g.tile_height == 0) {
      throw Error(ErrorCode::kInvalidArgument, "empty level grid");
    }
    for (std::uint32_t v :
         {g.cols, g.rows, g.tile_width, g.tile_height, g.width, g.height}) {
      w.U32(v);
    }
  }
  std::uint64_t offset = 0;
  for (const LevelTiles& l : levels) {
    for (const auto& tile : l.tiles) {
      if (tile && tile->empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "non-empty tile entry with zero bytes");
      }
      const std::uint64_t len = tile ? tile->size() : 0;
      w.U64(tile ? offset : 0);
      w.U64(len);
      w.U8(tile ? 0 : 1);
      offset += len;
    }
  }
  w.U32(internal::Crc32(w.buffer()));
  for (const LevelTiles& l : levels) {
    for (const auto& tile : l.tiles) {
      if (tile) w.Bytes(*tile);
    }
  }
  return w.Take();
}

struct ContainerReader::Source {
  Bytes memory;
  int fd = -1;
  std::atomic<std::uint64_t> bytes_read{0};

  ~Source() {
    if (fd >= 0) ::close(fd);
  }

  void ReadAt(std::uint64_t pos, std::uint8_t* dst, std::size_t n) const {
    if (fd < 0) {
      if (pos > memory.size() || n > memory.size() - pos) {
        throw Error(ErrorCode::kTruncated, "container ends early");
      }
      std::copy_n(memory.data() + pos, n, dst);
      return;
    }
    std::size_t done = 0;
    while (done < n) {
      const ssize_t got =
          ::pread(fd, dst + done, n - done, static_cast<off_t>(pos + done));
      if (got < 0) throw Error(ErrorCode::kIo, "container read failed");
      if (got == 0) throw Error(ErrorCode::kTruncated, "container ends early");
      done += static_cast<std::size_t>(got);
    }
  }
};

ContainerReader::ContainerReader(ContainerReader&&) noexcept = default;
ContainerReader& ContainerReader::operator=(ContainerReader&&) noexcept =
    default;
ContainerReader::~ContainerReader() = default;

ContainerReader ContainerReader::FromBytes(Bytes bytes) {
  ContainerReader r;
  r.source_ = std::make_unique<Source>();
  r.source_->memory = std::move(bytes);
  const Bytes& mem = r.source_->memory;
  r.ParseHeader(mem, mem.size());
  return r;
}

ContainerReader ContainerReader::Open(const std::filesystem::path& path) {
  ContainerReader r;
  r.source_ = std::make_unique<Source>();
  r.source_->fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (r.source_->fd < 0) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  struct stat st{};
  if (::fstat(r.source_->fd, &st) != 0) {
    throw Error(ErrorCode::kIo, "cannot stat " + path.string());
  }
  const auto size = static_cast<std::uint64_t>(st.st_size);
  // Fixed prefix: magic, version, codec id, level count.
  constexpr std::size_t kPrefix = 4 + 4 + 32 + 4;
  if (size < kPrefix)
    throw Error(ErrorCode::kTruncated, "container ends early");
  Bytes prefix(kPrefix);
  r.source_->ReadAt(0, prefix.data(), prefix.size());
  ByteReader pr(prefix, "container header");
  pr.Bytes(40);
  const std::uint64_t levels = pr.U32();
  if (levels > (size - kPrefix) / 24) {
    throw Error(ErrorCode::kCorrupt, "container level count too large");
  }
  Bytes grids(static_cast<std::size_t>(levels) * 24);
  r.source_->ReadAt(kPrefix, grids.data(), grids.size());
  std::uint64_t tiles = 0;
  for (std::size_t l = 0; l < levels; ++l) {
    ByteReader gr(std::span<const std::uint8_t>(grids).subspan(l * 24, 8),
                  "container grid");
    tiles += static_cast<std::uint64_t>(gr.U32()) * gr.U32();
  }
  const std::uint64_t head_size = kPrefix + grids.size() + tiles * 17 + 4;
  if (head_size > size)
    throw Error(ErrorCode::kTruncated, "container ends early");
  Bytes head(head_size);
  r.source_->ReadAt(0, head.data(), head.size());
  r.ParseHeader(head, size);
  return r;
}

void ContainerReader::ParseHeader(std::span<const std::uint8_t> head,
                                  std::uint64_t file_size) {
  ByteReader r(head, "container header");
  ExpectMagic(r, kContainerMagic, "container");
  const std::uint32_t version = r.U32();
  if (version != kContainerFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "container version " + std::to_string(version));
  }
  codec_id_ = ReadId(r);
  const std::uint32_t levels = r.U32();
  if (levels > r.remaining() / 24) {
    throw Error(ErrorCode::kCorrupt, "container level count too large");
  }
  std::uint64_t total_tiles = 0;
  for (std::uint32_t l = 0; l < levels; ++l) {
    LevelGrid g;
    g.cols = r.U32();
    g.rows = r.U32();
    g.tile_width = r.U32();
    g.tile_height = r.U32();
    g.width = r.U32();
    g.height = r.U32();
    level_base_.push_back(static_cast<std::size_t>(total_tiles));
    total_tiles += g.tile_count();
    levels_.push_back(g);
  }
  if (total_tiles > r.remaining() / 17) {
    throw Error(ErrorCode::kTruncated, "container index ends early");
  }
  index_.resize(static_cast<std::size_t>(total_tiles));
  for (TileIndexEntry& e : index_) {
    e.offset = r.U64();
    e.length = r.U64();
    const std::uint8_t flags = r.U8();
    if (flags > 1) throw Error(ErrorCode::kCorrupt, "bad tile flags");
    e.empty = flags == 1;
  }
  const std::size_t crc_pos = r.pos();
  if (internal::Crc32(head.first(crc_pos)) != r.U32()) {
    throw Error(ErrorCode::kCrcMismatch, "container header crc check failed");
  }
  payload_start_ = r.pos();
  std::uint64_t next = 0;
  for (const TileIndexEntry& e : index_) {
    if (e.empty) {
      if (e.length != 0 || e.offset != 0) {
        throw Error(ErrorCode::kCorrupt, "empty tile with payload");
      }
      continue;
    }
    if (e.length == 0 || e.offset < next) {
      throw Error(ErrorCode::kCorrupt, "overlapping tile index entries");
    }
    next = e.offset + e.length;
  }
  if (payload_start_ + next > file_size) {
    throw Error(ErrorCode::kTruncated, "container payload ends early");
  }
}

const LevelGrid& ContainerReader::level(std::size_t l) const {
  if (l >= levels_.size()) {
    throw Error(ErrorCode::kOutOfRange, "level " + std::to_string(l));
  }
  return levels_[l];
}

std::size_t ContainerReader::FlatIndex(std::size_t level, std::uint32_t col,
                                       std::uint32_t row) const {
  const LevelGrid& g = this->level(level);
  if (col >= g.cols || row >= g.rows) {
    throw Error(ErrorCode::kOutOfRange, "tile (" + std::to_string(col) + ", " +
                                            std::to_string(row) + ") outside " +
                                            std::to_string(g.cols) + "x" +
                                            std::to_string(g.rows) + " grid");
  }
  return level_base_[level] + static_cast<std::size_t>(row) * g.cols + col;
}

const TileIndexEntry& ContainerReader::entry(std::size_t level,
                                             std::uint32_t col,
                                             std::uint32_t row) const {
  return index_[FlatIndex(level, col, row)];
}

std::uint64_t ContainerReader::LevelPayloadBytes(std::size_t level) const {
  const LevelGrid& g = this->level(level);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < g.tile_count(); ++i) {
    sum += index_[level_base_[level] + i].length;
  }
  return sum;
}

std::optional<Bytes> ContainerReader::FetchTileBytes(std::size_t level,
                                                     std::uint32_t col,
                                                     std::uint32_t row) const {
  const TileIndexEntry& e = entry(level, col, row);
  if (e.empty) return std::nullopt;
  Bytes out(static_cast<std::size_t>(e.length));
  source_->ReadAt(payload_start_ + e.offset, out.data(), out.size());
  source_->bytes_read += e.length;
  return out;
}

std::optional<TileBitstream> ContainerReader::FetchTile(
    std::size_t level, std::uint32_t col, std::uint32_t row) const {
  auto bytes = FetchTileBytes(level, col, row);
  if (!bytes) return std::nullopt;
  return ReadTile(*bytes, codec_id_);
}

std::uint64_t ContainerReader::payload_bytes_read() const {
  return source_->bytes_read.load();
}

Bytes ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0);
  Bytes out(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), size)) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  return out;
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  // Written to a sibling temp file, then renamed into place.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename to " + path.string());
}

}  // namespace cleric
