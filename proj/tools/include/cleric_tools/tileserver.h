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

#ifndef CLERIC_TOOLS_TILESERVER_H_
#define CLERIC_TOOLS_TILESERVER_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cleric/codec.h"
#include "cleric/store.h"

namespace httplib {
class Server;
}

namespace cleric::tools {

struct TileKey {
  std::string slide;
  int level = 0;
  int col = 0;
  int row = 0;

  auto operator<=>(const TileKey&) const = default;
};

// LRU cache of encoded tile responses. Concurrent misses on the same key
// share one computation.
class TileCache {
 public:
  using Value = std::shared_ptr<const std::string>;

  explicit TileCache(std::size_t capacity) : capacity_(capacity) {}

  // Returns the cached value or runs `compute` once for all concurrent
  // callers. Exceptions propagate to every waiter and nothing is cached.
  Value GetOrCompute(const TileKey& key, const std::function<Value()>& compute);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  using Lru = std::list<std::pair<TileKey, Value>>;

  const std::size_t capacity_;
  mutable std::mutex mu_;
  Lru lru_;  // most recent first
  std::map<TileKey, Lru::iterator> index_;
  std::map<TileKey, std::shared_future<Value>> in_flight_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

struct SlideSpec {
  std::string id;
  std::filesystem::path container;
  std::filesystem::path weights;
};

// Every "<id>.clws" in `dir`, paired with "<id>.clwt" when present and
// "weights.clwt" otherwise. Sorted by id.
std::vector<SlideSpec> DiscoverSlides(const std::filesystem::path& dir);

struct HttpResponse {
  int status = 200;
  std::string content_type;
  std::shared_ptr<const std::string> body;
};

class TileService {
 public:
  // Opens every container up front; weights are loaded on first use.
  TileService(std::vector<SlideSpec> slides, std::size_t cache_tiles);
  ~TileService();

  HttpResponse ListSlides() const;
  HttpResponse Meta(const std::string& id) const;
  HttpResponse Tile(const std::string& id, int level, int col, int row);

  // Tiles actually decoded (cache misses that reached the codec).
  std::uint64_t decode_count() const { return decodes_; }
  const TileCache& cache() const { return cache_; }

 private:
  struct Slide;

  const Slide* Find(const std::string& id) const;
  std::shared_ptr<const Model> ModelFor(const Slide& s);

  std::map<std::string, std::unique_ptr<Slide>> slides_;
  std::mutex model_mu_;
  std::map<std::filesystem::path, std::shared_ptr<const Model>> models_;
  TileCache cache_;
  std::atomic<std::uint64_t> decodes_{0};
};

// GET /slides, /slides/{id}/meta, /slides/{id}/tiles/{level}/{col}/{row};
// static files from `static_dir` at "/".
void RegisterRoutes(httplib::Server& server, TileService& service,
                    const std::optional<std::filesystem::path>& static_dir);

}  // namespace cleric::tools

#endif  // CLERIC_TOOLS_TILESERVER_H_
