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

#include "cleric_tools/tileserver.h"

#include <algorithm>

#include "cleric/error.h"
#include "cleric/image.h"
#include "httplib.h"
#include "json.hpp"

namespace cleric::tools {

namespace fs = std::filesystem;
using json = nlohmann::json;

// --- cache -------------------------------------------------------------------

TileCache::Value TileCache::GetOrCompute(
    const TileKey& key, const std::function<Value()>& compute) {
  std::promise<Value> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->second;
    }
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      std::shared_future<Value> f = it->second;
      lock.unlock();
      ++hits_;
      return f.get();
    }
    in_flight_.emplace(key, promise.get_future().share());
    ++misses_;
  }
  Value value;
  try {
    value = compute();
  } catch (...) {
    std::lock_guard lock(mu_);
    in_flight_.erase(key);
    promise.set_exception(std::current_exception());
    throw;
  }
  std::lock_guard lock(mu_);
  in_flight_.erase(key);
  if (capacity_ > 0) {
    lru_.emplace_front(key, value);
    index_[key] = lru_.begin();
    while (lru_.size() > capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
  }
  promise.set_value(value);
  return value;
}

std::size_t TileCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

// --- registry ----------------------------------------------------------------

std::vector<SlideSpec> DiscoverSlides(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo,
                "slides dir is not a directory: " + dir.string());
  }
  std::vector<SlideSpec> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".clws") continue;
    SlideSpec s;
    s.id = e.path().stem().string();
    s.container = e.path();
    const fs::path own = dir / (s.id + ".clwt");
    s.weights = fs::exists(own) ? own : dir / "weights.clwt";
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const SlideSpec& a, const SlideSpec& b) { return a.id < b.id; });
  return out;
}

struct TileService::Slide {
  SlideSpec spec;
  ContainerReader reader;
};

namespace {

class WeightsUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HttpResponse JsonResponse(int status, const json& body) {
  return {status, "application/json",
          std::make_shared<const std::string>(body.dump())};
}

HttpResponse ErrorResponse(int status, const std::string& message) {
  return JsonResponse(status, json{{"error", message}});
}

json GridJson(std::size_t level, const LevelGrid& g) {
  return json{{"level", level},
              {"cols", g.cols},
              {"rows", g.rows},
              {"width", g.width},
              {"height", g.height},
              {"tile_width", g.tile_width},
              {"tile_height", g.tile_height}};
}

}  // namespace

TileService::TileService(std::vector<SlideSpec> slides, std::size_t cache_tiles)
    : cache_(cache_tiles) {
  for (SlideSpec& s : slides) {
    auto slide =
        std::make_unique<Slide>(Slide{s, ContainerReader::Open(s.container)});
    const std::string id = s.id;
    if (!slides_.emplace(id, std::move(slide)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate slide id " + id);
    }
  }
}

TileService::~TileService() = default;

const TileService::Slide* TileService::Find(const std::string& id) const {
  const auto it = slides_.find(id);
  return it == slides_.end() ? nullptr : it->second.get();
}

std::shared_ptr<const Model> TileService::ModelFor(const Slide& s) {
  std::lock_guard lock(model_mu_);
  if (auto it = models_.find(s.spec.weights); it != models_.end()) {
    if (it->second->codec_id() != s.reader.codec_id()) {
      throw WeightsUnavailable("weights do not match the slide codec id");
    }
    return it->second;
  }
  std::shared_ptr<const Model> model;
  try {
    model = std::make_shared<const Model>(
        Model::FromWeights(ReadWeights(s.spec.weights)));
  } catch (const std::exception& e) {
    throw WeightsUnavailable(std::string("weights failed to load: ") +
                             e.what());
  }
  models_.emplace(s.spec.weights, model);
  if (model->codec_id() != s.reader.codec_id()) {
    throw WeightsUnavailable("weights do not match the slide codec id");
  }
  return model;
}

HttpResponse TileService::ListSlides() const {
  json list = json::array();
  for (const auto& [id, s] : slides_) {
    json grids = json::array();
    for (std::size_t l = 0; l < s->reader.level_count(); ++l) {
      grids.push_back(GridJson(l, s->reader.level(l)));
    }
    const std::uint32_t tile_size =
        s->reader.level_count() ? s->reader.level(0).tile_width : 0;
    list.push_back(json{{"id", id},
                        {"levels", s->reader.level_count()},
                        {"tile_size", tile_size},
                        {"grids", grids}});
  }
  return JsonResponse(200, list);
}

HttpResponse TileService::Meta(const std::string& id) const {
  const Slide* s = Find(id);
  if (s == nullptr) return ErrorResponse(404, "unknown slide " + id);
  json levels = json::array();
  for (std::size_t l = 0; l < s->reader.level_count(); ++l) {
    levels.push_back(GridJson(l, s->reader.level(l)));
  }
  const std::uint32_t tile_size =
      s->reader.level_count() ? s->reader.level(0).tile_width : 0;
  return JsonResponse(200,
                      json{{"id", id},
                           {"level_count", s->reader.level_count()},
                           {"levels", levels},
                           {"tile_size", tile_size},
                           {"codec_id", CodecIdHex(s->reader.codec_id())}});
}

HttpResponse TileService::Tile(const std::string& id, int level, int col,
                               int row) {
  const Slide* s = Find(id);
  if (s == nullptr) return ErrorResponse(404, "unknown slide " + id);
  if (level < 0 || static_cast<std::size_t>(level) >= s->reader.level_count()) {
    return ErrorResponse(404, "level out of range");
  }
  const LevelGrid& g = s->reader.level(level);
  if (col < 0 || row < 0 || static_cast<std::uint32_t>(col) >= g.cols ||
      static_cast<std::uint32_t>(row) >= g.rows) {
    return ErrorResponse(404, "tile out of range");
  }
  std::shared_ptr<const Model> model;
  try {
    model = ModelFor(*s);
  } catch (const WeightsUnavailable& e) {
    return ErrorResponse(503, e.what());
  }
  try {
    TileCache::Value png =
        cache_.GetOrCompute(TileKey{id, level, col, row}, [&] {
          const auto c = static_cast<std::uint32_t>(col);
          const auto r = static_cast<std::uint32_t>(row);
          const std::optional<TileBitstream> bs =
              s->reader.FetchTile(level, c, r);
          Image8 img;
          if (bs) {
            ++decodes_;
            img = TensorToImage(DecodeTile(*bs, *model).image);
          } else {
            img = Image8::Filled(
                static_cast<int>(
                    std::min(g.tile_width, g.width - c * g.tile_width)),
                static_cast<int>(
                    std::min(g.tile_height, g.height - r * g.tile_height)),
                3, 255);
          }
          return std::make_shared<const std::string>([&] {
            const Bytes b = EncodePng(img);
            return std::string(b.begin(), b.end());
          }());
        });
    return {200, "image/png", png};
  } catch (const std::exception& e) {
    return ErrorResponse(500, e.what());
  }
}

// --- http --------------------------------------------------------------------

namespace {

void Send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(*r.body, r.content_type);
}

}  // namespace

void RegisterRoutes(httplib::Server& server, TileService& service,
                    const std::optional<fs::path>& static_dir) {
  server.Get("/slides",
             [&service](const httplib::Request&, httplib::Response& res) {
               Send(res, service.ListSlides());
             });
  server.Get(R"(/slides/([^/]+)/meta)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               Send(res, service.Meta(req.matches[1]));
             });
  server.Get(R"(/slides/([^/]+)/tiles/(\d{1,6})/(\d{1,9})/(\d{1,9}))",
             [&service](const httplib::Request& req, httplib::Response& res) {
               Send(res, service.Tile(req.matches[1], std::stoi(req.matches[2]),
                                      std::stoi(req.matches[3]),
                                      std::stoi(req.matches[4])));
             });
  if (static_dir && fs::is_directory(*static_dir)) {
    server.set_mount_point("/", static_dir->string());
  }
}

}  // namespace cleric::tools
