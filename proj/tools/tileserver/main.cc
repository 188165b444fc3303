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

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cleric_tools/tileserver.h"
#include "httplib.h"

namespace {

httplib::Server* g_server = nullptr;

void Stop(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLERIC tile server"};
  int port = 8080;
  std::string host = "0.0.0.0";
  std::string slides_dir;
  std::size_t cache_tiles = 256;
  std::string static_dir = CLERIC_DEFAULT_STATIC_DIR;
  app.add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "Listen address");
  app.add_option("--slides-dir", slides_dir,
                 "Directory of <id>.clws containers and weight files")
      ->required()
      ->check(CLI::ExistingDirectory);
  app.add_option("--cache-tiles", cache_tiles, "Decoded-tile LRU capacity");
  app.add_option("--static-dir", static_dir, "Viewer assets served at /");
  CLI11_PARSE(app, argc, argv);

  try {
    cleric::tools::TileService service(
        cleric::tools::DiscoverSlides(slides_dir), cache_tiles);
    httplib::Server server;
    cleric::tools::RegisterRoutes(
        server, service, std::optional<std::filesystem::path>(static_dir));
    g_server = &server;
    std::signal(SIGINT, Stop);
    std::signal(SIGTERM, Stop);
    if (port == 0) {
      port = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
      std::cerr << "error: cannot bind " << host << ":" << port << "\n";
      return 2;
    }
    std::cout << "listening on " << host << ":" << port << std::endl;
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
