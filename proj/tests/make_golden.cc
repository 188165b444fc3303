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

// Regenerates the frozen format fixtures under tests/data/golden.

#include <filesystem>
#include <iostream>

#include "cleric/store.h"
#include "golden_fixtures.h"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  cleric::WriteWeights(cleric::test::GoldenWeights(), dir / "weights.clwt");
  cleric::WriteFileBytes(dir / "tile.cltb",
                         cleric::WriteTile(cleric::test::GoldenTile()));
  cleric::WriteFileBytes(dir / "container.clws",
                         cleric::test::GoldenContainer());
  return 0;
}
