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

#ifndef CLERIC_RNG_H_
#define CLERIC_RNG_H_

#include <cstdint>
#include <random>

namespace cleric {

// Seeded generator whose output sequence is fixed by the standard
// (mt19937_64) and converted to floats without <random> distributions, so
// the same seed gives the same numbers with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 24 bits of resolution.
  float Uniform01() {
    return static_cast<float>(engine_() >> 40) * (1.0f / 16777216.0f);
  }
  // Uniform in [-a, a).
  float Symmetric(float a) { return (2.0f * Uniform01() - 1.0f) * a; }
  std::uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cleric

#endif  // CLERIC_RNG_H_
