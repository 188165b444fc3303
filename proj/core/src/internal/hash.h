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

#ifndef CLERIC_INTERNAL_HASH_H_
#define CLERIC_INTERNAL_HASH_H_

#include <array>
#include <cstdint>
#include <span>

namespace cleric::internal {

std::uint32_t Crc32(std::span<const std::uint8_t> data);
std::array<std::uint8_t, 32> Sha256(std::span<const std::uint8_t> data);

}  // namespace cleric::internal

#endif  // CLERIC_INTERNAL_HASH_H_
