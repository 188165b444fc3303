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

#include "cleric/tensor.h"

#include <cmath>
#include <sstream>

#include "cleric/error.h"

namespace cleric {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kShapeMismatch:
      return "shape mismatch";
    case ErrorCode::kOutOfRange:
      return "out of range";
    case ErrorCode::kBadMagic:
      return "bad magic";
    case ErrorCode::kVersionMismatch:
      return "version mismatch";
    case ErrorCode::kHashMismatch:
      return "hash mismatch";
    case ErrorCode::kCrcMismatch:
      return "crc mismatch";
    case ErrorCode::kCodecIdMismatch:
      return "codec-id mismatch";
    case ErrorCode::kMissingParameter:
      return "missing parameter";
    case ErrorCode::kTruncated:
      return "truncated";
    case ErrorCode::kCorrupt:
      return "corrupt";
    case ErrorCode::kIo:
      return "i/o";
  }
  return "unknown";
}

std::string Shape::ToString() const {
  std::ostringstream os;
  os << n << "x" << c << "x" << h << "x" << w;
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "negative tensor dimension " + shape.ToString());
  }
  data_.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape.numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size()) +
                    " does not match shape " + shape.ToString());
  }
}

bool Tensor::AllFinite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void CheckNonEmpty(const Tensor& t, const char* what) {
  const Shape& s = t.shape();
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": empty tensor " + s.ToString());
  }
}

}  // namespace cleric
