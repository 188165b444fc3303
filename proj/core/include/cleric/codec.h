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

#ifndef CLERIC_CODEC_H_
#define CLERIC_CODEC_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cleric/blocks.h"
#include "cleric/config.h"
#include "cleric/entropy.h"
#include "cleric/lifting.h"
#include "cleric/rng.h"
#include "cleric/store.h"
#include "cleric/tensor.h"

namespace cleric {

// ---------------------------------------------------------------------------
// Parameter layout

enum class InitKind { kUniform, kZero };

struct ParamSpec {
  std::string name;
  Shape shape;
  InitKind init = InitKind::kUniform;
  int fan_in = 1;
};

// Every tensor the configured architecture reads. Only lifting_enabled
// changes the layout; the DRB and R2B toggles reuse the same tensors.
std::vector<ParamSpec> RequiredParameters(const CodecConfig& cfg);

// Checks names and shapes; throws kMissingParameter / kShapeMismatch.
void CheckLayout(const WeightStore& w);

// Deterministic stand-in for trained weights: small uniform values scaled by
// 1/sqrt(fan_in), with the refinement output layer and the DCN offset nets
// zeroed. Factorized tables are discretized logistics with seeded scales.
WeightStore MakeSeededWeights(const CodecConfig& cfg, std::uint64_t seed);

inline constexpr int kFactorizedSupport = 64;

// ---------------------------------------------------------------------------
// Network

struct EncoderBranch {
  std::vector<DrbsParams> down;
  std::vector<R2bParams> refine;  // one fewer than `down`
};

struct DecoderTrunk {
  std::vector<DrbuParams> up;
  std::vector<R2bParams> refine;
};

struct HyperEncoder {
  ConvSpec conv0, conv1, conv2;
};

struct HyperDecoder {
  ConvSpec conv0, conv1, conv2, conv3;
};

struct SliceNet {
  ConvSpec conv0, conv1, conv2;
};

struct ModelParams {
  LiftingStage lifting;
  std::vector<EncoderBranch> encoder;  // {low, high} or {main}
  DecoderTrunk decoder;
  HyperEncoder hyper_encoder;
  HyperDecoder hyper_decoder;
  std::vector<SliceNet> slice_nets;
  std::vector<CdfTable> factorized;
};

// Immutable, cheaply copyable handle: parameters are shared, the config (and
// with it the ablation toggles) is per copy.
class Model {
 public:
  static Model FromWeights(const WeightStore& w);

  const CodecConfig& config() const { return config_; }
  const ModelParams& params() const { return *params_; }
  const CodecId& codec_id() const { return codec_id_; }

  // Same parameters with different DRB / R2B toggles. The lifting toggle
  // changes the layout and cannot be flipped here.
  Model WithToggles(bool drb_enabled, bool r2b_enabled) const;
  Model WithToggleBits(std::uint8_t bits) const;

 private:
  CodecConfig config_;
  std::shared_ptr<const ModelParams> params_;
  CodecId codec_id_{};
};

// x is (b, 3, H, W) in [0, 1] with H, W divisible by 64 (16 without the
// hyperprior). Returns y of shape (b, M, H/16, W/16).
Tensor AnalysisTransform(const Tensor& x, const Model& model);
// (b, M, h, w) -> (b, 3, 16h, 16w), clamped to [0, 1].
Tensor SynthesisTransform(const Tensor& y_hat, const Model& model);
// (b, M, h, w) -> z (b, N, h/4, w/4).
Tensor HyperEncode(const Tensor& y, const Model& model);
// (b, N, h/4, w/4) -> psi (b, 2M, h, w).
Tensor HyperDecode(const Tensor& z_hat, const Model& model);

struct EntropyParams {
  Tensor mu;
  Tensor sigma;
};

inline constexpr float kSigmaMin = 0.11f;
inline constexpr float kSigmaMax = 256.0f;

// Gaussian parameters for slice `slice_idx` from psi and exactly
// `slice_idx` previously reconstructed slices. sigma = clamp(exp(raw)).
EntropyParams SliceParams(const Tensor& psi,
                          std::span<const Tensor> decoded_slices, int slice_idx,
                          const Model& model);

enum class QuantMode { kRound, kNoise };

// kRound: round_half_away(v - mu) + mu. kNoise: v + U(-0.5, 0.5) drawn from
// `rng` (required). `mu` may be empty (zero) or match v's shape.
Tensor Quantize(const Tensor& v, QuantMode mode, const Tensor& mu = Tensor(),
                Rng* rng = nullptr);

struct LatentPack {
  Tensor y;
  Tensor y_hat;
  Tensor z;
  Tensor z_hat;
};

// Integer symbols as written to / read from the entropy coder.
struct TileSymbols {
  std::vector<std::int32_t> z;
  std::vector<std::vector<std::int32_t>> y_slices;

  bool operator==(const TileSymbols&) const = default;
};

struct EncodedTile {
  TileBitstream bitstream;
  TileSymbols symbols;
  LatentPack latents;
  double estimated_bits_y = 0;
  double estimated_bits_z = 0;
};

// Called by the decoder before computing each slice's parameters with the
// slice index and the number of slices visible to it.
using SliceObserver = std::function<void(int slice_idx, int visible_slices)>;

struct DecodedTile {
  Tensor image;  // (1, 3, height, width), cropped to the original size
  TileSymbols symbols;
  Tensor y_hat;
};

// `image` is (1, 3, H, W) in [0, 1], any H, W >= 1; it is replicate-padded
// to multiples of 64.
EncodedTile EncodeTile(const Tensor& image, const Model& model);
DecodedTile DecodeTile(const TileBitstream& bitstream, const Model& model,
                       const SliceObserver& observer = {});

}  // namespace cleric

#endif  // CLERIC_CODEC_H_
