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

#include "cleric/codec.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cleric/error.h"

namespace cleric {
namespace {

constexpr std::uint8_t kToggleLifting = 1;
constexpr std::uint8_t kToggleDrb = 2;
constexpr std::uint8_t kToggleR2b = 4;

// --- layout builder ---------------------------------------------------------

class LayoutBuilder {
 public:
  void Conv(const std::string& prefix, int out_ch, int in_ch, int k,
            InitKind init = InitKind::kUniform) {
    const int fan_in = in_ch * k * k;
    specs_.push_back(
        {prefix + ".weight", Shape{out_ch, in_ch, k, k}, init, fan_in});
    specs_.push_back({prefix + ".bias", Shape{1, out_ch, 1, 1}, init, fan_in});
  }
  void Dcn(const std::string& prefix, int out_ch, int in_ch) {
    Conv(prefix + ".main", out_ch, in_ch, 3);
    Conv(prefix + ".offset", 27, in_ch, 3, InitKind::kZero);
  }
  void Drbs(const std::string& prefix, int in_ch, int out_ch) {
    Dcn(prefix, out_ch, in_ch);
    Conv(prefix + ".skip", out_ch, in_ch, 1);
  }
  void Drbu(const std::string& prefix, int in_ch, int out_ch) {
    Dcn(prefix, 4 * out_ch, in_ch);
    Conv(prefix + ".skip", out_ch, in_ch, 1);
  }
  void R2b(const std::string& prefix, int ch) {
    Conv(prefix + ".conv1", ch, ch, 3);
    Conv(prefix + ".conv2", ch, ch, 3);
  }

  std::vector<ParamSpec> Take() { return std::move(specs_); }

 private:
  std::vector<ParamSpec> specs_;
};

struct BranchPlan {
  std::string prefix;
  std::vector<int> widths;  // input width followed by each stage's output
};

std::vector<BranchPlan> EncoderPlan(const CodecConfig& c) {
  if (c.lifting_enabled) {
    return {{"enc.low", {6, c.n, c.n, c.m / 2}},
            {"enc.high", {12, c.n, c.n, c.m / 2}}};
  }
  return {{"enc.main", {3, c.n, c.n, c.n, c.m}}};
}

BranchPlan DecoderPlan(const CodecConfig& c) {
  if (c.lifting_enabled) return {"dec", {c.m, c.n, c.n, 12}};
  return {"dec", {c.m, c.n, c.n, c.n, 3}};
}

std::string Stage(const std::string& prefix, const char* kind, std::size_t i) {
  return prefix + "." + kind + std::to_string(i);
}

// --- loading ----------------------------------------------------------------

ConvSpec LoadConv(const WeightStore& w, const std::string& prefix, int stride) {
  ConvSpec spec;
  spec.weight = w.Get(prefix + ".weight");
  const auto& b = w.Get(prefix + ".bias").storage();
  spec.bias.assign(b.begin(), b.end());
  spec.stride = stride;
  spec.Validate();
  return spec;
}

DcnParams LoadDcn(const WeightStore& w, const std::string& prefix, int stride) {
  return DcnParams{LoadConv(w, prefix + ".main", stride),
                   LoadConv(w, prefix + ".offset", stride)};
}

R2bParams LoadR2b(const WeightStore& w, const std::string& prefix, int t) {
  return R2bParams{LoadConv(w, prefix + ".conv1", 1),
                   LoadConv(w, prefix + ".conv2", 1), t};
}

// --- helpers ----------------------------------------------------------------

Tensor RunBranch(const Tensor& x, const EncoderBranch& b,
                 const CodecConfig& c) {
  Tensor h = x;
  for (std::size_t i = 0; i < b.down.size(); ++i) {
    h = Drbs(h, b.down[i], c.drb_enabled);
    if (i < b.refine.size()) h = R2b(h, b.refine[i], c.effective_t());
  }
  return h;
}

Tensor ConvGelu(const Tensor& x, const ConvSpec& spec) {
  Tensor y = Conv2d(x, spec);
  ActivateInPlace(y, Activation::kGelu);
  return y;
}

std::int32_t RoundToSupport(float v, const CdfTable& table) {
  const float lo = static_cast<float>(table.min_symbol);
  const float hi = static_cast<float>(table.max_symbol());
  if (std::isnan(v)) return table.Clamp(0);
  return static_cast<std::int32_t>(std::round(std::clamp(v, lo, hi)));
}

void RequireDivisible(const Tensor& t, int factor, const char* what) {
  if (t.h() % factor != 0 || t.w() % factor != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": spatial dims of " +
                    t.shape().ToString() + " must be divisible by " +
                    std::to_string(factor));
  }
}

std::vector<const CdfTable*> GaussianTables(const Tensor& sigma) {
  const ScaleTable& scales = ScaleTable::Default();
  std::vector<const CdfTable*> tables(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    tables[i] = &scales.table(scales.IndexFor(sigma.data()[i]));
  }
  return tables;
}

std::vector<const CdfTable*> FactorizedTables(const Shape& z,
                                              const std::vector<CdfTable>& f) {
  if (static_cast<int>(f.size()) != z.c) {
    throw Error(ErrorCode::kInvalidArgument,
                "need one factorized table per hyperlatent channel");
  }
  std::vector<const CdfTable*> tables;
  tables.reserve(z.numel());
  for (int b = 0; b < z.n; ++b) {
    for (int c = 0; c < z.c; ++c) {
      for (std::size_t i = 0; i < z.plane(); ++i) tables.push_back(&f[c]);
    }
  }
  return tables;
}

}  // namespace

// --- config -----------------------------------------------------------------

std::uint8_t CodecConfig::ToggleBits() const {
  return static_cast<std::uint8_t>((lifting_enabled ? kToggleLifting : 0) |
                                   (drb_enabled ? kToggleDrb : 0) |
                                   (r2b_enabled ? kToggleR2b : 0));
}

void CodecConfig::SetToggleBits(std::uint8_t bits) {
  lifting_enabled = (bits & kToggleLifting) != 0;
  drb_enabled = (bits & kToggleDrb) != 0;
  r2b_enabled = (bits & kToggleR2b) != 0;
}

void CodecConfig::Validate() const {
  auto fail = [](const std::string& m) {
    throw Error(ErrorCode::kInvalidArgument, "codec config: " + m);
  };
  if (n <= 0 || m <= 0) fail("N and M must be positive");
  if (slices <= 0 || m % slices != 0) fail("M must be divisible by slices");
  if (lifting_enabled && m % 2 != 0) fail("M must be even with two branches");
  if (t < 0) fail("t must be >= 0");
  if (!(lambda >= 0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
}

// --- layout -----------------------------------------------------------------

std::vector<ParamSpec> RequiredParameters(const CodecConfig& c) {
  c.Validate();
  LayoutBuilder b;
  if (c.lifting_enabled) {
    b.Conv("lift.refine.conv1", kRefineHidden, 3, 3);
    b.Conv("lift.refine.conv2", 3, kRefineHidden, 3, InitKind::kZero);
  }
  for (const BranchPlan& plan : EncoderPlan(c)) {
    for (std::size_t i = 0; i + 1 < plan.widths.size(); ++i) {
      b.Drbs(Stage(plan.prefix, "drbs", i), plan.widths[i], plan.widths[i + 1]);
      if (i + 2 < plan.widths.size()) {
        b.R2b(Stage(plan.prefix, "r2b", i), plan.widths[i + 1]);
      }
    }
  }
  const BranchPlan dec = DecoderPlan(c);
  for (std::size_t i = 0; i + 1 < dec.widths.size(); ++i) {
    b.Drbu(Stage(dec.prefix, "drbu", i), dec.widths[i], dec.widths[i + 1]);
    if (i + 2 < dec.widths.size()) {
      b.R2b(Stage(dec.prefix, "r2b", i), dec.widths[i + 1]);
    }
  }
  b.Conv("hyper.enc.conv0", c.n, c.m, 3);
  b.Conv("hyper.enc.conv1", c.n, c.n, 3);
  b.Conv("hyper.enc.conv2", c.n, c.n, 3);
  b.Conv("hyper.dec.conv0", c.n, c.n, 3);
  b.Conv("hyper.dec.conv1", 4 * c.n, c.n, 3);
  b.Conv("hyper.dec.conv2", 4 * c.n, c.n, 3);
  b.Conv("hyper.dec.conv3", 2 * c.m, c.n, 3);
  const int s = c.slice_channels();
  for (int j = 0; j < c.slices; ++j) {
    const std::string p = "ctx." + std::to_string(j);
    b.Conv(p + ".conv0", c.n, 2 * c.m + j * s, 1);
    b.Conv(p + ".conv1", c.n, c.n, 3);
    b.Conv(p + ".conv2", 2 * s, c.n, 1);
  }
  return b.Take();
}

void CheckLayout(const WeightStore& w) {
  for (const ParamSpec& p : RequiredParameters(w.config)) {
    const Tensor& t = w.Get(p.name);
    if (t.shape() != p.shape) {
      throw Error(ErrorCode::kShapeMismatch,
                  p.name + " is " + t.shape().ToString() + ", expected " +
                      p.shape.ToString());
    }
  }
  if (static_cast<int>(w.factorized.size()) != w.config.n) {
    throw Error(ErrorCode::kMissingParameter,
                "factorized tables: have " +
                    std::to_string(w.factorized.size()) + ", need " +
                    std::to_string(w.config.n));
  }
}

WeightStore MakeSeededWeights(const CodecConfig& cfg, std::uint64_t seed) {
  WeightStore w;
  w.config = cfg;
  Rng rng(seed);
  for (const ParamSpec& p : RequiredParameters(cfg)) {
    Tensor t(p.shape);
    if (p.init == InitKind::kUniform) {
      const bool is_bias = p.shape.n == 1 && p.shape.h == 1 && p.shape.w == 1 &&
                           p.name.ends_with(".bias");
      const float a =
          is_bias ? 0.05f : std::sqrt(3.0f / static_cast<float>(p.fan_in));
      for (float& v : t.values()) v = rng.Symmetric(a);
    }
    w.tensors.emplace(p.name, std::move(t));
  }
  // Discretized logistic per hyperlatent channel, scale in [0.5, 4).
  for (int c = 0; c < cfg.n; ++c) {
    const double scale = 0.5 + 3.5 * rng.Uniform01();
    std::vector<double> pmf(2 * kFactorizedSupport + 1);
    for (int k = -kFactorizedSupport; k <= kFactorizedSupport; ++k) {
      auto cdf = [&](double v) { return 1.0 / (1.0 + std::exp(-v / scale)); };
      pmf[k + kFactorizedSupport] = cdf(k + 0.5) - cdf(k - 0.5);
    }
    w.factorized.push_back(QuantizePmf(pmf, -kFactorizedSupport));
  }
  return w;
}

// --- model ------------------------------------------------------------------

Model Model::FromWeights(const WeightStore& w) {
  CheckLayout(w);
  for (const CdfTable& t : w.factorized) t.Validate();
  const CodecConfig& c = w.config;
  auto p = std::make_shared<ModelParams>();
  if (c.lifting_enabled) {
    p->lifting.refine.conv1 = LoadConv(w, "lift.refine.conv1", 1);
    p->lifting.refine.conv2 = LoadConv(w, "lift.refine.conv2", 1);
  }
  for (const BranchPlan& plan : EncoderPlan(c)) {
    EncoderBranch branch;
    for (std::size_t i = 0; i + 1 < plan.widths.size(); ++i) {
      const std::string s = Stage(plan.prefix, "drbs", i);
      branch.down.push_back(
          DrbsParams{LoadDcn(w, s, 2), LoadConv(w, s + ".skip", 2)});
      if (i + 2 < plan.widths.size()) {
        branch.refine.push_back(LoadR2b(w, Stage(plan.prefix, "r2b", i), c.t));
      }
    }
    p->encoder.push_back(std::move(branch));
  }
  const BranchPlan dec = DecoderPlan(c);
  for (std::size_t i = 0; i + 1 < dec.widths.size(); ++i) {
    const std::string s = Stage(dec.prefix, "drbu", i);
    p->decoder.up.push_back(
        DrbuParams{LoadDcn(w, s, 1), LoadConv(w, s + ".skip", 1)});
    if (i + 2 < dec.widths.size()) {
      p->decoder.refine.push_back(LoadR2b(w, Stage(dec.prefix, "r2b", i), c.t));
    }
  }
  p->hyper_encoder = {LoadConv(w, "hyper.enc.conv0", 1),
                      LoadConv(w, "hyper.enc.conv1", 2),
                      LoadConv(w, "hyper.enc.conv2", 2)};
  p->hyper_decoder = {
      LoadConv(w, "hyper.dec.conv0", 1), LoadConv(w, "hyper.dec.conv1", 1),
      LoadConv(w, "hyper.dec.conv2", 1), LoadConv(w, "hyper.dec.conv3", 1)};
  for (int j = 0; j < c.slices; ++j) {
    const std::string s = "ctx." + std::to_string(j);
    p->slice_nets.push_back({LoadConv(w, s + ".conv0", 1),
                             LoadConv(w, s + ".conv1", 1),
                             LoadConv(w, s + ".conv2", 1)});
  }
  p->factorized = w.factorized;

  Model model;
  model.config_ = c;
  model.params_ = std::move(p);
  model.codec_id_ = w.Id();
  return model;
}

Model Model::WithToggles(bool drb_enabled, bool r2b_enabled) const {
  Model m = *this;
  m.config_.drb_enabled = drb_enabled;
  m.config_.r2b_enabled = r2b_enabled;
  return m;
}

Model Model::WithToggleBits(std::uint8_t bits) const {
  CodecConfig c = config_;
  c.SetToggleBits(bits);
  if (c.lifting_enabled != config_.lifting_enabled) {
    throw Error(ErrorCode::kInvalidArgument,
                "lifting toggle differs from the weight layout");
  }
  return WithToggles(c.drb_enabled, c.r2b_enabled);
}

// --- transforms -------------------------------------------------------------

Tensor AnalysisTransform(const Tensor& x, const Model& model) {
  CheckNonEmpty(x, "analysis");
  if (x.c() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "analysis expects 3 channels");
  }
  RequireDivisible(x, 64, "analysis");
  const CodecConfig& c = model.config();
  const ModelParams& p = model.params();
  if (!c.lifting_enabled) return RunBranch(x, p.encoder.at(0), c);

  const SubbandSet sb = ForwardDwt2d(x, p.lifting);
  const Tensor low = ConcatChannels(sb.ll, sb.half);
  const Tensor* high_parts[] = {&sb.lh, &sb.hl, &sb.hh, &sb.half};
  const Tensor high = ConcatChannels(high_parts);
  return ConcatChannels(RunBranch(low, p.encoder.at(0), c),
                        RunBranch(high, p.encoder.at(1), c));
}

Tensor SynthesisTransform(const Tensor& y_hat, const Model& model) {
  CheckNonEmpty(y_hat, "synthesis");
  const CodecConfig& c = model.config();
  const ModelParams& p = model.params();
  if (y_hat.c() != c.m) {
    throw Error(ErrorCode::kShapeMismatch,
                "synthesis expects " + std::to_string(c.m) + " channels, got " +
                    std::to_string(y_hat.c()));
  }
  Tensor h = y_hat;
  for (std::size_t i = 0; i < p.decoder.up.size(); ++i) {
    h = Drbu(h, p.decoder.up[i], c.drb_enabled);
    if (i < p.decoder.refine.size()) {
      h = R2b(h, p.decoder.refine[i], c.effective_t());
    }
  }
  if (c.lifting_enabled) {
    SubbandSet sb;
    sb.ll = SliceChannels(h, 0, 3);
    sb.lh = SliceChannels(h, 3, 3);
    sb.hl = SliceChannels(h, 6, 3);
    sb.hh = SliceChannels(h, 9, 3);
    h = InverseDwt2d(sb, p.lifting);
  }
  ClampInPlace(h, 0.0f, 1.0f);
  return h;
}

Tensor HyperEncode(const Tensor& y, const Model& model) {
  CheckNonEmpty(y, "hyper_encode");
  RequireDivisible(y, 4, "hyper_encode");
  const HyperEncoder& e = model.params().hyper_encoder;
  return Conv2d(ConvGelu(ConvGelu(y, e.conv0), e.conv1), e.conv2);
}

Tensor HyperDecode(const Tensor& z_hat, const Model& model) {
  CheckNonEmpty(z_hat, "hyper_decode");
  const HyperDecoder& d = model.params().hyper_decoder;
  if (z_hat.c() != d.conv0.in_channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "hyper_decode expects " +
                    std::to_string(d.conv0.in_channels()) + " channels");
  }
  Tensor h = ConvGelu(z_hat, d.conv0);
  h = PixelShuffle(Conv2d(h, d.conv1), 2);
  ActivateInPlace(h, Activation::kGelu);
  h = PixelShuffle(Conv2d(h, d.conv2), 2);
  ActivateInPlace(h, Activation::kGelu);
  return Conv2d(h, d.conv3);
}

EntropyParams SliceParams(const Tensor& psi,
                          std::span<const Tensor> decoded_slices, int slice_idx,
                          const Model& model) {
  const CodecConfig& c = model.config();
  if (slice_idx < 0 || slice_idx >= c.slices) {
    throw Error(ErrorCode::kOutOfRange,
                "slice index " + std::to_string(slice_idx));
  }
  if (static_cast<int>(decoded_slices.size()) != slice_idx) {
    throw Error(ErrorCode::kInvalidArgument,
                "slice " + std::to_string(slice_idx) + " needs exactly " +
                    std::to_string(slice_idx) + " prior slices, got " +
                    std::to_string(decoded_slices.size()));
  }
  std::vector<const Tensor*> parts{&psi};
  for (const Tensor& t : decoded_slices) parts.push_back(&t);
  const SliceNet& net = model.params().slice_nets.at(slice_idx);
  Tensor h = ConvGelu(ConcatChannels(parts), net.conv0);
  h = Conv2d(ConvGelu(h, net.conv1), net.conv2);
  const int s = c.slice_channels();
  EntropyParams ep{SliceChannels(h, 0, s), SliceChannels(h, s, s)};
  for (float& v : ep.sigma.values()) {
    v = std::clamp(std::exp(v), kSigmaMin, kSigmaMax);
  }
  return ep;
}

Tensor Quantize(const Tensor& v, QuantMode mode, const Tensor& mu, Rng* rng) {
  Tensor out = v;
  if (mode == QuantMode::kNoise) {
    if (rng == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "noise quantization needs an rng");
    }
    for (float& x : out.values()) x += rng->Uniform01() - 0.5f;
    return out;
  }
  if (!mu.empty() && mu.shape() != v.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "quantize: mu shape differs");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float m = mu.empty() ? 0.0f : mu.data()[i];
    out.data()[i] = std::round(v.data()[i] - m) + m;
  }
  return out;
}

// --- tiles ------------------------------------------------------------------

EncodedTile EncodeTile(const Tensor& image, const Model& model) {
  CheckNonEmpty(image, "encode_tile");
  if (image.n() != 1 || image.c() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "encode_tile expects 1x3xHxW");
  }
  const CodecConfig& c = model.config();
  const auto height = static_cast<std::uint32_t>(image.h());
  const auto width = static_cast<std::uint32_t>(image.w());
  const Tensor x = PadReplicate(image, static_cast<int>(PadTo64(height)),
                                static_cast<int>(PadTo64(width)));

  EncodedTile out;
  LatentPack& lat = out.latents;
  lat.y = AnalysisTransform(x, model);
  lat.z = HyperEncode(lat.y, model);

  const std::vector<CdfTable>& factorized = model.params().factorized;
  const std::vector<const CdfTable*> z_tables =
      FactorizedTables(lat.z.shape(), factorized);
  lat.z_hat = Tensor(lat.z.shape());
  out.symbols.z.resize(lat.z.size());
  for (std::size_t i = 0; i < lat.z.size(); ++i) {
    const std::int32_t s = RoundToSupport(lat.z.data()[i], *z_tables[i]);
    out.symbols.z[i] = s;
    lat.z_hat.data()[i] = static_cast<float>(s);
  }

  TileBitstream& bs = out.bitstream;
  bs.codec_id = model.codec_id();
  bs.flags = c.ToggleBits();
  bs.height = height;
  bs.width = width;
  bs.padded_height = static_cast<std::uint32_t>(x.h());
  bs.padded_width = static_cast<std::uint32_t>(x.w());
  bs.lambda = c.lambda;
  bs.z_payload = EncodeSymbols(out.symbols.z, z_tables);
  out.estimated_bits_z = EstimateRate(out.symbols.z, z_tables);

  const Tensor psi = HyperDecode(lat.z_hat, model);
  const int s = c.slice_channels();
  std::vector<Tensor> decoded;
  for (int j = 0; j < c.slices; ++j) {
    const EntropyParams ep = SliceParams(psi, decoded, j, model);
    const Tensor y_j = SliceChannels(lat.y, j * s, s);
    const std::vector<const CdfTable*> tables = GaussianTables(ep.sigma);
    std::vector<std::int32_t> symbols(y_j.size());
    Tensor y_hat_j(y_j.shape());
    for (std::size_t i = 0; i < y_j.size(); ++i) {
      const float mu = ep.mu.data()[i];
      symbols[i] = RoundToSupport(y_j.data()[i] - mu, *tables[i]);
      y_hat_j.data()[i] = static_cast<float>(symbols[i]) + mu;
    }
    bs.y_payloads.push_back(EncodeSymbols(symbols, tables));
    out.estimated_bits_y += EstimateRate(symbols, tables);
    out.symbols.y_slices.push_back(std::move(symbols));
    decoded.push_back(std::move(y_hat_j));
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& t : decoded) parts.push_back(&t);
  lat.y_hat = ConcatChannels(parts);
  return out;
}

DecodedTile DecodeTile(const TileBitstream& bs, const Model& model_in,
                       const SliceObserver& observer) {
  if (bs.codec_id != model_in.codec_id()) {
    throw Error(ErrorCode::kCodecIdMismatch,
                "tile coded with " + CodecIdHex(bs.codec_id) +
                    ", weights are " + CodecIdHex(model_in.codec_id()));
  }
  const Model model = model_in.WithToggleBits(bs.flags);
  const CodecConfig& c = model.config();
  if (static_cast<int>(bs.y_payloads.size()) != c.slices) {
    throw Error(ErrorCode::kCorrupt,
                "tile has " + std::to_string(bs.y_payloads.size()) +
                    " slices, model expects " + std::to_string(c.slices));
  }
  if (bs.padded_height % 64 != 0 || bs.padded_width % 64 != 0 ||
      bs.padded_height == 0 || bs.padded_width == 0) {
    throw Error(ErrorCode::kCorrupt, "tile padded size not a multiple of 64");
  }
  const int yh = static_cast<int>(bs.padded_height / 16);
  const int yw = static_cast<int>(bs.padded_width / 16);

  DecodedTile out;
  Tensor z_hat(1, c.n, yh / 4, yw / 4);
  const std::vector<const CdfTable*> z_tables =
      FactorizedTables(z_hat.shape(), model.params().factorized);
  out.symbols.z = DecodeSymbols(bs.z_payload, z_tables);
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    z_hat.data()[i] = static_cast<float>(out.symbols.z[i]);
  }

  const Tensor psi = HyperDecode(z_hat, model);
  std::vector<Tensor> decoded;
  for (int j = 0; j < c.slices; ++j) {
    if (observer) observer(j, static_cast<int>(decoded.size()));
    const EntropyParams ep = SliceParams(psi, decoded, j, model);
    const std::vector<const CdfTable*> tables = GaussianTables(ep.sigma);
    std::vector<std::int32_t> symbols = DecodeSymbols(bs.y_payloads[j], tables);
    Tensor y_hat_j(ep.mu.shape());
    for (std::size_t i = 0; i < y_hat_j.size(); ++i) {
      y_hat_j.data()[i] = static_cast<float>(symbols[i]) + ep.mu.data()[i];
    }
    out.symbols.y_slices.push_back(std::move(symbols));
    decoded.push_back(std::move(y_hat_j));
  }
  std::vector<const Tensor*> parts;
  for (const Tensor& t : decoded) parts.push_back(&t);
  out.y_hat = ConcatChannels(parts);
  const Tensor full = SynthesisTransform(out.y_hat, model);
  out.image =
      Crop(full, static_cast<int>(bs.height), static_cast<int>(bs.width));
  return out;
}

}  // namespace cleric
