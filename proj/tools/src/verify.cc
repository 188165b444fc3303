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

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "cleric/blocks.h"
#include "cleric/codec.h"
#include "cleric/entropy.h"
#include "cleric/error.h"
#include "cleric/lifting.h"
#include "cleric/numerics.h"
#include "cleric/rng.h"
#include "cleric_tools/pipeline.h"

namespace cleric::tools {
namespace {

constexpr std::uint64_t kVerifySeed = 0x5eed;

Tensor RandomTensor(int n, int c, int h, int w, Rng& rng) {
  Tensor t(n, c, h, w);
  for (float& v : t.values()) v = static_cast<float>(rng.Uniform01());
  return t;
}

std::int32_t SampleSymbol(const CdfTable& t, Rng& rng) {
  const auto target = static_cast<std::uint32_t>(rng.Uniform01() * kCdfTotal);
  const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), target);
  return t.min_symbol + static_cast<std::int32_t>(it - t.cdf.begin()) - 1;
}

CheckResult Run(const std::string& name,
                const std::function<std::string()>& body) {
  try {
    return {name, true, body()};
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kCorrupt, what);
}

std::string Sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

CdfTable UniformTable() {
  std::vector<double> pmf(3, 1.0 / 3);
  return QuantizePmf(pmf, -1);
}

}  // namespace

std::vector<CheckResult> CmdVerify(const std::filesystem::path& weights) {
  std::vector<CheckResult> out;
  Bytes bytes;
  std::optional<WeightStore> ws;
  out.push_back(Run("weights.read", [&] {
    bytes = ReadFileBytes(weights);
    WeightStore::ParseOptions lenient;
    lenient.verify_hash = false;
    lenient.validate_tables = false;
    lenient.check_layout = false;
    ws = WeightStore::Parse(bytes, lenient);
    return std::string();
  }));
  if (!ws) return out;

  out.push_back(Run("weights.hash", [&] {
    WeightStore::ParseOptions o;
    o.validate_tables = false;
    o.check_layout = false;
    return "codec_id " + CodecIdHex(WeightStore::Parse(bytes, o).Id());
  }));
  out.push_back(Run("weights.layout", [&] {
    CheckLayout(*ws);
    return std::to_string(ws->tensors.size()) + " tensors";
  }));

  // Invalid tables become uniform placeholders; coder.roundtrip reports them.
  std::optional<Model> model;
  try {
    WeightStore patched = *ws;
    for (CdfTable& t : patched.factorized) {
      if (!t.IsValid()) t = UniformTable();
    }
    model = Model::FromWeights(patched);
  } catch (const std::exception&) {
  }
  auto with_model = [&](const std::function<std::string(const Model&)>& f) {
    return [&, f] {
      if (!model) {
        throw Error(ErrorCode::kMissingParameter, "model could not be built");
      }
      return f(*model);
    };
  };

  out.push_back(Run(
      "lifting.invertibility", with_model([](const Model& m) {
        Rng rng(kVerifySeed);
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
          const Tensor x = RandomTensor(1, 3, 64, 64, rng);
          const Tensor y = InverseDwt2d(ForwardDwt2d(x, m.params().lifting),
                                        m.params().lifting);
          for (std::size_t k = 0; k < x.size(); ++k) {
            worst = std::max(worst, std::abs(static_cast<double>(x.data()[k]) -
                                             y.data()[k]));
          }
        }
        Require(worst < 1e-4, "max reconstruction error " + Sci(worst));
        return "max error " + Sci(worst);
      })));

  out.push_back(Run(
      "dcnv2.reduction", with_model([](const Model& m) {
        const ConvSpec& kernel =
            m.params().encoder.at(0).down.at(0).main.kernel;
        Rng rng(kVerifySeed + 1);
        const Tensor x = RandomTensor(1, kernel.in_channels(), 32, 32, rng);
        const Tensor ref = Conv2d(x, kernel);
        const int taps = kernel.kernel_h() * kernel.kernel_w();
        const Tensor offsets(1, 2 * taps, ref.h(), ref.w(), 0.0f);
        const Tensor modulation(1, taps, ref.h(), ref.w(), 1.0f);
        const Tensor got = Dcnv2(x, kernel, offsets, modulation);
        double worst = 0;
        for (std::size_t k = 0; k < ref.size(); ++k) {
          worst = std::max(worst, std::abs(static_cast<double>(ref.data()[k]) -
                                           got.data()[k]));
        }
        Require(worst < 1e-5, "max deviation from conv2d " + Sci(worst));
        return "max error " + Sci(worst);
      })));

  out.push_back(Run("coder.roundtrip", [&] {
    std::vector<const CdfTable*> tables;
    for (std::size_t i = 0; i < ws->factorized.size(); ++i) {
      const CdfTable& t = ws->factorized[i];
      if (!t.IsValid()) {
        throw Error(ErrorCode::kCorrupt,
                    "factorized table " + std::to_string(i) + " is invalid");
      }
      tables.push_back(&t);
    }
    const ScaleTable& scales = ScaleTable::Default();
    for (int i = 0; i < kNumScales; ++i) tables.push_back(&scales.table(i));
    Rng rng(kVerifySeed + 2);
    std::vector<std::int32_t> symbols;
    std::vector<const CdfTable*> per_symbol;
    for (int k = 0; k < 200; ++k) {
      for (const CdfTable* t : tables) {
        symbols.push_back(SampleSymbol(*t, rng));
        per_symbol.push_back(t);
      }
    }
    const Bytes enc = EncodeSymbols(symbols, per_symbol);
    Require(DecodeSymbols(enc, per_symbol) == symbols,
            "decoded symbols differ");
    return std::to_string(symbols.size()) + " symbols over " +
           std::to_string(tables.size()) + " tables";
  }));

  out.push_back(Run("rate.estimate", [&] {
    const ScaleTable& scales = ScaleTable::Default();
    Rng rng(kVerifySeed + 3);
    std::vector<std::int32_t> symbols;
    std::vector<const CdfTable*> per_symbol;
    for (int k = 0; k < 100000; ++k) {
      const CdfTable& t = scales.table(static_cast<int>(rng.Uniform01() * 40));
      symbols.push_back(SampleSymbol(t, rng));
      per_symbol.push_back(&t);
    }
    const double estimate = EstimateRate(symbols, per_symbol);
    const double actual =
        8.0 * static_cast<double>(EncodeSymbols(symbols, per_symbol).size());
    const double bound = 64 + 0.001 * estimate;
    const std::string detail = "actual " + std::to_string(actual) +
                               " bits, estimate " + std::to_string(estimate);
    Require(std::abs(actual - estimate) <= bound, detail);
    return detail;
  }));

  out.push_back(
      Run("codec.roundtrip", with_model([](const Model& m) {
            Rng rng(kVerifySeed + 4);
            const Tensor x = RandomTensor(1, 3, 64, 64, rng);
            const EncodedTile a = EncodeTile(x, m);
            const EncodedTile b = EncodeTile(x, m);
            const Bytes wire = WriteTile(a.bitstream);
            Require(wire == WriteTile(b.bitstream),
                    "encoding is not deterministic");
            const DecodedTile d = DecodeTile(ReadTile(wire, m.codec_id()), m);
            Require(d.symbols == a.symbols, "decoded symbols differ");
            Require(d.image.shape() == x.shape(), "decoded shape differs");
            return std::to_string(wire.size()) + " bytes";
          })));
  return out;
}

}  // namespace cleric::tools
