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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cleric/error.h"
#include "cleric_tools/pipeline.h"

namespace {

using cleric::tools::Toggles;

void AddToggleFlags(CLI::App* cmd, Toggles& t) {
  cmd->add_flag_function(
      "--no-lifting", [&t](std::int64_t) { t.lifting = false; },
      "Disable the learnable lifting front end");
  cmd->add_flag_function(
      "--no-drb", [&t](std::int64_t) { t.drb = false; },
      "Replace deformable convolutions with their regular-grid reduction");
  cmd->add_flag_function(
      "--no-r2b", [&t](std::int64_t) { t.r2b = false; },
      "Run residual blocks once instead of recursively");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLERIC whole-slide image compression"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs,-j", jobs,
                 "Worker threads (default: $CLERIC_JOBS or hardware threads)")
      ->check(CLI::PositiveNumber);

  // make-weights
  cleric::tools::MakeWeightsOptions mw;
  Toggles mw_toggles;
  auto* make = app.add_subcommand("make-weights",
                                  "Write a deterministic seeded weight file");
  make->add_option("--weights,-o", mw.out, "Output weight file")->required();
  make->add_option("--seed", mw.seed, "Initialization seed");
  make->add_option("--n", mw.config.n, "Hidden width N");
  make->add_option("--m", mw.config.m, "Latent channels M");
  make->add_option("--t", mw.config.t, "R2B recursion depth");
  make->add_option("--slices", mw.config.slices, "Channel-context slices");
  make->add_option("--lambda", mw.config.lambda, "Rate-distortion weight tag");
  AddToggleFlags(make, mw_toggles);

  // encode
  cleric::tools::EncodeOptions enc;
  auto* encode = app.add_subcommand("encode", "Compress a patch pyramid");
  encode->add_option("source", enc.source, "Patch directory (level0..levelN)")
      ->required()
      ->check(CLI::ExistingDirectory);
  encode->add_option("--weights", enc.weights, "Weight file")
      ->required()
      ->check(CLI::ExistingFile);
  encode->add_option("--out,-o", enc.out, "Output container")->required();
  encode->add_option("--tile-size", enc.tile_size,
                     "Container tile size, a multiple of 64");
  std::optional<int> enc_levels;
  encode->add_option("--levels", enc_levels, "Encode only the first N levels");
  encode->add_option("--min-chroma", enc.tissue.min_chroma,
                     "Tissue filter: minimum pixel chroma");
  encode->add_option("--max-luma", enc.tissue.max_luma,
                     "Tissue filter: maximum pixel luma");
  encode->add_option("--min-coverage", enc.tissue.min_coverage,
                     "Tissue filter: minimum tissue pixel fraction");
  AddToggleFlags(encode, enc.toggles);

  // decode
  cleric::tools::DecodeOptions dec;
  auto* decode = app.add_subcommand("decode", "Reconstruct tiles as PNG");
  decode->add_option("container", dec.container, "Container file")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--weights", dec.weights, "Weight file")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--out,-o", dec.out_dir, "Output directory")->required();
  std::optional<int> dec_level;
  std::optional<std::pair<int, int>> dec_tile;
  decode->add_option("--level", dec_level, "Decode one level only")
      ->check(CLI::NonNegativeNumber);
  decode->add_option("--tile", dec_tile, "Decode one tile: COL ROW")
      ->expected(2)
      ->delimiter(',');

  // metrics
  cleric::tools::MetricsOptions met;
  auto* metrics =
      app.add_subcommand("metrics", "Rate-distortion report per level");
  metrics->add_option("source", met.source, "Original patch directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics->add_option("container", met.container, "Container file")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--weights", met.weights, "Weight file")
      ->required()
      ->check(CLI::ExistingFile);
  std::optional<std::string> csv_out;
  std::optional<std::string> diff_dir;
  metrics->add_option("--csv-out", csv_out, "Write the report as CSV");
  metrics->add_option("--diff-dir", diff_dir,
                      "Write per-level difference maps as PNG");

  // verify
  std::string verify_weights;
  auto* verify =
      app.add_subcommand("verify", "Run the embedded property suite");
  verify->add_option("--weights", verify_weights, "Weight file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (make->parsed()) {
      mw.config.lifting_enabled = mw_toggles.lifting;
      mw.config.drb_enabled = mw_toggles.drb;
      mw.config.r2b_enabled = mw_toggles.r2b;
      const auto id = cleric::tools::CmdMakeWeights(mw);
      std::cout << "codec_id " << cleric::CodecIdHex(id) << "\n";
    } else if (encode->parsed()) {
      enc.levels = enc_levels;
      enc.jobs = jobs;
      cleric::tools::PrintEncodeSummary(std::cout,
                                        cleric::tools::CmdEncode(enc));
    } else if (decode->parsed()) {
      dec.level = dec_level;
      dec.tile = dec_tile;
      dec.jobs = jobs;
      cleric::tools::PrintDecodeSummary(std::cout,
                                        cleric::tools::CmdDecode(dec));
    } else if (metrics->parsed()) {
      if (csv_out) met.csv_out = *csv_out;
      if (diff_dir) met.diff_dir = *diff_dir;
      met.jobs = jobs;
      cleric::tools::PrintMetricsReport(std::cout,
                                        cleric::tools::CmdMetrics(met));
    } else if (verify->parsed()) {
      const auto checks = cleric::tools::CmdVerify(verify_weights);
      cleric::tools::PrintChecks(std::cout, checks);
      for (const auto& c : checks) {
        if (!c.pass) return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
