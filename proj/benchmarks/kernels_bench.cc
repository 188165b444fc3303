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

#include <benchmark/benchmark.h>

#include "cleric/blocks.h"
#include "cleric/lifting.h"
#include "cleric/numerics.h"
#include "cleric/rng.h"

namespace cleric {
namespace {

Tensor Random(int c, int h, int w, Rng& rng) {
  Tensor t(1, c, h, w);
  for (float& v : t.values()) v = rng.Uniform01();
  return t;
}

ConvSpec RandomConv(int out, int in, int k, int stride, Rng& rng) {
  ConvSpec c = MakeConv(out, in, k, stride);
  for (float& v : c.weight.values()) v = rng.Symmetric(0.05f);
  return c;
}

void BM_Conv3x3(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  Rng rng(1);
  const Tensor x = Random(ch, size, size, rng);
  const ConvSpec k = RandomConv(ch, ch, 3, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Conv2d(x, k));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Conv3x3)->Args({16, 64})->Args({192, 32})->Args({192, 64});

void BM_Dcnv2(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  Rng rng(2);
  const Tensor x = Random(ch, size, size, rng);
  DcnParams p = MakeDcn(ch, ch, 1);
  p.kernel = RandomConv(ch, ch, 3, 1, rng);
  p.offset_net = RandomConv(27, ch, 3, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(DeformableConv(x, p));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Dcnv2)->Args({16, 64})->Args({192, 32});

void BM_Drbs(benchmark::State& state) {
  Rng rng(3);
  const Tensor x = Random(192, 64, 64, rng);
  DrbsParams p = MakeDrbs(192, 192);
  p.main.kernel = RandomConv(192, 192, 3, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Drbs(x, p));
}
BENCHMARK(BM_Drbs)->Unit(benchmark::kMillisecond);

void BM_LiftingForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  Rng rng(4);
  const Tensor x = Random(3, size, size, rng);
  LiftingStage stage;
  stage.refine.conv1 = RandomConv(kRefineHidden, 3, 3, 1, rng);
  stage.refine.conv2 = RandomConv(3, kRefineHidden, 3, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ForwardDwt2d(x, stage));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_LiftingForward)->Arg(64)->Arg(256);

void BM_LiftingRoundTrip(benchmark::State& state) {
  Rng rng(5);
  const Tensor x = Random(3, 256, 256, rng);
  LiftingStage stage;
  stage.refine.conv1 = RandomConv(kRefineHidden, 3, 3, 1, rng);
  stage.refine.conv2 = RandomConv(3, kRefineHidden, 3, 1, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(InverseDwt2d(ForwardDwt2d(x, stage), stage));
  }
}
BENCHMARK(BM_LiftingRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cleric
