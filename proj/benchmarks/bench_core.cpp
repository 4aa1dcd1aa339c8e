/* Copyright 2026 The focaldet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "focaldet/assignment.hpp"
#include "focaldet/cost_model.hpp"
#include "focaldet/decoder.hpp"
#include "focaldet/pipeline.hpp"

namespace {

using namespace focaldet;

void BM_PositionEmbedding(benchmark::State& state) {
  SceneConfig cfg;
  const SyntheticScene scene = generate_scene(cfg);
  const std::vector<TokenGrid> grids = make_token_grids(cfg);
  const Mlp2 phi = pipeline_phi(cfg);
  const Roi3D roi = cfg.roi();
  for (auto _ : state) {
    const PosEmbedGrid embed =
        position_embedding(grids[0], scene.cameras[0], phi, cfg.lid(), roi);
    benchmark::DoNotOptimize(embed.embed.data().data());
  }
}
BENCHMARK(BM_PositionEmbedding);

void BM_DecodeForward(benchmark::State& state) {
  const int d = 32;
  const int tokens = static_cast<int>(state.range(0));
  Rng rng(1);
  DenseMatrix keys(tokens, d), values(tokens, d);
  for (double& v : keys.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : values.data()) v = rng.uniform(-1.0, 1.0);
  const AnchorQuerySet queries = init_anchor_queries(64, d, 1);
  DecoderConfig cfg;
  const DecoderWeights weights = DecoderWeights::seeded(cfg, d, 64, 2);
  for (auto _ : state) {
    const DecoderTrace trace = decode(queries, keys, values, cfg, weights);
    benchmark::DoNotOptimize(trace.layers.back().query_state.data().data());
  }
}
BENCHMARK(BM_DecodeForward)->Arg(48)->Arg(192);

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  std::vector<double> costs(static_cast<size_t>(n) * n);
  for (double& v : costs) v = rng.uniform(-10.0, 10.0);
  const CostMatrix m(n, n, costs);
  for (auto _ : state) {
    const Assignment a = match_hungarian(m);
    benchmark::DoNotOptimize(a.total_cost);
  }
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(32);

void BM_RatioSweep(benchmark::State& state) {
  const HeadConfig cfg = reference_head_config();
  for (auto _ : state) {
    const auto rows = ratio_sweep(cfg, {0.25, 0.5, 0.75, 1.0});
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(BM_RatioSweep);

void BM_FullPipeline(benchmark::State& state) {
  SceneConfig cfg;
  const SyntheticScene scene = generate_scene(cfg);
  for (auto _ : state) {
    const PipelineResult result = run_pipeline(scene, {});
    benchmark::DoNotOptimize(result.foreground_recall);
  }
}
BENCHMARK(BM_FullPipeline);

}  // namespace

BENCHMARK_MAIN();
