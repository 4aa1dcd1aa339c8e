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

#ifndef FOCALDET_PIPELINE_HPP_
#define FOCALDET_PIPELINE_HPP_

#include <string>
#include <vector>

#include "focaldet/cost_model.hpp"
#include "focaldet/decoder.hpp"
#include "focaldet/encoding.hpp"
#include "focaldet/sampling.hpp"
#include "focaldet/scene.hpp"

namespace focaldet {

enum class ScoreSource { kOracle, kRandom, kFile };

/// Parses "oracle", "random" or "file:<path>".
ScoreSource parse_score_source(const std::string& spec,
                               std::string* file_path);

struct RunOptions {
  ComposeMode mode = ComposeMode::kFocal;
  ScoreSource score_source = ScoreSource::kOracle;
  std::string score_file;
};

/// Full forward chain: geometry -> targets -> scores -> priority -> sampling
/// -> alignment -> key/value -> decode, plus loss evaluation on oracle
/// predictions and the analytic cost table. Deterministic per seed.
struct PipelineResult {
  SyntheticScene scene;
  std::vector<CameraTruth> truths;

  QualityMaps maps;                   // pooled over cameras
  std::vector<size_t> sampled;        // global flat indices, ascending
  std::vector<size_t> center_tokens;  // global flat indices of 2.5D centers
  double foreground_recall = 1.0;

  KeyValue kv;  // rows follow `sampled`
  DecoderTrace trace;

  AuxComponents oracle_components;  // on oracle-perfect predictions
  double oracle_total = 0.0;
  int n_pos = 0;
  double score_quality_loss = 0.0;     // quality loss of the active Q map
  double score_centerness_loss = 0.0;  // centerness loss of the active C map

  std::vector<SweepRow> cost_rows;
  std::vector<std::string> warnings;

  RunOptions options;

  /// Deterministic JSON report; two runs with equal config are byte equal.
  std::string to_report_json() const;
};

PipelineResult run_pipeline(const SyntheticScene& scene,
                            const RunOptions& options);

/// Convenience overload that generates the scene from `cfg` first.
PipelineResult run_pipeline(const SceneConfig& cfg, const RunOptions& options);

/// The token grids a run decodes over: seeded random content vectors per
/// camera (stand-ins for encoder features).
std::vector<TokenGrid> make_token_grids(const SceneConfig& cfg);

/// The position-embedding MLP a run uses, derived from the scene seed.
Mlp2 pipeline_phi(const SceneConfig& cfg);

/// Oracle score maps for one camera: Q from the quality targets, C from the
/// heatmap, both clamped into [kProbEpsilon, 1].
void oracle_scores(const TokenTargets& targets, Vector* q, Vector* c);

}  // namespace focaldet

#endif  // FOCALDET_PIPELINE_HPP_
