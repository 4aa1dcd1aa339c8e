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

#ifndef FOCALDET_COST_MODEL_HPP_
#define FOCALDET_COST_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace focaldet {

// Analytic FLOPs/memory accounting for the detection head as a function of
// token count, query count, width and depth. It is a structural model, not a
// profiler: one multiply-accumulate counts as 2 FLOPs, and every term below
// states its own formula.

struct HeadConfig {
  std::int64_t n_queries = 900;
  std::int64_t n_tokens = 16896;  // pre-sampling
  std::int64_t d_model = 256;
  std::int64_t d_ff = 2048;
  std::int64_t layers = 6;
  double rho = 1.0;  // sampling ratio in (0, 1]
  std::int64_t bytes_per_scalar = 4;
  bool sampling_enabled = true;
  /// Per-token MAC count of the scoring heads; 0 selects the built-in
  /// two-conv-layer estimate.
  std::int64_t sampling_macs_per_token = 0;

  void validate() const;
};

/// ceil(rho * n_tokens)
std::int64_t sampled_tokens(const HeadConfig& cfg);

/// Built-in scoring-head estimate: two 3x3 convolutions, d_model -> 48 -> 8
/// channels, per token.
std::int64_t default_sampling_macs_per_token(std::int64_t d_model);

/// All fields in FLOPs (multiply-accumulate = 2 FLOPs).
struct FlopsBreakdown {
  double cross_attn = 0.0;        // L * 2 * N_q * N_s * d MACs
  double self_attn = 0.0;         // L * 2 * N_q^2 * d MACs
  double ffn = 0.0;               // L * 2 * N_q * d * d_ff MACs
  double projections = 0.0;       // L * d^2 * (2 N_q + 2 N_s) MACs
  double sampling_overhead = 0.0; // N_t * per-token MACs, 0 when disabled
  double total = 0.0;
};

FlopsBreakdown decoder_flops(const HeadConfig& cfg);

/// All fields in bytes.
struct MemoryBreakdown {
  double attn_matrices = 0.0;    // L * N_q * N_s * bytes
  double kv_buffers = 0.0;       // 2 * N_s * d * bytes
  double query_states = 0.0;     // L * N_q * d * bytes
  double ffn_activations = 0.0;  // L * N_q * d_ff * bytes
  double total = 0.0;
};

MemoryBreakdown decoder_memory(const HeadConfig& cfg);

struct SweepRow {
  double rho = 1.0;
  std::int64_t sampled = 0;
  FlopsBreakdown flops;
  MemoryBreakdown memory;
  double delta_flops_pct = 0.0;  // vs the rho = 1.0 row of the same config
  double delta_mem_pct = 0.0;
};

/// One row per ratio. The rho = 1.0 baseline is always evaluated for the
/// deltas, but only requested ratios become rows.
std::vector<SweepRow> ratio_sweep(const HeadConfig& cfg,
                                  const std::vector<double>& ratios);

/// CSV with header: ratio, flops_total, flops_cross_attn, mem_total,
/// mem_attn, delta_flops_pct, delta_mem_pct.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Human-readable fixed-width table.
std::string sweep_table(const HeadConfig& cfg,
                        const std::vector<SweepRow>& rows);

/// Frozen large-scale reference configuration: 900 queries, 6 layers,
/// d_model 256, tokens for six 1408x512 views at stride 16. d_ff is an
/// effective per-query state width calibrated for this scale (it absorbs
/// weight/optimizer state, not just the feed-forward activations).
HeadConfig reference_head_config();

}  // namespace focaldet

#endif  // FOCALDET_COST_MODEL_HPP_
