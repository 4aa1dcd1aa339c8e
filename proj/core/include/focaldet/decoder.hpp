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

#ifndef FOCALDET_DECODER_HPP_
#define FOCALDET_DECODER_HPP_

#include <cstdint>
#include <vector>

#include "focaldet/camera.hpp"
#include "focaldet/numeric.hpp"

namespace focaldet {

/// Head center offsets move the anchor by at most this fraction of the
/// normalized ROI span per side, so predictions stay inside the ROI inflated
/// by 10%.
inline constexpr double kCenterOffsetRange = 0.1;

/// Learnable 3D anchor-point queries: anchors in [0,1]^3, zero-initialized
/// content, and a positional embedding derived from the anchors.
struct AnchorQuerySet {
  DenseMatrix anchors;    // n x 3
  DenseMatrix content;    // n x d_model
  DenseMatrix pos_embed;  // n x d_model

  int count() const { return anchors.rows(); }
  int d_model() const { return content.cols(); }
};

/// Anchors are drawn uniformly in the unit cube from `seed`; the positional
/// embedding net is seeded from the same stream, so the whole set is a pure
/// function of (n, d_model, seed).
AnchorQuerySet init_anchor_queries(int n, int d_model, std::uint64_t seed);

struct Box3DPrediction {
  Vec3 center_m;
  Vec3 size_m;          // strictly positive
  double yaw_rad = 0.0;  // in (-pi, pi]
  Vector class_logits;
};

struct DecoderConfig {
  int layers = 3;
  bool self_attention = true;  // off = bare cross-attention update
  bool scale_scores = true;    // 1/sqrt(d_model) on attention logits
  int n_classes = 4;
  Roi3D roi = Roi3D::default_roi();
};

/// Shared prediction head: query state -> [3 center, 3 size, 2 yaw, classes].
struct PredictionHead {
  LinearLayer map;

  static PredictionHead seeded(int d_model, int n_classes, Rng& rng);
  static PredictionHead zero(int d_model, int n_classes);
};

struct DecoderWeights {
  std::vector<Mlp2> ffn;  // one per layer, d_model -> hidden -> d_model
  PredictionHead head;

  static DecoderWeights seeded(const DecoderConfig& cfg, int d_model,
                               int ffn_hidden, std::uint64_t seed);
};

struct LayerTrace {
  DenseMatrix query_state;  // n_queries x d_model
  DenseMatrix attention;    // n_queries x n_tokens, rows sum to 1
  std::vector<Box3DPrediction> predictions;
};

struct DecoderTrace {
  std::vector<LayerTrace> layers;
};

struct CrossAttentionResult {
  DenseMatrix queries;    // updated content
  DenseMatrix attention;  // n_queries x n_tokens
};

/// One decoder layer: attention = softmax(q k^T [/ sqrt(d)]), output =
/// q + attention * v, then a residual feed-forward block. `token_mask`
/// (optional, one flag per token) forces masked tokens to exactly zero
/// attention weight.
CrossAttentionResult cross_attention_layer(
    const DenseMatrix& queries, const DenseMatrix& query_pos,
    const DenseMatrix& keys, const DenseMatrix& values, const Mlp2& ffn,
    bool scale_scores,
    const std::vector<std::uint8_t>* token_mask = nullptr);

/// L-layer refinement with a prediction head after every layer. Center =
/// anchor plus a sigmoid-bounded offset de-normalized into the ROI; size =
/// exp(raw); yaw = atan2(raw_sin, raw_cos).
DecoderTrace decode(const AnchorQuerySet& queries, const DenseMatrix& keys,
                    const DenseMatrix& values, const DecoderConfig& cfg,
                    const DecoderWeights& weights);

}  // namespace focaldet

#endif  // FOCALDET_DECODER_HPP_
