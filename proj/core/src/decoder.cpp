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

#include "focaldet/decoder.hpp"

#include <cmath>
#include <numbers>

namespace focaldet {

namespace {

// Finite stand-in for -inf on masked logits; exp underflows to exactly 0.
constexpr double kMaskedLogit = -1e300;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

DenseMatrix attention_block(const DenseMatrix& q_eff, const DenseMatrix& keys,
                            bool scale_scores,
                            const std::vector<std::uint8_t>* token_mask) {
  DenseMatrix logits = matmul_transposed(q_eff, keys);
  if (scale_scores) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(q_eff.cols()));
    for (double& v : logits.data()) v *= scale;
  }
  if (token_mask != nullptr) {
    require(static_cast<int>(token_mask->size()) == keys.rows(),
            "cross_attention_layer: mask length must equal token count");
    bool any_open = false;
    for (std::uint8_t m : *token_mask) any_open |= (m == 0);
    require(any_open, "cross_attention_layer: all tokens masked");
    for (int i = 0; i < logits.rows(); ++i) {
      for (int j = 0; j < logits.cols(); ++j) {
        if ((*token_mask)[static_cast<size_t>(j)]) {
          logits.at(i, j) = kMaskedLogit;
        }
      }
    }
  }
  return softmax_rows(logits);
}

}  // namespace

AnchorQuerySet init_anchor_queries(int n, int d_model, std::uint64_t seed) {
  require(n >= 1, "init_anchor_queries: need at least one query");
  require(d_model >= 1, "init_anchor_queries: d_model must be positive");
  Rng rng(seed);
  Rng anchor_rng = rng.fork(0xA0C0);
  Rng net_rng = rng.fork(0xB1D1);

  DenseMatrix anchors(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) anchors.at(i, k) = anchor_rng.uniform01();
  }

  const Mlp2 pos_net = Mlp2::seeded(3, d_model, d_model, net_rng);
  DenseMatrix pos(n, d_model);
  for (int i = 0; i < n; ++i) {
    const Vector e = mlp2_forward(anchors.row(i), pos_net);
    for (int k = 0; k < d_model; ++k) pos.at(i, k) = e[static_cast<size_t>(k)];
  }

  return {std::move(anchors), DenseMatrix(n, d_model), std::move(pos)};
}

PredictionHead PredictionHead::seeded(int d_model, int n_classes, Rng& rng) {
  return {LinearLayer::seeded(d_model, 8 + n_classes, rng)};
}

PredictionHead PredictionHead::zero(int d_model, int n_classes) {
  return {LinearLayer::zero(d_model, 8 + n_classes)};
}

DecoderWeights DecoderWeights::seeded(const DecoderConfig& cfg, int d_model,
                                      int ffn_hidden, std::uint64_t seed) {
  Rng rng(seed);
  DecoderWeights w;
  w.ffn.reserve(static_cast<size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l) {
    Rng layer_rng = rng.fork(0x100 + static_cast<std::uint64_t>(l));
    w.ffn.push_back(Mlp2::seeded(d_model, ffn_hidden, d_model, layer_rng));
  }
  Rng head_rng = rng.fork(0x999);
  w.head = PredictionHead::seeded(d_model, cfg.n_classes, head_rng);
  return w;
}

CrossAttentionResult cross_attention_layer(
    const DenseMatrix& queries, const DenseMatrix& query_pos,
    const DenseMatrix& keys, const DenseMatrix& values, const Mlp2& ffn,
    bool scale_scores, const std::vector<std::uint8_t>* token_mask) {
  require(keys.rows() >= 1, "cross_attention_layer: zero tokens");
  require(keys.rows() == values.rows() && keys.cols() == values.cols(),
          "cross_attention_layer: key/value shape mismatch");
  require(queries.cols() == keys.cols(),
          "cross_attention_layer: query width must match key width");
  require(query_pos.rows() == queries.rows() &&
              query_pos.cols() == queries.cols(),
          "cross_attention_layer: query positional embedding shape mismatch");

  const DenseMatrix attention =
      attention_block(add(queries, query_pos), keys, scale_scores, token_mask);
  DenseMatrix updated = add(queries, matmul(attention, values));
  for (int i = 0; i < updated.rows(); ++i) {
    const Vector f = mlp2_forward(updated.row(i), ffn);
    for (int k = 0; k < updated.cols(); ++k) {
      updated.at(i, k) += f[static_cast<size_t>(k)];
    }
  }
  return {std::move(updated), attention};
}

namespace {

DenseMatrix self_attention_block(const DenseMatrix& content,
                                 const DenseMatrix& pos, bool scale_scores) {
  const DenseMatrix q_eff = add(content, pos);
  const DenseMatrix attention =
      attention_block(q_eff, q_eff, scale_scores, nullptr);
  return add(content, matmul(attention, content));
}

std::vector<Box3DPrediction> predict_boxes(const DenseMatrix& state,
                                           const DenseMatrix& anchors,
                                           const DecoderConfig& cfg,
                                           const PredictionHead& head) {
  std::vector<Box3DPrediction> preds;
  preds.reserve(static_cast<size_t>(state.rows()));
  const Vec3 roi_min = cfg.roi.min_m;
  const Vec3 roi_ext = cfg.roi.extent_m();
  for (int i = 0; i < state.rows(); ++i) {
    const Vector raw = linear_forward(state.row(i), head.map);
    Box3DPrediction p;
    double center_norm[3];
    for (int k = 0; k < 3; ++k) {
      const double offset =
          kCenterOffsetRange * (2.0 * sigmoid(raw[static_cast<size_t>(k)]) - 1.0);
      center_norm[k] = anchors.at(i, k) + offset;
    }
    p.center_m = {roi_min.x + center_norm[0] * roi_ext.x,
                  roi_min.y + center_norm[1] * roi_ext.y,
                  roi_min.z + center_norm[2] * roi_ext.z};
    p.size_m = {std::exp(raw[3]), std::exp(raw[4]), std::exp(raw[5])};
    p.yaw_rad = std::atan2(raw[6], raw[7]);
    if (p.yaw_rad <= -std::numbers::pi) p.yaw_rad += 2.0 * std::numbers::pi;
    p.class_logits.assign(raw.begin() + 8, raw.end());
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace

DecoderTrace decode(const AnchorQuerySet& queries, const DenseMatrix& keys,
                    const DenseMatrix& values, const DecoderConfig& cfg,
                    const DecoderWeights& weights) {
  require(cfg.layers >= 1, "decode: need at least one layer");
  require(static_cast<int>(weights.ffn.size()) == cfg.layers,
          "decode: one feed-forward block per layer required");

  DecoderTrace trace;
  trace.layers.reserve(static_cast<size_t>(cfg.layers));
  DenseMatrix content = queries.content;
  for (int l = 0; l < cfg.layers; ++l) {
    if (cfg.self_attention) {
      content =
          self_attention_block(content, queries.pos_embed, cfg.scale_scores);
    }
    CrossAttentionResult result = cross_attention_layer(
        content, queries.pos_embed, keys, values,
        weights.ffn[static_cast<size_t>(l)], cfg.scale_scores);
    content = std::move(result.queries);

    LayerTrace layer;
    layer.query_state = content;
    layer.attention = std::move(result.attention);
    layer.predictions = predict_boxes(content, queries.anchors, cfg,
                                      weights.head);
    trace.layers.push_back(std::move(layer));
  }
  return trace;
}

}  // namespace focaldet
