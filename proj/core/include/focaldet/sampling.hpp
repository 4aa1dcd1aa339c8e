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

#ifndef FOCALDET_SAMPLING_HPP_
#define FOCALDET_SAMPLING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "focaldet/numeric.hpp"

namespace focaldet {

/// Probabilities are clamped into [kProbEpsilon, 1 - kProbEpsilon] before any
/// logarithm.
inline constexpr double kProbEpsilon = 1e-6;

/// Axis-aligned 2D box in pixels.
struct Box2D {
  double x_min_px;
  double y_min_px;
  double x_max_px;
  double y_max_px;

  Box2D(double x_min, double y_min, double x_max, double y_max);

  double width() const { return x_max_px - x_min_px; }
  double height() const { return y_max_px - y_min_px; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (x_min_px + x_max_px); }
  double center_v() const { return 0.5 * (y_min_px + y_max_px); }
  bool contains(double u, double v) const {
    return u >= x_min_px && u <= x_max_px && v >= y_min_px && v <= y_max_px;
  }
};

struct LtrbTarget {
  double l = 0.0;
  double t = 0.0;
  double r = 0.0;
  double b = 0.0;
};

/// Distances from a location to the four box sides, divided by `normalizer`.
/// Callers are expected to pass locations inside the box; outside locations
/// are background and produce negative components.
LtrbTarget ltrb_targets(const Box2D& box, double u_px, double v_px,
                        double normalizer_px);

// ---------------------------------------------------------------------------
// Centroid heatmap.
// ---------------------------------------------------------------------------

/// One object's contribution to the heatmap: continuous center position in
/// feature-map (token) units plus its size-adaptation coefficient.
struct HeatmapObject {
  double cx_tok;
  double cy_tok;
  double delta;
};

/// Size-adaptation coefficient: (0.15 * min_side_tokens)^2, floored at 0.25.
double heatmap_delta(double min_side_tokens);

struct HeatmapResult {
  std::vector<double> values;  // row major, grid_h x grid_w
  int skipped_centers = 0;     // centers off-grid after snapping
};

/// H(x, y) = exp(-((x-cx)^2 + (y-cy)^2) / (2 delta)) per token; centers snap
/// to their containing cell; overlapping objects combine by elementwise max.
HeatmapResult gaussian_heatmap(const std::vector<HeatmapObject>& objects,
                               int grid_w, int grid_h);

// ---------------------------------------------------------------------------
// 2.5D center offsets.
// ---------------------------------------------------------------------------

struct CenterOffset {
  int col = 0;
  int row = 0;
  double du = 0.0;  // fractional residual within the cell, in [0, 1)
  double dv = 0.0;
};

CenterOffset center_offset_targets(double center_u_px, double center_v_px,
                                   double stride_px);

// ---------------------------------------------------------------------------
// Losses, each with its analytic gradient.
// ---------------------------------------------------------------------------

struct LossGrad {
  double loss = 0.0;
  double grad = 0.0;
};

/// Joint classification-IoU quality loss for one token:
///   -|y - q|^beta ((1-y) log(1-q) + y log(q))
/// q is clamped before the logs; grad is d loss / d q.
LossGrad quality_focal_loss(double q, double y, double beta);

struct LossGrads {
  double loss = 0.0;
  Vector grad;
};

/// Centroid supervision over a dense map. Peak tokens (h == 1) contribute
/// -(1-c)^a log c; the rest contribute -(1-h)^b c^a log(1-c). Mean over
/// tokens. Defaults a = 2, b = 4.
LossGrads centerness_focal_loss(std::span<const double> c,
                                std::span<const double> h, double a_exp,
                                double b_exp);

/// Sum of absolute differences with its sign gradient.
LossGrads l1_loss(std::span<const double> pred, std::span<const double> target);

// ---------------------------------------------------------------------------
// Priority and selection.
// ---------------------------------------------------------------------------

/// P = Q^alpha * C^(1-alpha).
double sampling_priority(double q, double c, double alpha);

/// Indices of the ceil(rho * N) highest-priority tokens, returned in
/// ascending index order. Ties rank the lower index first.
std::vector<size_t> select_top_ratio(std::span<const double> priorities,
                                     double rho);

// ---------------------------------------------------------------------------
// Aggregate auxiliary loss.
// ---------------------------------------------------------------------------

struct AuxComponents {
  double quality = 0.0;        // summed quality focal loss
  double center_offset = 0.0;  // summed 2.5D offset L1
  double giou = 0.0;           // summed (1 - GIoU) over matched pairs
  double ltrb = 0.0;           // summed ltrb L1
  double centerness = 0.0;     // mean centerness focal loss
};

struct AuxWeights {
  double quality = 2.0;
  double center_offset = 10.0;
  double giou = 5.0;
  double ltrb = 2.0;
  double centerness = 1.0;
};

/// Weighted sum of the five components divided by n_pos. A scene with no
/// positives is degenerate: the total is defined as 0 and a warning is
/// recorded when `warnings` is provided.
double auxiliary_loss_total(const AuxComponents& components,
                            const AuxWeights& weights, int n_pos,
                            std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Per-token score maps.
// ---------------------------------------------------------------------------

/// Pooled per-token maps: quality Q, centerness C, priority P and the sampled
/// flags filled in by selection.
struct QualityMaps {
  Vector q;
  Vector c;
  Vector p;
  double alpha = 0.5;
  std::vector<std::uint8_t> sampled;
  size_t sampled_count = 0;
};

QualityMaps build_quality_maps(Vector q, Vector c, double alpha);
void mark_sampled(QualityMaps& maps, std::span<const size_t> indices);

/// Dense targets for one camera grid. class_id is -1 for background tokens.
struct TokenTargets {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<int> class_id;
  std::vector<LtrbTarget> ltrb;
  std::vector<double> heatmap;
  std::vector<double> quality_y;
  std::vector<CenterOffset> center_offsets;  // one per visible instance
  std::vector<size_t> center_tokens;         // flat token per visible instance
  int skipped_centers = 0;
};

}  // namespace focaldet

#endif  // FOCALDET_SAMPLING_HPP_
