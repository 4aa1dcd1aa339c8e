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

#include "focaldet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace focaldet {

namespace {

double clamp_prob(double p) {
  return std::min(std::max(p, kProbEpsilon), 1.0 - kProbEpsilon);
}

}  // namespace

Box2D::Box2D(double x_min, double y_min, double x_max, double y_max)
    : x_min_px(x_min), y_min_px(y_min), x_max_px(x_max), y_max_px(y_max) {
  require(x_min < x_max && y_min < y_max,
          "Box2D: min corner must be strictly below max corner");
}

LtrbTarget ltrb_targets(const Box2D& box, double u, double v,
                        double normalizer) {
  require(normalizer > 0.0, "ltrb_targets: normalizer must be positive");
  return {(u - box.x_min_px) / normalizer, (v - box.y_min_px) / normalizer,
          (box.x_max_px - u) / normalizer, (box.y_max_px - v) / normalizer};
}

double heatmap_delta(double min_side_tokens) {
  require(min_side_tokens > 0.0, "heatmap_delta: box side must be positive");
  const double d = 0.15 * min_side_tokens;
  return std::max(d * d, 0.25);
}

HeatmapResult gaussian_heatmap(const std::vector<HeatmapObject>& objects,
                               int grid_w, int grid_h) {
  require(grid_w > 0 && grid_h > 0, "gaussian_heatmap: empty grid");
  HeatmapResult result;
  result.values.assign(static_cast<size_t>(grid_w) * grid_h, 0.0);
  for (const HeatmapObject& obj : objects) {
    require(obj.delta > 0.0, "gaussian_heatmap: delta must be positive");
    // Centers snap to the cell that contains them, matching the offset
    // targets; the peak token is therefore the token holding the center.
    const double cx = std::floor(obj.cx_tok);
    const double cy = std::floor(obj.cy_tok);
    if (cx < 0 || cx >= grid_w || cy < 0 || cy >= grid_h) {
      ++result.skipped_centers;
      continue;
    }
    for (int row = 0; row < grid_h; ++row) {
      for (int col = 0; col < grid_w; ++col) {
        const double dx = col - cx;
        const double dy = row - cy;
        const double h = std::exp(-(dx * dx + dy * dy) / (2.0 * obj.delta));
        double& cell = result.values[static_cast<size_t>(row) * grid_w + col];
        cell = std::max(cell, h);
      }
    }
  }
  return result;
}

CenterOffset center_offset_targets(double u, double v, double stride) {
  require(stride >= 1.0, "center_offset_targets: stride must be >= 1");
  const double cu = u / stride;
  const double cv = v / stride;
  CenterOffset offset;
  offset.col = static_cast<int>(std::floor(cu));
  offset.row = static_cast<int>(std::floor(cv));
  offset.du = cu - std::floor(cu);
  offset.dv = cv - std::floor(cv);
  return offset;
}

LossGrad quality_focal_loss(double q, double y, double beta) {
  require(y >= 0.0 && y <= 1.0, "quality_focal_loss: target outside [0,1]");
  require(beta >= 0.0, "quality_focal_loss: beta must be nonnegative");
  q = clamp_prob(q);

  const double diff = y - q;
  const double mod = beta == 0.0 ? 1.0 : std::pow(std::abs(diff), beta);
  const double ce = (1.0 - y) * std::log(1.0 - q) + y * std::log(q);

  LossGrad out;
  out.loss = -mod * ce;

  double dmod = 0.0;
  if (beta > 0.0 && diff != 0.0) {
    const double sign = q > y ? 1.0 : -1.0;
    dmod = beta * std::pow(std::abs(diff), beta - 1.0) * sign;
  }
  const double dce = -(1.0 - y) / (1.0 - q) + y / q;
  out.grad = -(dmod * ce + mod * dce);
  return out;
}

LossGrads centerness_focal_loss(std::span<const double> c,
                                std::span<const double> h, double a_exp,
                                double b_exp) {
  require(c.size() == h.size() && !c.empty(),
          "centerness_focal_loss: map sizes differ or are empty");
  const double n = static_cast<double>(c.size());
  LossGrads out;
  out.grad.assign(c.size(), 0.0);
  for (size_t i = 0; i < c.size(); ++i) {
    require(h[i] >= 0.0 && h[i] <= 1.0,
            "centerness_focal_loss: heatmap outside [0,1]");
    const double ci = clamp_prob(c[i]);
    double loss_i, grad_i;
    if (h[i] >= 1.0) {
      const double om = 1.0 - ci;
      loss_i = -std::pow(om, a_exp) * std::log(ci);
      grad_i = a_exp * std::pow(om, a_exp - 1.0) * std::log(ci) -
               std::pow(om, a_exp) / ci;
    } else {
      const double w = std::pow(1.0 - h[i], b_exp);
      loss_i = -w * std::pow(ci, a_exp) * std::log(1.0 - ci);
      grad_i = -w * (a_exp * std::pow(ci, a_exp - 1.0) * std::log(1.0 - ci) -
                     std::pow(ci, a_exp) / (1.0 - ci));
    }
    out.loss += loss_i / n;
    out.grad[i] = grad_i / n;
  }
  return out;
}

LossGrads l1_loss(std::span<const double> pred,
                  std::span<const double> target) {
  require(pred.size() == target.size(), "l1_loss: length mismatch");
  LossGrads out;
  out.grad.assign(pred.size(), 0.0);
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += std::abs(d);
    out.grad[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

double sampling_priority(double q, double c, double alpha) {
  require(q > 0.0 && q <= 1.0 && c > 0.0 && c <= 1.0,
          "sampling_priority: scores must lie in (0,1]");
  require(alpha >= 0.0 && alpha <= 1.0,
          "sampling_priority: alpha must lie in [0,1]");
  return std::pow(q, alpha) * std::pow(c, 1.0 - alpha);
}

std::vector<size_t> select_top_ratio(std::span<const double> priorities,
                                     double rho) {
  require(!priorities.empty(), "select_top_ratio: empty token set");
  require(rho > 0.0 && rho <= 1.0, "select_top_ratio: rho must be in (0,1]");
  const size_t keep = static_cast<size_t>(
      std::ceil(rho * static_cast<double>(priorities.size())));

  std::vector<size_t> order(priorities.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (priorities[a] != priorities[b]) return priorities[a] > priorities[b];
    return a < b;  // deterministic tie rule: lower flat index wins
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

double auxiliary_loss_total(const AuxComponents& comp, const AuxWeights& w,
                            int n_pos, std::vector<std::string>* warnings) {
  require(n_pos >= 0, "auxiliary_loss_total: negative positive count");
  if (n_pos == 0) {
    if (warnings != nullptr) {
      warnings->push_back(
          "auxiliary_loss_total: no positive samples; total defined as 0");
    }
    return 0.0;
  }
  const double weighted = w.quality * comp.quality +
                          w.center_offset * comp.center_offset +
                          w.giou * comp.giou + w.ltrb * comp.ltrb +
                          w.centerness * comp.centerness;
  return weighted / static_cast<double>(n_pos);
}

QualityMaps build_quality_maps(Vector q, Vector c, double alpha) {
  require(q.size() == c.size() && !q.empty(),
          "build_quality_maps: score map sizes differ or are empty");
  QualityMaps maps;
  maps.alpha = alpha;
  maps.q = std::move(q);
  maps.c = std::move(c);
  maps.p.resize(maps.q.size());
  for (size_t i = 0; i < maps.q.size(); ++i) {
    maps.p[i] = sampling_priority(maps.q[i], maps.c[i], alpha);
  }
  maps.sampled.assign(maps.q.size(), 0);
  return maps;
}

void mark_sampled(QualityMaps& maps, std::span<const size_t> indices) {
  std::fill(maps.sampled.begin(), maps.sampled.end(), 0);
  for (size_t idx : indices) {
    require(idx < maps.sampled.size(), "mark_sampled: index out of range");
    maps.sampled[idx] = 1;
  }
  maps.sampled_count = indices.size();
}

}  // namespace focaldet
