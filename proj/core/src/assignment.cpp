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

#include "focaldet/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace focaldet {

GiouResult giou_2d(const Box2D& a, const Box2D& b) {
  require(a.area() > 0.0 && b.area() > 0.0, "giou_2d: degenerate box");

  const double ix_min = std::max(a.x_min_px, b.x_min_px);
  const double iy_min = std::max(a.y_min_px, b.y_min_px);
  const double ix_max = std::min(a.x_max_px, b.x_max_px);
  const double iy_max = std::min(a.y_max_px, b.y_max_px);
  const double iw = std::max(0.0, ix_max - ix_min);
  const double ih = std::max(0.0, iy_max - iy_min);
  const double inter = iw * ih;

  const double hx_min = std::min(a.x_min_px, b.x_min_px);
  const double hy_min = std::min(a.y_min_px, b.y_min_px);
  const double hx_max = std::max(a.x_max_px, b.x_max_px);
  const double hy_max = std::max(a.y_max_px, b.y_max_px);
  const double hw = hx_max - hx_min;
  const double hh = hy_max - hy_min;
  const double hull = hw * hh;

  const double uni = a.area() + b.area() - inter;

  GiouResult out;
  out.value = inter / uni - (hull - uni) / hull;

  // Case analysis over which of a's sides are active in the intersection and
  // hull rectangles. d(area_a) is unconditional.
  const double aw = a.width();
  const double ah = a.height();
  const std::array<double, 4> d_area = {-ah, -aw, ah, aw};

  std::array<double, 4> d_inter{};
  if (inter > 0.0) {
    if (a.x_min_px > b.x_min_px) d_inter[0] = -ih;
    if (a.y_min_px > b.y_min_px) d_inter[1] = -iw;
    if (a.x_max_px < b.x_max_px) d_inter[2] = ih;
    if (a.y_max_px < b.y_max_px) d_inter[3] = iw;
  }

  std::array<double, 4> d_hull{};
  if (a.x_min_px < b.x_min_px) d_hull[0] = -hh;
  if (a.y_min_px < b.y_min_px) d_hull[1] = -hw;
  if (a.x_max_px > b.x_max_px) d_hull[2] = hh;
  if (a.y_max_px > b.y_max_px) d_hull[3] = hw;

  for (int k = 0; k < 4; ++k) {
    const double d_uni = d_area[static_cast<size_t>(k)] -
                         d_inter[static_cast<size_t>(k)];
    // d(I/U) + d(U/H); the constant -1 from -(H-U)/H = U/H - 1 drops out.
    out.grad[static_cast<size_t>(k)] =
        (d_inter[static_cast<size_t>(k)] * uni - inter * d_uni) / (uni * uni) +
        (d_uni * hull - uni * d_hull[static_cast<size_t>(k)]) / (hull * hull);
  }
  return out;
}

CostMatrix::CostMatrix(int rows, int cols, std::vector<double> costs)
    : m_(rows, cols, std::move(costs)) {
  require(rows >= cols,
          "CostMatrix: fewer prediction rows than truth columns; pad the "
          "prediction side");
  require(cols >= 1, "CostMatrix: need at least one truth column");
}

namespace {

std::array<double, 4> to_cxcywh_normalized(const Box2D& box, double img_w,
                                           double img_h) {
  return {box.center_u() / img_w, box.center_v() / img_h, box.width() / img_w,
          box.height() / img_h};
}

/// Exact solver via shortest augmenting paths with potentials, O(cols^2 *
/// rows). `row_of_col[j]` is the row matched to column j.
std::vector<int> hungarian_row_of_col(
    const std::vector<const double*>& row_ptrs, int n_rows, int n_cols) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the sentinel column.
  std::vector<double> u(static_cast<size_t>(n_cols) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(n_rows) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(n_rows) + 1, 0);
  for (int c = 1; c <= n_cols; ++c) {
    std::vector<double> min_slack(static_cast<size_t>(n_rows) + 1, kInf);
    std::vector<int> path(static_cast<size_t>(n_rows) + 1, 0);
    std::vector<char> used(static_cast<size_t>(n_rows) + 1, 0);
    match[0] = c;
    int r0 = 0;
    do {
      used[static_cast<size_t>(r0)] = 1;
      const int c0 = match[static_cast<size_t>(r0)];
      double delta = kInf;
      int r1 = 0;
      for (int r = 1; r <= n_rows; ++r) {
        if (used[static_cast<size_t>(r)]) continue;
        const double cur = row_ptrs[static_cast<size_t>(r - 1)][c0 - 1] -
                           u[static_cast<size_t>(c0)] -
                           v[static_cast<size_t>(r)];
        if (cur < min_slack[static_cast<size_t>(r)]) {
          min_slack[static_cast<size_t>(r)] = cur;
          path[static_cast<size_t>(r)] = r0;
        }
        if (min_slack[static_cast<size_t>(r)] < delta) {
          delta = min_slack[static_cast<size_t>(r)];
          r1 = r;
        }
      }
      for (int r = 0; r <= n_rows; ++r) {
        if (used[static_cast<size_t>(r)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(r)])] += delta;
          v[static_cast<size_t>(r)] -= delta;
        } else {
          min_slack[static_cast<size_t>(r)] -= delta;
        }
      }
      r0 = r1;
    } while (match[static_cast<size_t>(r0)] != 0);
    do {
      const int r1 = path[static_cast<size_t>(r0)];
      match[static_cast<size_t>(r0)] = match[static_cast<size_t>(r1)];
      r0 = r1;
    } while (r0 != 0);
  }

  std::vector<int> row_of_col(static_cast<size_t>(n_cols), -1);
  for (int r = 1; r <= n_rows; ++r) {
    if (match[static_cast<size_t>(r)] > 0) {
      row_of_col[static_cast<size_t>(match[static_cast<size_t>(r)]) - 1] =
          r - 1;
    }
  }
  return row_of_col;
}

/// Minimum assignment cost using only rows not in `banned`, over columns
/// [first_col, cols). Returns 0 for an empty column range.
double reduced_min_cost(const CostMatrix& m, const std::vector<char>& banned,
                        int first_col) {
  const int n_cols = m.cols() - first_col;
  if (n_cols == 0) return 0.0;
  std::vector<int> rows;
  rows.reserve(static_cast<size_t>(m.rows()));
  for (int r = 0; r < m.rows(); ++r) {
    if (!banned[static_cast<size_t>(r)]) rows.push_back(r);
  }
  std::vector<std::vector<double>> sub(rows.size());
  std::vector<const double*> ptrs(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    sub[i].resize(static_cast<size_t>(n_cols));
    for (int c = 0; c < n_cols; ++c) {
      sub[i][static_cast<size_t>(c)] = m.at(rows[i], first_col + c);
    }
    ptrs[i] = sub[i].data();
  }
  const std::vector<int> row_of_col =
      hungarian_row_of_col(ptrs, static_cast<int>(rows.size()), n_cols);
  double total = 0.0;
  for (int c = 0; c < n_cols; ++c) {
    total += sub[static_cast<size_t>(row_of_col[static_cast<size_t>(c)])]
                [static_cast<size_t>(c)];
  }
  return total;
}

}  // namespace

CostMatrix build_cost_matrix(const std::vector<Prediction2D>& preds,
                             const std::vector<GroundTruth2D>& truths,
                             const CostWeights& w, double img_w, double img_h) {
  require(!truths.empty(), "build_cost_matrix: need at least one ground truth");
  require(preds.size() >= truths.size(),
          "build_cost_matrix: fewer predictions than truths; pad predictions");
  require(img_w > 0.0 && img_h > 0.0, "build_cost_matrix: bad image size");

  std::vector<double> costs;
  costs.reserve(preds.size() * truths.size());
  for (const Prediction2D& pred : preds) {
    const auto pb = to_cxcywh_normalized(pred.box, img_w, img_h);
    for (const GroundTruth2D& gt : truths) {
      require(gt.label >= 0 &&
                  gt.label < static_cast<int>(pred.class_scores.size()),
              "build_cost_matrix: label " + std::to_string(gt.label) +
                  " outside class-score range");
      const auto gb = to_cxcywh_normalized(gt.box, img_w, img_h);
      double l1 = 0.0;
      for (int k = 0; k < 4; ++k) {
        l1 += std::abs(pb[static_cast<size_t>(k)] - gb[static_cast<size_t>(k)]);
      }
      const double cost =
          -w.cls * pred.class_scores[static_cast<size_t>(gt.label)] +
          w.l1 * l1 + w.giou * (1.0 - giou_2d(pred.box, gt.box).value);
      costs.push_back(cost);
    }
  }
  return CostMatrix(static_cast<int>(preds.size()),
                    static_cast<int>(truths.size()), std::move(costs));
}

Assignment match_hungarian(const CostMatrix& m) {
  std::vector<std::vector<double>> full(static_cast<size_t>(m.rows()));
  std::vector<const double*> ptrs(static_cast<size_t>(m.rows()));
  for (int r = 0; r < m.rows(); ++r) {
    full[static_cast<size_t>(r)].resize(static_cast<size_t>(m.cols()));
    for (int c = 0; c < m.cols(); ++c) {
      full[static_cast<size_t>(r)][static_cast<size_t>(c)] = m.at(r, c);
    }
    ptrs[static_cast<size_t>(r)] = full[static_cast<size_t>(r)].data();
  }
  const std::vector<int> base = hungarian_row_of_col(ptrs, m.rows(), m.cols());
  double optimum = 0.0;
  for (int c = 0; c < m.cols(); ++c) {
    optimum += m.at(base[static_cast<size_t>(c)], c);
  }

  // Refine to the lexicographically smallest optimal assignment: fix columns
  // left to right on the lowest row that still completes at the optimum.
  const double tol = 1e-9 * (1.0 + std::abs(optimum));
  std::vector<char> banned(static_cast<size_t>(m.rows()), 0);
  Assignment out;
  out.row_of_col.assign(static_cast<size_t>(m.cols()), -1);
  double prefix = 0.0;
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      if (banned[static_cast<size_t>(r)]) continue;
      banned[static_cast<size_t>(r)] = 1;
      const double candidate =
          prefix + m.at(r, c) + reduced_min_cost(m, banned, c + 1);
      if (candidate <= optimum + tol) {
        out.row_of_col[static_cast<size_t>(c)] = r;
        prefix += m.at(r, c);
        break;
      }
      banned[static_cast<size_t>(r)] = 0;
    }
    require(out.row_of_col[static_cast<size_t>(c)] >= 0,
            "match_hungarian: refinement failed to complete the assignment");
  }

  out.total_cost = 0.0;
  for (int c = 0; c < m.cols(); ++c) {
    out.total_cost += m.at(out.row_of_col[static_cast<size_t>(c)], c);
  }
  return out;
}

}  // namespace focaldet
