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

#ifndef FOCALDET_ASSIGNMENT_HPP_
#define FOCALDET_ASSIGNMENT_HPP_

#include <array>
#include <vector>

#include "focaldet/numeric.hpp"
#include "focaldet/sampling.hpp"

namespace focaldet {

struct GiouResult {
  double value = 0.0;
  /// d value / d (a.x_min, a.y_min, a.x_max, a.y_max). Piecewise; undefined
  /// exactly at coordinate coincidences, where a subgradient is returned.
  std::array<double, 4> grad{};
};

/// Generalized IoU: IoU - (hull - union) / hull, in (-1, 1].
GiouResult giou_2d(const Box2D& a, const Box2D& b);

/// Rows are predictions, columns are ground truths; rows >= cols (pad the
/// prediction side, never the truth side).
struct CostMatrix {
  CostMatrix(int rows, int cols, std::vector<double> costs);

  int rows() const { return m_.rows(); }
  int cols() const { return m_.cols(); }
  double at(int r, int c) const { return m_.at(r, c); }

 private:
  DenseMatrix m_;
};

struct Prediction2D {
  Box2D box;
  Vector class_scores;
};

struct GroundTruth2D {
  Box2D box;
  int label = 0;
};

struct CostWeights {
  double cls = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
};

/// cost(i, j) = -w_cls * score_i[label_j] + w_l1 * |box_i - box_j|_1
///              + w_giou * (1 - GIoU(i, j)).
/// The L1 term compares (cx, cy, w, h) normalized by the image size.
CostMatrix build_cost_matrix(const std::vector<Prediction2D>& predictions,
                             const std::vector<GroundTruth2D>& truths,
                             const CostWeights& weights, double image_w_px,
                             double image_h_px);

struct Assignment {
  std::vector<int> row_of_col;  // prediction row matched to each truth column
  double total_cost = 0.0;      // summed in ascending column order
};

/// Exact minimum-cost one-to-one assignment of every column to a distinct
/// row. Among cost ties the lexicographically smallest assignment (scanning
/// columns in order, preferring lower row indices) is returned.
Assignment match_hungarian(const CostMatrix& costs);

}  // namespace focaldet

#endif  // FOCALDET_ASSIGNMENT_HPP_
