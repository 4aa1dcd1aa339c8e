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

#ifndef FOCALDET_ENCODING_HPP_
#define FOCALDET_ENCODING_HPP_

#include <string>
#include <utility>
#include <vector>

#include "focaldet/camera.hpp"
#include "focaldet/numeric.hpp"

namespace focaldet {

/// One camera's token map: per-token content vectors plus grid metadata.
/// Token (row, col) covers the square of `stride` pixels whose center is
/// ((col + 0.5) * stride, (row + 0.5) * stride).
struct TokenGrid {
  int camera_index = 0;
  int width = 0;   // tokens
  int height = 0;  // tokens
  int stride = 1;  // pixels per token
  DenseMatrix features;  // token_count x d_model, row major by (row, col)

  TokenGrid(int camera_index, int width, int height, int stride,
            DenseMatrix features);

  int token_count() const { return width * height; }
  int d_model() const { return features.cols(); }
  size_t flat(int row, int col) const {
    return static_cast<size_t>(row) * width + static_cast<size_t>(col);
  }
  std::pair<double, double> pixel_center(int row, int col) const {
    return {(col + 0.5) * stride, (row + 0.5) * stride};
  }
};

struct PosEmbedGrid {
  DenseMatrix embed;  // token_count x d_model
};

struct LidConfig {
  double depth_min_m = 1.0;
  double depth_max_m = 61.2;
  int bins = 8;
};

/// Which geometric quantities feed the alignment networks: the pixel ray
/// alone, or the full frustum cone including intrinsics and footprint.
enum class AlignmentContent { kRay, kCone };

AlignmentContent parse_alignment_content(const std::string& name);
int alignment_input_dim(AlignmentContent content);

/// Parameter vector fed to the alignment networks. Ray content packs
/// direction and origin (6 values); cone content appends fx, fy and the mean
/// per-token footprint (9 values).
Vector cone_param_vector(const ConeParams& cone, AlignmentContent content);

/// Two feedforward nets mapping cone parameters to per-channel weight and
/// bias vectors.
struct AlignmentNet {
  Mlp2 weight_net;
  Mlp2 bias_net;
  AlignmentContent content = AlignmentContent::kCone;

  static AlignmentNet seeded(AlignmentContent content, int hidden_dim,
                             int d_model, Rng& rng);
  /// Exact identity: weight net outputs 1, bias net outputs 0.
  static AlignmentNet identity(AlignmentContent content, int hidden_dim,
                               int d_model);
};

/// Implicit 3D position embedding: per token, trace the pixel ray, sample it
/// at the LID depths, normalize into the ROI, and push the flattened points
/// through `phi`. Requires phi.in_dim == 3 * (lid.bins + 1).
PosEmbedGrid position_embedding(const TokenGrid& grid, const CameraModel& cam,
                                const Mlp2& phi, const LidConfig& lid,
                                const Roi3D& roi);

/// Per-token affine modulation F* = w(cone) * F + b(cone), elementwise.
/// The input grid is left untouched.
TokenGrid spatial_align(const TokenGrid& grid,
                        const std::vector<ConeParams>& cones,
                        const AlignmentNet& net);

enum class ComposeMode { kPetr, kFocal };

/// Parses "petr" / "focal"; anything else is a configuration error.
ComposeMode parse_compose_mode(const std::string& name);

struct KeyValue {
  DenseMatrix keys;    // token_count x d_model
  DenseMatrix values;  // token_count x d_model
};

/// petr mode: k = F + E, v = F (values carry no geometry).
/// focal mode: k = F* + E, v = F*, where the caller passes the aligned grid.
KeyValue compose_key_value(const TokenGrid& grid, const PosEmbedGrid& embed,
                           ComposeMode mode);

}  // namespace focaldet

#endif  // FOCALDET_ENCODING_HPP_
