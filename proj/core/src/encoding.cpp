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

#include "focaldet/encoding.hpp"

namespace focaldet {

TokenGrid::TokenGrid(int camera_index, int width, int height, int stride,
                     DenseMatrix f)
    : camera_index(camera_index), width(width), height(height), stride(stride),
      features(std::move(f)) {
  require(width > 0 && height > 0, "TokenGrid: empty grid");
  require(stride >= 1, "TokenGrid: stride must be >= 1");
  require(features.rows() == width * height,
          "TokenGrid: feature rows must equal token count");
}

AlignmentContent parse_alignment_content(const std::string& name) {
  if (name == "ray") return AlignmentContent::kRay;
  if (name == "cone") return AlignmentContent::kCone;
  throw InputError("unknown alignment content '" + name +
                   "' (expected 'ray' or 'cone')");
}

int alignment_input_dim(AlignmentContent content) {
  return content == AlignmentContent::kRay ? 6 : 9;
}

Vector cone_param_vector(const ConeParams& cone, AlignmentContent content) {
  Vector v = {cone.direction.x, cone.direction.y, cone.direction.z,
              cone.origin_m.x,  cone.origin_m.y,  cone.origin_m.z};
  if (content == AlignmentContent::kCone) {
    v.push_back(cone.fx_px);
    v.push_back(cone.fy_px);
    v.push_back(0.5 * (cone.footprint_u + cone.footprint_v));
  }
  return v;
}

AlignmentNet AlignmentNet::seeded(AlignmentContent content, int hidden_dim,
                                  int d_model, Rng& rng) {
  const int in_dim = alignment_input_dim(content);
  return {Mlp2::seeded(in_dim, hidden_dim, d_model, rng),
          Mlp2::seeded(in_dim, hidden_dim, d_model, rng), content};
}

AlignmentNet AlignmentNet::identity(AlignmentContent content, int hidden_dim,
                                    int d_model) {
  const int in_dim = alignment_input_dim(content);
  return {Mlp2::constant(in_dim, hidden_dim, d_model, 1.0),
          Mlp2::zero(in_dim, hidden_dim, d_model), content};
}

PosEmbedGrid position_embedding(const TokenGrid& grid, const CameraModel& cam,
                                const Mlp2& phi, const LidConfig& lid,
                                const Roi3D& roi) {
  require(phi.in_dim() == 3 * (lid.bins + 1),
          "position_embedding: phi.in_dim must be 3*(bins+1)");
  require(phi.out_dim() == grid.d_model(),
          "position_embedding: phi.out_dim must match d_model");
  const std::vector<double> depths =
      lid_depth_bins(lid.depth_min_m, lid.depth_max_m, lid.bins);

  DenseMatrix embed(grid.token_count(), grid.d_model());
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const auto [u, v] = grid.pixel_center(row, col);
      const Ray ray = pixel_ray(cam, u, v);
      const Vector flat = flatten_points(
          normalize_points(sample_ray_points(ray, depths), roi));
      const Vector e = mlp2_forward(flat, phi);
      const size_t token = grid.flat(row, col);
      for (int k = 0; k < grid.d_model(); ++k) {
        embed.at(static_cast<int>(token), k) = e[static_cast<size_t>(k)];
      }
    }
  }
  return {std::move(embed)};
}

TokenGrid spatial_align(const TokenGrid& grid,
                        const std::vector<ConeParams>& cones,
                        const AlignmentNet& net) {
  require(static_cast<int>(cones.size()) == grid.token_count(),
          "spatial_align: need exactly one cone per token");
  require(net.weight_net.out_dim() == grid.d_model() &&
              net.bias_net.out_dim() == grid.d_model(),
          "spatial_align: alignment net output must match d_model");

  TokenGrid aligned = grid;
  for (int token = 0; token < grid.token_count(); ++token) {
    const Vector params =
        cone_param_vector(cones[static_cast<size_t>(token)], net.content);
    const Vector w = mlp2_forward(params, net.weight_net);
    const Vector b = mlp2_forward(params, net.bias_net);
    for (int k = 0; k < grid.d_model(); ++k) {
      aligned.features.at(token, k) =
          w[static_cast<size_t>(k)] * grid.features.at(token, k) +
          b[static_cast<size_t>(k)];
    }
  }
  return aligned;
}

ComposeMode parse_compose_mode(const std::string& name) {
  if (name == "petr") return ComposeMode::kPetr;
  if (name == "focal") return ComposeMode::kFocal;
  throw InputError("unknown mode '" + name + "' (expected 'petr' or 'focal')");
}

KeyValue compose_key_value(const TokenGrid& grid, const PosEmbedGrid& embed,
                           ComposeMode /*mode*/) {
  // Both modes share the composition rule; the mode only selects which grid
  // (raw or spatially aligned) the caller supplies. Keys carry the position
  // embedding, values never do.
  require(embed.embed.rows() == grid.features.rows() &&
              embed.embed.cols() == grid.features.cols(),
          "compose_key_value: embedding shape must match features");
  return {add(grid.features, embed.embed), grid.features};
}

}  // namespace focaldet
