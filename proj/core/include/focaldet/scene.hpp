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

#ifndef FOCALDET_SCENE_HPP_
#define FOCALDET_SCENE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "focaldet/camera.hpp"
#include "focaldet/encoding.hpp"
#include "focaldet/numeric.hpp"
#include "focaldet/sampling.hpp"

namespace focaldet {

/// Everything a run needs, with desk-scale defaults: six 90-degree cameras in
/// an outward ring, 128x64 images at stride 16 (8x4 token grids, 192 tokens),
/// eight objects.
struct SceneConfig {
  int cameras = 6;
  double camera_radius_m = 1.0;
  double camera_height_m = 1.5;
  int image_width_px = 128;
  int image_height_px = 64;
  int stride_px = 16;
  double focal_px = 64.0;

  int objects = 8;
  double object_distance_min_m = 8.0;
  double object_distance_max_m = 40.0;
  Vec3 object_size_min_m{1.5, 1.5, 1.0};
  Vec3 object_size_max_m{4.0, 4.0, 2.5};
  double object_z_min_m = -1.0;
  double object_z_max_m = 1.0;
  int n_classes = 4;

  Vec3 roi_min_m{-61.2, -61.2, -10.0};
  Vec3 roi_max_m{61.2, 61.2, 10.0};
  double depth_min_m = 1.0;
  double depth_max_m = 61.2;
  int lid_bins = 8;

  int d_model = 32;
  int phi_hidden = 32;  // hidden width for the position and alignment MLPs
  int decoder_layers = 3;
  int ffn_hidden = 64;
  int queries = 64;

  double alpha = 0.5;
  double rho = 0.25;
  double quality_beta = 2.0;
  double centerness_a = 2.0;
  double centerness_b = 4.0;
  double ltrb_normalizer_px = 0.0;  // 0 = image diagonal

  std::string alignment_content = "cone";  // or "ray"
  std::string alignment_init = "seeded";   // or "identity"
  bool per_camera_selection = false;
  bool self_attention = true;
  bool scale_scores = true;

  std::uint64_t seed = 1;

  void validate() const;
  int grid_w() const { return image_width_px / stride_px; }
  int grid_h() const { return image_height_px / stride_px; }
  int tokens_per_camera() const { return grid_w() * grid_h(); }
  int total_tokens() const { return cameras * tokens_per_camera(); }
  Roi3D roi() const { return Roi3D(roi_min_m, roi_max_m); }
  LidConfig lid() const { return {depth_min_m, depth_max_m, lid_bins}; }
  double ltrb_normalizer() const;

  /// Merge fields present in a JSON object onto this config. Unknown keys are
  /// an input error.
  void apply_json_text(const std::string& json_text);
  std::string to_json_text() const;
};

struct Object3D {
  Vec3 center_m;
  Vec3 size_m;
  double yaw_rad = 0.0;
  int class_id = 0;
};

struct SyntheticScene {
  SceneConfig config;
  std::vector<CameraModel> cameras;
  std::vector<Object3D> objects;
};

/// Box corners in the unified frame (yaw about z).
std::array<Vec3, 8> box_corners(const Object3D& obj);

/// Seeded placement of objects in an annulus around an outward-facing camera
/// ring. Every object is resampled until its center is visible in at least
/// one camera; a placement that stays invisible for 100 attempts is a
/// diagnostic error.
SyntheticScene generate_scene(const SceneConfig& cfg);

/// One object as seen by one camera.
struct VisibleInstance {
  int object_index = 0;
  int class_id = 0;
  Box2D box_px;          // corner-projection bounding rectangle, clipped
  double center_u_px = 0.0;  // projected 2.5D center
  double center_v_px = 0.0;
  double center_depth_m = 0.0;
};

struct CameraTruth {
  std::vector<VisibleInstance> instances;
  TokenTargets targets;
};

/// Projects every object into every camera and populates the dense per-token
/// targets (class, ltrb, heatmap, quality, center offsets). Objects fully
/// behind a camera are skipped for that camera.
std::vector<CameraTruth> render_targets(const SyntheticScene& scene);

std::string scene_to_json_text(const SyntheticScene& scene);
SyntheticScene scene_from_json_text(const std::string& json_text);

SyntheticScene load_scene_file(const std::string& path);
void save_scene_file(const SyntheticScene& scene, const std::string& path);

}  // namespace focaldet

#endif  // FOCALDET_SCENE_HPP_
