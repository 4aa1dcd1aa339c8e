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

#include "focaldet/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace focaldet {

namespace {

using nlohmann::json;

constexpr std::uint64_t kObjectSalt = 0x0B7EC7;

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError("expected a 3-element array for a vector field");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json config_to_json(const SceneConfig& c) {
  json j;
  j["cameras"] = c.cameras;
  j["camera_radius_m"] = c.camera_radius_m;
  j["camera_height_m"] = c.camera_height_m;
  j["image_width_px"] = c.image_width_px;
  j["image_height_px"] = c.image_height_px;
  j["stride_px"] = c.stride_px;
  j["focal_px"] = c.focal_px;
  j["objects"] = c.objects;
  j["object_distance_min_m"] = c.object_distance_min_m;
  j["object_distance_max_m"] = c.object_distance_max_m;
  j["object_size_min_m"] = vec3_to_json(c.object_size_min_m);
  j["object_size_max_m"] = vec3_to_json(c.object_size_max_m);
  j["object_z_min_m"] = c.object_z_min_m;
  j["object_z_max_m"] = c.object_z_max_m;
  j["n_classes"] = c.n_classes;
  j["roi_min_m"] = vec3_to_json(c.roi_min_m);
  j["roi_max_m"] = vec3_to_json(c.roi_max_m);
  j["depth_min_m"] = c.depth_min_m;
  j["depth_max_m"] = c.depth_max_m;
  j["lid_bins"] = c.lid_bins;
  j["d_model"] = c.d_model;
  j["phi_hidden"] = c.phi_hidden;
  j["decoder_layers"] = c.decoder_layers;
  j["ffn_hidden"] = c.ffn_hidden;
  j["queries"] = c.queries;
  j["alpha"] = c.alpha;
  j["rho"] = c.rho;
  j["quality_beta"] = c.quality_beta;
  j["centerness_a"] = c.centerness_a;
  j["centerness_b"] = c.centerness_b;
  j["ltrb_normalizer_px"] = c.ltrb_normalizer_px;
  j["alignment_content"] = c.alignment_content;
  j["alignment_init"] = c.alignment_init;
  j["per_camera_selection"] = c.per_camera_selection;
  j["self_attention"] = c.self_attention;
  j["scale_scores"] = c.scale_scores;
  j["seed"] = c.seed;
  return j;
}

void config_apply_json(SceneConfig& c, const json& j) {
  if (!j.is_object()) throw InputError("config JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "cameras") c.cameras = value.get<int>();
    else if (key == "camera_radius_m") c.camera_radius_m = value.get<double>();
    else if (key == "camera_height_m") c.camera_height_m = value.get<double>();
    else if (key == "image_width_px") c.image_width_px = value.get<int>();
    else if (key == "image_height_px") c.image_height_px = value.get<int>();
    else if (key == "stride_px") c.stride_px = value.get<int>();
    else if (key == "focal_px") c.focal_px = value.get<double>();
    else if (key == "objects") c.objects = value.get<int>();
    else if (key == "object_distance_min_m")
      c.object_distance_min_m = value.get<double>();
    else if (key == "object_distance_max_m")
      c.object_distance_max_m = value.get<double>();
    else if (key == "object_size_min_m")
      c.object_size_min_m = vec3_from_json(value);
    else if (key == "object_size_max_m")
      c.object_size_max_m = vec3_from_json(value);
    else if (key == "object_z_min_m") c.object_z_min_m = value.get<double>();
    else if (key == "object_z_max_m") c.object_z_max_m = value.get<double>();
    else if (key == "n_classes") c.n_classes = value.get<int>();
    else if (key == "roi_min_m") c.roi_min_m = vec3_from_json(value);
    else if (key == "roi_max_m") c.roi_max_m = vec3_from_json(value);
    else if (key == "depth_min_m") c.depth_min_m = value.get<double>();
    else if (key == "depth_max_m") c.depth_max_m = value.get<double>();
    else if (key == "lid_bins") c.lid_bins = value.get<int>();
    else if (key == "d_model") c.d_model = value.get<int>();
    else if (key == "phi_hidden") c.phi_hidden = value.get<int>();
    else if (key == "decoder_layers") c.decoder_layers = value.get<int>();
    else if (key == "ffn_hidden") c.ffn_hidden = value.get<int>();
    else if (key == "queries") c.queries = value.get<int>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "rho") c.rho = value.get<double>();
    else if (key == "quality_beta") c.quality_beta = value.get<double>();
    else if (key == "centerness_a") c.centerness_a = value.get<double>();
    else if (key == "centerness_b") c.centerness_b = value.get<double>();
    else if (key == "ltrb_normalizer_px")
      c.ltrb_normalizer_px = value.get<double>();
    else if (key == "alignment_content")
      c.alignment_content = value.get<std::string>();
    else if (key == "alignment_init")
      c.alignment_init = value.get<std::string>();
    else if (key == "per_camera_selection")
      c.per_camera_selection = value.get<bool>();
    else if (key == "self_attention") c.self_attention = value.get<bool>();
    else if (key == "scale_scores") c.scale_scores = value.get<bool>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else throw InputError("unknown config key '" + key + "'");
  }
}

}  // namespace

void SceneConfig::validate() const {
  require(cameras >= 1, "SceneConfig: need at least one camera");
  require(image_width_px > 0 && image_height_px > 0 && stride_px >= 1,
          "SceneConfig: bad image geometry");
  require(image_width_px % stride_px == 0 && image_height_px % stride_px == 0,
          "SceneConfig: image dims must be multiples of the stride");
  require(focal_px > 0.0, "SceneConfig: focal length must be positive");
  require(objects >= 1, "SceneConfig: need at least one object");
  require(object_distance_min_m > 0.0 &&
              object_distance_min_m < object_distance_max_m,
          "SceneConfig: bad object distance range");
  require(n_classes >= 1, "SceneConfig: need at least one class");
  require(depth_min_m > 0.0 && depth_min_m < depth_max_m,
          "SceneConfig: bad depth range");
  require(lid_bins >= 1, "SceneConfig: need at least one depth bin");
  require(d_model >= 1 && phi_hidden >= 1 && decoder_layers >= 1 &&
              ffn_hidden >= 1 && queries >= 1,
          "SceneConfig: model dims must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "SceneConfig: alpha outside [0,1]");
  require(rho > 0.0 && rho <= 1.0, "SceneConfig: rho outside (0,1]");
  Roi3D check_roi = roi();
  (void)check_roi;
  if (alignment_init != "seeded" && alignment_init != "identity") {
    throw InputError("SceneConfig: alignment_init must be 'seeded' or "
                     "'identity'");
  }
  (void)parse_alignment_content(alignment_content);
}

double SceneConfig::ltrb_normalizer() const {
  if (ltrb_normalizer_px > 0.0) return ltrb_normalizer_px;
  return std::hypot(static_cast<double>(image_width_px),
                    static_cast<double>(image_height_px));
}

void SceneConfig::apply_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config JSON parse error: ") + e.what());
  }
  config_apply_json(*this, j);
}

std::string SceneConfig::to_json_text() const {
  return config_to_json(*this).dump(2) + "\n";
}

std::array<Vec3, 8> box_corners(const Object3D& obj) {
  const Mat3 rot = Mat3::rotation_z(obj.yaw_rad);
  const double hx = 0.5 * obj.size_m.x;
  const double hy = 0.5 * obj.size_m.y;
  const double hz = 0.5 * obj.size_m.z;
  std::array<Vec3, 8> corners;
  int i = 0;
  for (double sx : {-hx, hx})
    for (double sy : {-hy, hy})
      for (double sz : {-hz, hz})
        corners[static_cast<size_t>(i++)] =
            obj.center_m + rot * Vec3{sx, sy, sz};
  return corners;
}

namespace {

std::vector<CameraModel> build_ring(const SceneConfig& cfg) {
  std::vector<CameraModel> cams;
  cams.reserve(static_cast<size_t>(cfg.cameras));
  for (int i = 0; i < cfg.cameras; ++i) {
    const double yaw =
        2.0 * std::numbers::pi * static_cast<double>(i) / cfg.cameras;
    const double c = std::cos(yaw), s = std::sin(yaw);
    // Columns are the camera axes in the unified frame: optical axis points
    // outward, image v axis points down.
    Mat3 rot;
    rot.m = {s, 0.0, c,
             -c, 0.0, s,
             0.0, -1.0, 0.0};
    const Vec3 t{cfg.camera_radius_m * c, cfg.camera_radius_m * s,
                 cfg.camera_height_m};
    cams.emplace_back(cfg.focal_px, cfg.focal_px, cfg.image_width_px / 2.0,
                      cfg.image_height_px / 2.0, cfg.image_width_px,
                      cfg.image_height_px, rot, t);
  }
  return cams;
}

bool center_visible(const std::vector<CameraModel>& cams, const Vec3& p) {
  for (const CameraModel& cam : cams) {
    const auto proj = project_point(cam, p);
    if (proj && cam.pixel_in_bounds(proj->u_px, proj->v_px)) return true;
  }
  return false;
}

}  // namespace

SyntheticScene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  SyntheticScene scene;
  scene.config = cfg;
  scene.cameras = build_ring(cfg);

  Rng rng = Rng(cfg.seed).fork(kObjectSalt);
  scene.objects.reserve(static_cast<size_t>(cfg.objects));
  for (int i = 0; i < cfg.objects; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      Object3D obj;
      const double radius =
          rng.uniform(cfg.object_distance_min_m, cfg.object_distance_max_m);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      obj.center_m = {radius * std::cos(angle), radius * std::sin(angle),
                      rng.uniform(cfg.object_z_min_m, cfg.object_z_max_m)};
      obj.size_m = {
          rng.uniform(cfg.object_size_min_m.x, cfg.object_size_max_m.x),
          rng.uniform(cfg.object_size_min_m.y, cfg.object_size_max_m.y),
          rng.uniform(cfg.object_size_min_m.z, cfg.object_size_max_m.z)};
      obj.yaw_rad = rng.uniform(-std::numbers::pi, std::numbers::pi);
      obj.class_id = rng.below(cfg.n_classes);
      if (center_visible(scene.cameras, obj.center_m)) {
        scene.objects.push_back(obj);
        placed = true;
      }
    }
    if (!placed) {
      throw InputError(
          "generate_scene: no visible placement found for object " +
          std::to_string(i) + " after 100 attempts; widen the camera or "
          "distance configuration");
    }
  }
  return scene;
}

namespace {

std::optional<Box2D> projected_box(const CameraModel& cam,
                                   const Object3D& obj) {
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  double max_u = -std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  int in_front = 0;
  for (const Vec3& corner : box_corners(obj)) {
    const auto proj = project_point(cam, corner);
    if (!proj) continue;
    ++in_front;
    min_u = std::min(min_u, proj->u_px);
    min_v = std::min(min_v, proj->v_px);
    max_u = std::max(max_u, proj->u_px);
    max_v = std::max(max_v, proj->v_px);
  }
  if (in_front == 0) return std::nullopt;
  min_u = std::max(min_u, 0.0);
  min_v = std::max(min_v, 0.0);
  max_u = std::min(max_u, static_cast<double>(cam.width_px));
  max_v = std::min(max_v, static_cast<double>(cam.height_px));
  if (max_u - min_u < 1e-9 || max_v - min_v < 1e-9) return std::nullopt;
  return Box2D(min_u, min_v, max_u, max_v);
}

TokenTargets build_token_targets(const SceneConfig& cfg,
                                 const std::vector<VisibleInstance>& inst) {
  TokenTargets targets;
  targets.grid_w = cfg.grid_w();
  targets.grid_h = cfg.grid_h();
  const size_t count = static_cast<size_t>(cfg.tokens_per_camera());
  targets.class_id.assign(count, -1);
  targets.ltrb.assign(count, LtrbTarget{});
  targets.quality_y.assign(count, 0.0);

  const double normalizer = cfg.ltrb_normalizer();
  std::vector<double> owner_area(count,
                                 std::numeric_limits<double>::infinity());
  auto claim = [&](const VisibleInstance& vi, int row, int col) {
    const double u = (col + 0.5) * cfg.stride_px;
    const double v = (row + 0.5) * cfg.stride_px;
    const size_t token = static_cast<size_t>(row) * targets.grid_w + col;
    // Ambiguous tokens go to the smallest box, the usual dense-target
    // convention.
    if (vi.box_px.area() >= owner_area[token]) return;
    owner_area[token] = vi.box_px.area();
    targets.class_id[token] = vi.class_id;
    // The token that holds the 2.5D center is always foreground for its
    // instance, even when a sub-cell box misses the cell's pixel center;
    // its distances clamp at the box edge.
    LtrbTarget ltrb = ltrb_targets(vi.box_px, u, v, normalizer);
    ltrb.l = std::max(ltrb.l, 0.0);
    ltrb.t = std::max(ltrb.t, 0.0);
    ltrb.r = std::max(ltrb.r, 0.0);
    ltrb.b = std::max(ltrb.b, 0.0);
    targets.ltrb[token] = ltrb;
    // Quality target: overlap between the box implied by the token's ltrb
    // distances and the assigned box. Exact synthetic targets make this 1;
    // background stays 0.
    targets.quality_y[token] = 1.0;
  };
  for (const VisibleInstance& vi : inst) {
    for (int row = 0; row < targets.grid_h; ++row) {
      for (int col = 0; col < targets.grid_w; ++col) {
        const double u = (col + 0.5) * cfg.stride_px;
        const double v = (row + 0.5) * cfg.stride_px;
        if (!vi.box_px.contains(u, v)) continue;
        claim(vi, row, col);
      }
    }
    const CenterOffset center =
        center_offset_targets(vi.center_u_px, vi.center_v_px, cfg.stride_px);
    claim(vi, center.row, center.col);
  }

  std::vector<HeatmapObject> heat_objects;
  heat_objects.reserve(inst.size());
  for (const VisibleInstance& vi : inst) {
    const double min_side =
        std::min(vi.box_px.width(), vi.box_px.height()) / cfg.stride_px;
    heat_objects.push_back({vi.center_u_px / cfg.stride_px,
                            vi.center_v_px / cfg.stride_px,
                            heatmap_delta(min_side)});
  }
  HeatmapResult heat =
      gaussian_heatmap(heat_objects, targets.grid_w, targets.grid_h);
  targets.heatmap = std::move(heat.values);
  targets.skipped_centers = heat.skipped_centers;

  for (const VisibleInstance& vi : inst) {
    const CenterOffset offset = center_offset_targets(
        vi.center_u_px, vi.center_v_px, cfg.stride_px);
    targets.center_offsets.push_back(offset);
    targets.center_tokens.push_back(
        static_cast<size_t>(offset.row) * targets.grid_w +
        static_cast<size_t>(offset.col));
  }
  return targets;
}

}  // namespace

std::vector<CameraTruth> render_targets(const SyntheticScene& scene) {
  const SceneConfig& cfg = scene.config;
  std::vector<CameraTruth> truths;
  truths.reserve(scene.cameras.size());
  for (const CameraModel& cam : scene.cameras) {
    CameraTruth truth;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
      const Object3D& obj = scene.objects[i];
      const auto center = project_point(cam, obj.center_m);
      if (!center || !cam.pixel_in_bounds(center->u_px, center->v_px)) {
        continue;
      }
      const auto box = projected_box(cam, obj);
      if (!box) continue;
      truth.instances.push_back({static_cast<int>(i), obj.class_id, *box,
                                 center->u_px, center->v_px,
                                 center->depth_m});
    }
    truth.targets = build_token_targets(cfg, truth.instances);
    truths.push_back(std::move(truth));
  }
  return truths;
}

std::string scene_to_json_text(const SyntheticScene& scene) {
  json j;
  j["format"] = "focaldet-scene-v1";
  j["config"] = config_to_json(scene.config);
  json cams = json::array();
  for (const CameraModel& cam : scene.cameras) {
    json jc;
    jc["fx_px"] = cam.fx_px;
    jc["fy_px"] = cam.fy_px;
    jc["cu_px"] = cam.cu_px;
    jc["cv_px"] = cam.cv_px;
    jc["width_px"] = cam.width_px;
    jc["height_px"] = cam.height_px;
    jc["rotation_unified_from_camera_row_major"] = cam.rotation.m;
    jc["translation_unified_m"] = vec3_to_json(cam.translation_m);
    cams.push_back(jc);
  }
  j["cameras"] = cams;
  json objs = json::array();
  for (const Object3D& obj : scene.objects) {
    json jo;
    jo["center_unified_m"] = vec3_to_json(obj.center_m);
    jo["size_m"] = vec3_to_json(obj.size_m);
    jo["yaw_rad"] = obj.yaw_rad;
    jo["class_id"] = obj.class_id;
    objs.push_back(jo);
  }
  j["objects"] = objs;
  return j.dump(2) + "\n";
}

SyntheticScene scene_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scene JSON parse error: ") + e.what());
  }
  try {
    if (j.value("format", "") != "focaldet-scene-v1") {
      throw InputError("scene file format marker missing or unsupported");
    }
    SyntheticScene scene;
    config_apply_json(scene.config, j.at("config"));
    scene.config.validate();
    for (const json& jc : j.at("cameras")) {
      Mat3 rot;
      const auto& rm = jc.at("rotation_unified_from_camera_row_major");
      if (!rm.is_array() || rm.size() != 9) {
        throw InputError("camera rotation must be a 9-element array");
      }
      for (size_t k = 0; k < 9; ++k) rot.m[k] = rm[k].get<double>();
      scene.cameras.emplace_back(
          jc.at("fx_px").get<double>(), jc.at("fy_px").get<double>(),
          jc.at("cu_px").get<double>(), jc.at("cv_px").get<double>(),
          jc.at("width_px").get<int>(), jc.at("height_px").get<int>(), rot,
          vec3_from_json(jc.at("translation_unified_m")));
    }
    for (const json& jo : j.at("objects")) {
      scene.objects.push_back({vec3_from_json(jo.at("center_unified_m")),
                               vec3_from_json(jo.at("size_m")),
                               jo.at("yaw_rad").get<double>(),
                               jo.at("class_id").get<int>()});
    }
    return scene;
  } catch (const json::exception& e) {
    throw InputError(std::string("scene JSON field error: ") + e.what());
  }
}

SyntheticScene load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open scene file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scene_from_json_text(buffer.str());
}

void save_scene_file(const SyntheticScene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write scene file '" + path + "'");
  out << scene_to_json_text(scene);
}

}  // namespace focaldet
