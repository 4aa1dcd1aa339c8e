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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <string>

#include "focaldet/io.hpp"
#include "focaldet/pipeline.hpp"
#include "focaldet/scene.hpp"

using namespace focaldet;

TEST_CASE("generate_scene: deterministic per seed") {
  SceneConfig cfg;
  cfg.seed = 7;
  const std::string a = scene_to_json_text(generate_scene(cfg));
  const std::string b = scene_to_json_text(generate_scene(cfg));
  CHECK(a == b);

  cfg.seed = 8;
  CHECK(scene_to_json_text(generate_scene(cfg)) != a);
}

TEST_CASE("generate_scene: ring coverage sees mid-annulus objects") {
  SceneConfig cfg;
  const SyntheticScene scene = generate_scene(cfg);
  const double mid =
      0.5 * (cfg.object_distance_min_m + cfg.object_distance_max_m);
  for (int step = 0; step < 24; ++step) {
    const double angle = 2.0 * std::numbers::pi * step / 24.0;
    const Vec3 p{mid * std::cos(angle), mid * std::sin(angle), 0.0};
    bool visible = false;
    for (const CameraModel& cam : scene.cameras) {
      const auto proj = project_point(cam, p);
      visible |= proj && cam.pixel_in_bounds(proj->u_px, proj->v_px);
    }
    CHECK(visible);
  }
}

TEST_CASE("generate_scene: object centers stay within the ROI") {
  SceneConfig cfg;
  cfg.seed = 3;
  const SyntheticScene scene = generate_scene(cfg);
  REQUIRE(scene.objects.size() == static_cast<size_t>(cfg.objects));
  for (const Object3D& obj : scene.objects) {
    CHECK(obj.center_m.x >= cfg.roi_min_m.x);
    CHECK(obj.center_m.x <= cfg.roi_max_m.x);
    CHECK(obj.center_m.y >= cfg.roi_min_m.y);
    CHECK(obj.center_m.y <= cfg.roi_max_m.y);
    CHECK(obj.center_m.z >= cfg.roi_min_m.z);
    CHECK(obj.center_m.z <= cfg.roi_max_m.z);
  }
}

TEST_CASE("generate_scene: impossible config raises a diagnostic") {
  SceneConfig cfg;
  // Cameras hoisted a kilometer up: every projected center lands far below
  // the image, so no placement can ever be visible.
  cfg.camera_height_m = 1000.0;
  CHECK_THROWS_AS(generate_scene(cfg), InputError);
}

TEST_CASE("render_targets: on-axis object lands on the principal point") {
  SceneConfig cfg;
  cfg.objects = 1;
  SyntheticScene scene = generate_scene(cfg);
  // Place the object on camera 0's optical axis by hand.
  const CameraModel& cam = scene.cameras[0];
  scene.objects[0].center_m =
      cam.unified_from_camera(Vec3{0.0, 0.0, 20.0});
  scene.objects[0].yaw_rad = 0.0;
  const std::vector<CameraTruth> truths = render_targets(scene);
  bool found = false;
  for (const VisibleInstance& vi : truths[0].instances) {
    if (vi.object_index == 0) {
      found = true;
      CHECK(vi.center_u_px == doctest::Approx(cam.cu_px).epsilon(1e-9));
      CHECK(vi.center_v_px == doctest::Approx(cam.cv_px).epsilon(1e-9));
      CHECK(vi.center_depth_m == doctest::Approx(20.0));
    }
  }
  CHECK(found);
}

TEST_CASE("render_targets: heatmap peaks at 1 whenever something is "
          "visible") {
  SceneConfig cfg;
  cfg.seed = 11;
  const std::vector<CameraTruth> truths =
      render_targets(generate_scene(cfg));
  for (const CameraTruth& truth : truths) {
    if (truth.instances.empty()) continue;
    double peak = 0.0;
    for (double h : truth.targets.heatmap) peak = std::max(peak, h);
    CHECK(peak == 1.0);
  }
}

TEST_CASE("render_targets: hand-placed cube matches manual corner "
          "projection") {
  SceneConfig cfg;
  cfg.objects = 1;
  SyntheticScene scene = generate_scene(cfg);
  const CameraModel& cam = scene.cameras[0];
  Object3D& obj = scene.objects[0];
  obj.center_m = cam.unified_from_camera(Vec3{1.0, 0.5, 25.0});
  obj.size_m = {2.0, 2.0, 2.0};
  obj.yaw_rad = 0.0;

  const std::vector<CameraTruth> truths = render_targets(scene);
  REQUIRE_FALSE(truths[0].instances.empty());
  const Box2D& box = truths[0].instances[0].box_px;

  double min_u = 1e300, min_v = 1e300, max_u = -1e300, max_v = -1e300;
  for (const Vec3& corner : box_corners(obj)) {
    const auto proj = project_point(cam, corner);
    REQUIRE(proj.has_value());
    min_u = std::min(min_u, proj->u_px);
    min_v = std::min(min_v, proj->v_px);
    max_u = std::max(max_u, proj->u_px);
    max_v = std::max(max_v, proj->v_px);
  }
  CHECK(box.x_min_px == doctest::Approx(std::max(min_u, 0.0)));
  CHECK(box.y_min_px == doctest::Approx(std::max(min_v, 0.0)));
  CHECK(box.x_max_px ==
        doctest::Approx(std::min(max_u, static_cast<double>(cam.width_px))));
  CHECK(box.y_max_px ==
        doctest::Approx(std::min(max_v, static_cast<double>(cam.height_px))));
}

TEST_CASE("render_targets: foreground tokens intersect their owning box") {
  SceneConfig cfg;
  for (std::uint64_t seed : {1ull, 5ull, 23ull}) {
    cfg.seed = seed;
    const SyntheticScene scene = generate_scene(cfg);
    const std::vector<CameraTruth> truths = render_targets(scene);
    for (const CameraTruth& truth : truths) {
      const TokenTargets& t = truth.targets;
      for (int row = 0; row < t.grid_h; ++row) {
        for (int col = 0; col < t.grid_w; ++col) {
          const size_t token = static_cast<size_t>(row) * t.grid_w + col;
          if (t.class_id[token] < 0) continue;
          // The token's cell must overlap at least one instance box of the
          // assigned class (its owner).
          const double u0 = col * static_cast<double>(cfg.stride_px);
          const double v0 = row * static_cast<double>(cfg.stride_px);
          bool overlaps = false;
          for (const VisibleInstance& vi : truth.instances) {
            if (vi.class_id != t.class_id[token]) continue;
            overlaps |= vi.box_px.x_min_px < u0 + cfg.stride_px &&
                        vi.box_px.x_max_px > u0 &&
                        vi.box_px.y_min_px < v0 + cfg.stride_px &&
                        vi.box_px.y_max_px > v0;
          }
          CHECK(overlaps);
          CHECK(t.quality_y[token] == 1.0);
          CHECK(t.ltrb[token].l >= 0.0);
          CHECK(t.ltrb[token].t >= 0.0);
          CHECK(t.ltrb[token].r >= 0.0);
          CHECK(t.ltrb[token].b >= 0.0);
        }
      }
      // Every center token is foreground.
      for (size_t center : t.center_tokens) {
        CHECK(t.class_id[center] >= 0);
        CHECK(t.heatmap[center] == 1.0);
      }
    }
  }
}

TEST_CASE("generate_scene: seed 7 matches the golden fixture") {
  SceneConfig cfg;
  cfg.seed = 7;
  CHECK(scene_to_json_text(generate_scene(cfg)) ==
        read_text_file(std::string(FOCALDET_GOLDEN_DIR) +
                       "/scene_seed7.json"));
}

TEST_CASE("scene files round-trip exactly") {
  SceneConfig cfg;
  cfg.seed = 99;
  const SyntheticScene scene = generate_scene(cfg);
  const std::string text = scene_to_json_text(scene);
  const SyntheticScene reloaded = scene_from_json_text(text);
  CHECK(scene_to_json_text(reloaded) == text);
}

TEST_CASE("scene parsing rejects malformed input") {
  CHECK_THROWS_AS(scene_from_json_text("not json"), InputError);
  CHECK_THROWS_AS(scene_from_json_text("{\"format\": \"other\"}"),
                  InputError);
  SceneConfig cfg;
  CHECK_THROWS_AS(cfg.apply_json_text("{\"unknown_field\": 1}"), InputError);
}

TEST_CASE("run_pipeline: petr at rho 1 equals the raw composition") {
  SceneConfig cfg;
  cfg.rho = 1.0;
  cfg.seed = 5;
  const SyntheticScene scene = generate_scene(cfg);
  RunOptions options;
  options.mode = ComposeMode::kPetr;
  const PipelineResult result = run_pipeline(scene, options);

  REQUIRE(result.sampled.size() == static_cast<size_t>(cfg.total_tokens()));
  const std::vector<TokenGrid> grids = make_token_grids(cfg);
  const Mlp2 phi = pipeline_phi(cfg);
  for (int cam = 0; cam < cfg.cameras; ++cam) {
    const PosEmbedGrid embed =
        position_embedding(grids[static_cast<size_t>(cam)],
                           scene.cameras[static_cast<size_t>(cam)], phi,
                           cfg.lid(), cfg.roi());
    const KeyValue kv = compose_key_value(grids[static_cast<size_t>(cam)],
                                          embed, ComposeMode::kPetr);
    for (int t = 0; t < cfg.tokens_per_camera(); ++t) {
      const int global = cam * cfg.tokens_per_camera() + t;
      for (int k = 0; k < cfg.d_model; ++k) {
        CHECK(result.kv.keys.at(global, k) == kv.keys.at(t, k));
        CHECK(result.kv.values.at(global, k) == kv.values.at(t, k));
      }
    }
  }
}

TEST_CASE("run_pipeline: focal with identity alignment matches petr "
          "bit for bit") {
  SceneConfig cfg;
  cfg.rho = 1.0;
  cfg.alignment_init = "identity";
  cfg.seed = 17;
  const SyntheticScene scene = generate_scene(cfg);

  RunOptions petr;
  petr.mode = ComposeMode::kPetr;
  RunOptions focal;
  focal.mode = ComposeMode::kFocal;
  const PipelineResult a = run_pipeline(scene, petr);
  const PipelineResult b = run_pipeline(scene, focal);
  CHECK(a.kv.keys.data() == b.kv.keys.data());
  CHECK(a.kv.values.data() == b.kv.values.data());
}

TEST_CASE("run_pipeline: oracle recall is 1 and attention has the sampled "
          "column count") {
  SceneConfig cfg;
  cfg.seed = 23;
  const PipelineResult result = run_pipeline(generate_scene(cfg), {});
  CHECK(result.foreground_recall == 1.0);
  const int expected_cols = static_cast<int>(
      std::ceil(cfg.rho * static_cast<double>(cfg.total_tokens())));
  REQUIRE(static_cast<int>(result.trace.layers.size()) ==
          cfg.decoder_layers);
  for (const LayerTrace& layer : result.trace.layers) {
    CHECK(layer.attention.cols() == expected_cols);
  }
}

TEST_CASE("run_pipeline: oracle-perfect predictions zero the auxiliary "
          "loss") {
  SceneConfig cfg;
  cfg.seed = 31;
  const PipelineResult result = run_pipeline(generate_scene(cfg), {});
  CHECK(result.n_pos > 0);
  CHECK(result.oracle_components.center_offset == 0.0);
  CHECK(result.oracle_components.ltrb == 0.0);
  CHECK(std::abs(result.oracle_components.giou) < 1e-12);
  CHECK(std::abs(result.oracle_components.quality) < 1e-9);
  CHECK(std::abs(result.oracle_components.centerness) < 1e-9);
  CHECK(std::abs(result.oracle_total) < 1e-9);
}

TEST_CASE("run_pipeline: per-camera selection keeps the per-camera quota") {
  SceneConfig cfg;
  cfg.per_camera_selection = true;
  cfg.rho = 0.25;
  const PipelineResult result = run_pipeline(generate_scene(cfg), {});
  std::vector<int> counts(static_cast<size_t>(cfg.cameras), 0);
  for (size_t idx : result.sampled) {
    counts[idx / static_cast<size_t>(cfg.tokens_per_camera())] += 1;
  }
  const int quota = static_cast<int>(
      std::ceil(cfg.rho * cfg.tokens_per_camera()));
  for (int count : counts) CHECK(count == quota);
}

TEST_CASE("run_pipeline: byte-identical reports for equal configs") {
  SceneConfig cfg;
  cfg.seed = 77;
  RunOptions options;
  options.score_source = ScoreSource::kRandom;
  const std::string a = run_pipeline(cfg, options).to_report_json();
  const std::string b = run_pipeline(cfg, options).to_report_json();
  CHECK(a == b);
}

TEST_CASE("run_pipeline: score files drive selection; bad files are input "
          "errors") {
  SceneConfig cfg;
  cfg.seed = 41;
  const SyntheticScene scene = generate_scene(cfg);
  const PipelineResult oracle = run_pipeline(scene, {});
  const std::string csv =
      token_table_csv(cfg, oracle.truths, oracle.maps);
  const std::string path = "pipeline_scores_test.csv";
  write_text_file(path, csv);

  RunOptions from_file;
  from_file.score_source = ScoreSource::kFile;
  from_file.score_file = path;
  const PipelineResult reloaded = run_pipeline(scene, from_file);
  CHECK(reloaded.sampled == oracle.sampled);

  RunOptions missing;
  missing.score_source = ScoreSource::kFile;
  missing.score_file = "does_not_exist.csv";
  CHECK_THROWS_AS(run_pipeline(scene, missing), InputError);

  write_text_file(path, "camera,row,col\n0,0,0\n");
  CHECK_THROWS_AS(run_pipeline(scene, from_file), InputError);
}

TEST_CASE("run_pipeline: scene/config disagreement is a contract violation") {
  SceneConfig cfg;
  SyntheticScene scene = generate_scene(cfg);
  scene.config.cameras = 5;  // no longer matches the stored rig
  CHECK_THROWS_AS(run_pipeline(scene, {}), ContractViolation);
}

TEST_CASE("parse_score_source handles the file spec") {
  std::string path;
  CHECK(parse_score_source("oracle", &path) == ScoreSource::kOracle);
  CHECK(parse_score_source("random", &path) == ScoreSource::kRandom);
  CHECK(parse_score_source("file:scores.csv", &path) == ScoreSource::kFile);
  CHECK(path == "scores.csv");
  CHECK_THROWS_AS(parse_score_source("guess", &path), InputError);
}
