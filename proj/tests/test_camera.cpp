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

#include <algorithm>
#include <cmath>

#include "focaldet/camera.hpp"
#include "support/test_util.hpp"

using namespace focaldet;
using focaldet::testing::random_camera;

namespace {

CameraModel identity_camera(double f = 100.0, double cu = 50.0,
                            double cv = 50.0, int w = 100, int h = 100) {
  return CameraModel(f, f, cu, cv, w, h, Mat3::identity(), Vec3{});
}

}  // namespace

TEST_CASE("pixel_ray: principal point looks along +z") {
  const Ray ray = pixel_ray(identity_camera(), 50.0, 50.0);
  CHECK(ray.direction.x == doctest::Approx(0.0));
  CHECK(ray.direction.y == doctest::Approx(0.0));
  CHECK(ray.direction.z == doctest::Approx(1.0));
  CHECK(ray.origin_m.norm() == 0.0);
}

TEST_CASE("pixel_ray: one focal length right of center tilts to (1,0,1)/√2") {
  const CameraModel cam = identity_camera(40.0, 50.0, 50.0, 100, 100);
  const Ray ray = pixel_ray(cam, 50.0 + 40.0, 50.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(ray.direction.x == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(ray.direction.y == doctest::Approx(0.0));
  CHECK(ray.direction.z == doctest::Approx(inv_sqrt2).epsilon(1e-12));
}

TEST_CASE("pixel_ray: pure translation moves the origin, not the direction") {
  const CameraModel base = identity_camera();
  const CameraModel moved(100.0, 100.0, 50.0, 50.0, 100, 100, Mat3::identity(),
                          Vec3{1.0, -2.0, 3.0});
  const Ray r0 = pixel_ray(base, 20.0, 70.0);
  const Ray r1 = pixel_ray(moved, 20.0, 70.0);
  CHECK(r1.direction.x == r0.direction.x);
  CHECK(r1.direction.y == r0.direction.y);
  CHECK(r1.direction.z == r0.direction.z);
  CHECK(r1.origin_m.x == 1.0);
  CHECK(r1.origin_m.y == -2.0);
  CHECK(r1.origin_m.z == 3.0);
}

TEST_CASE("pixel_ray: out-of-bounds pixel is a contract violation") {
  CHECK_THROWS_AS(pixel_ray(identity_camera(), -1.0, 10.0), ContractViolation);
  CHECK_THROWS_AS(pixel_ray(identity_camera(), 10.0, 101.0),
                  ContractViolation);
}

TEST_CASE("pixel_ray: unit directions; adjacent pixels within the focal "
          "angle bound") {
  Rng rng(321);
  for (int iter = 0; iter < 200; ++iter) {
    const CameraModel cam = random_camera(rng);
    const double u = rng.uniform(0.0, cam.width_px - 2.0);
    const double v = rng.uniform(0.0, cam.height_px - 2.0);
    const Ray ray = pixel_ray(cam, u, v);
    CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-12);
    const double bound =
        std::atan(1.0 / std::min(cam.fx_px, cam.fy_px)) + 1e-9;
    for (const Ray& next :
         {pixel_ray(cam, u + 1.0, v), pixel_ray(cam, u, v + 1.0)}) {
      const double cosine =
          std::clamp(ray.direction.dot(next.direction), -1.0, 1.0);
      CHECK(std::acos(cosine) <= bound);
    }
  }
}

TEST_CASE("lid_depth_bins: closed-form values") {
  SUBCASE("worked example (1, 61, 4)") {
    const std::vector<double> depths = lid_depth_bins(1.0, 61.0, 4);
    const std::vector<double> expected = {1.0, 7.0, 19.0, 37.0, 61.0};
    REQUIRE(depths.size() == expected.size());
    for (size_t i = 0; i < depths.size(); ++i) {
      CHECK(depths[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
  SUBCASE("endpoints anchor at d_min and d_max") {
    const std::vector<double> depths = lid_depth_bins(2.5, 80.0, 7);
    CHECK(depths.front() == 2.5);
    CHECK(depths.back() == 80.0);
  }
  SUBCASE("single bin") {
    CHECK(lid_depth_bins(1.0, 5.0, 1) == std::vector<double>{1.0, 5.0});
  }
  SUBCASE("invalid ranges throw") {
    CHECK_THROWS_AS(lid_depth_bins(0.0, 5.0, 3), ContractViolation);
    CHECK_THROWS_AS(lid_depth_bins(5.0, 5.0, 3), ContractViolation);
    CHECK_THROWS_AS(lid_depth_bins(1.0, 5.0, 0), ContractViolation);
  }
}

TEST_CASE("lid_depth_bins: gap differences are constant") {
  Rng rng(9);
  for (int iter = 0; iter < 50; ++iter) {
    const double d_min = rng.uniform(0.1, 5.0);
    const double d_max = d_min + rng.uniform(1.0, 100.0);
    const int bins = 2 + rng.below(30);
    const std::vector<double> depths = lid_depth_bins(d_min, d_max, bins);
    const double expected_diff =
        2.0 * (d_max - d_min) / (static_cast<double>(bins) * (bins + 1));
    for (size_t i = 1; i + 1 < depths.size(); ++i) {
      CHECK(depths[i] > depths[i - 1]);
      const double diff =
          (depths[i + 1] - depths[i]) - (depths[i] - depths[i - 1]);
      CHECK(std::abs(diff - expected_diff) < 1e-9);
    }
  }
}

TEST_CASE("sample_ray_points: concatenation in depth order") {
  const Ray axis{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
  const auto points = sample_ray_points(axis, {2.0, 5.0});
  REQUIRE(points.size() == 2);
  CHECK(points[0].z == 2.0);
  CHECK(points[1].z == 5.0);

  const auto with_zero = sample_ray_points(axis, {0.0, 3.0});
  CHECK(with_zero[0].norm() == 0.0);  // t = 0 reproduces the origin

  const Ray off{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  const auto sideways = sample_ray_points(off, {3.0});
  CHECK(sideways[0].x == 1.0);
  CHECK(sideways[0].y == 3.0);
  CHECK(sideways[0].z == 0.0);
}

TEST_CASE("normalize_points: corners, center, clamping") {
  const Roi3D roi({-10.0, -10.0, -2.0}, {10.0, 10.0, 2.0});
  const auto at_min = normalize_points({{-10.0, -10.0, -2.0}}, roi);
  CHECK(at_min[0].x == 0.0);
  CHECK(at_min[0].y == 0.0);
  CHECK(at_min[0].z == 0.0);

  const auto at_center = normalize_points({roi.center_m()}, roi);
  CHECK(at_center[0].x == 0.5);
  CHECK(at_center[0].y == 0.5);
  CHECK(at_center[0].z == 0.5);

  const auto clamped = normalize_points({{-50.0, 99.0, 0.0}}, roi);
  CHECK(clamped[0].x == 0.0);
  CHECK(clamped[0].y == 1.0);
}

TEST_CASE("normalize_points: output always lies in the unit cube") {
  Rng rng(17);
  const Roi3D roi({-61.2, -61.2, -10.0}, {61.2, 61.2, 10.0});
  std::vector<Vec3> points;
  for (int i = 0; i < 500; ++i) {
    points.push_back({rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0),
                      rng.uniform(-500.0, 500.0)});
  }
  for (const Vec3& p : normalize_points(points, roi)) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 1.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 1.0);
    CHECK(p.z >= 0.0);
    CHECK(p.z <= 1.0);
  }
}

TEST_CASE("project_point: pinhole arithmetic and the behind flag") {
  const CameraModel cam = identity_camera();
  const auto on_axis = project_point(cam, {0.0, 0.0, 5.0});
  REQUIRE(on_axis.has_value());
  CHECK(on_axis->u_px == doctest::Approx(50.0));
  CHECK(on_axis->v_px == doctest::Approx(50.0));
  CHECK(on_axis->depth_m == doctest::Approx(5.0));

  const auto off_axis = project_point(cam, {1.0, 0.0, 5.0});
  REQUIRE(off_axis.has_value());
  CHECK(off_axis->u_px == doctest::Approx(70.0));
  CHECK(off_axis->v_px == doctest::Approx(50.0));

  CHECK_FALSE(project_point(cam, {0.0, 0.0, -1.0}).has_value());
  CHECK_FALSE(project_point(cam, {0.0, 0.0, 0.0}).has_value());
}

TEST_CASE("round trip: project(ray(u,v) at depth t) recovers the pixel") {
  Rng rng(2024);
  for (int iter = 0; iter < 1000; ++iter) {
    const CameraModel cam = random_camera(rng);
    const double u = rng.uniform(0.0, cam.width_px - 1.0);
    const double v = rng.uniform(0.0, cam.height_px - 1.0);
    const double t = rng.uniform(0.5, 120.0);
    const Ray ray = pixel_ray(cam, u, v);
    const auto proj = project_point(cam, ray.origin_m + ray.direction * t);
    REQUIRE(proj.has_value());
    CHECK(std::abs(proj->u_px - u) < 1e-6);
    CHECK(std::abs(proj->v_px - v) < 1e-6);
  }
}

TEST_CASE("frustum_cone: footprint from stride and focal length") {
  const CameraModel cam = identity_camera();
  const ConeParams cone = frustum_cone(cam, 50.0, 50.0, 16.0);
  CHECK(cone.footprint_u == doctest::Approx(0.16));
  CHECK(cone.footprint_v == doctest::Approx(0.16));

  const ConeParams doubled = frustum_cone(cam, 50.0, 50.0, 32.0);
  CHECK(doubled.footprint_u == doctest::Approx(2.0 * cone.footprint_u));

  const Ray ray = pixel_ray(cam, 31.0, 64.0);
  const ConeParams at_pixel = frustum_cone(cam, 31.0, 64.0, 16.0);
  CHECK(at_pixel.direction.x == ray.direction.x);
  CHECK(at_pixel.direction.y == ray.direction.y);
  CHECK(at_pixel.direction.z == ray.direction.z);
}

TEST_CASE("CameraModel rejects non-orthonormal rotations") {
  Mat3 skew = Mat3::identity();
  skew.at(0, 1) = 0.01;
  CHECK_THROWS_AS(
      CameraModel(100.0, 100.0, 50.0, 50.0, 100, 100, skew, Vec3{}),
      ContractViolation);
}

TEST_CASE("Roi3D rejects inverted bounds") {
  CHECK_THROWS_AS(Roi3D({1.0, 0.0, 0.0}, {0.0, 1.0, 1.0}), ContractViolation);
}
