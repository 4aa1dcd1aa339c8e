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

#include "focaldet/camera.hpp"

#include <string>

namespace focaldet {

Roi3D::Roi3D(const Vec3& min, const Vec3& max) : min_m(min), max_m(max) {
  require(min.x < max.x && min.y < max.y && min.z < max.z,
          "Roi3D: min must be strictly below max on every axis");
}

Roi3D Roi3D::default_roi() {
  return Roi3D({-61.2, -61.2, -10.0}, {61.2, 61.2, 10.0});
}

CameraModel::CameraModel(double fx, double fy, double cu, double cv, int width,
                         int height, const Mat3& rot, const Vec3& trans)
    : fx_px(fx), fy_px(fy), cu_px(cu), cv_px(cv), width_px(width),
      height_px(height), rotation(rot), translation_m(trans) {
  require(fx > 0.0 && fy > 0.0, "CameraModel: focal lengths must be positive");
  require(width > 0 && height > 0, "CameraModel: image dims must be positive");
  require(rot.orthonormality_error() <= 1e-9,
          "CameraModel: rotation is not orthonormal within 1e-9");
}

Ray pixel_ray(const CameraModel& cam, double u, double v) {
  require(cam.pixel_in_bounds(u, v),
          "pixel_ray: pixel (" + std::to_string(u) + ", " + std::to_string(v) +
              ") outside image bounds");
  const Vec3 dir_cam{(u - cam.cu_px) / cam.fx_px, (v - cam.cv_px) / cam.fy_px,
                     1.0};
  return {cam.optical_center_m(), (cam.rotation * dir_cam).normalized()};
}

std::vector<double> lid_depth_bins(double d_min, double d_max, int bins) {
  require(d_min > 0.0 && d_min < d_max,
          "lid_depth_bins: need 0 < d_min < d_max");
  require(bins >= 1, "lid_depth_bins: need at least one bin");
  const double span = d_max - d_min;
  const double denom = static_cast<double>(bins) * (bins + 1);
  std::vector<double> depths(static_cast<size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) {
    depths[static_cast<size_t>(i)] =
        d_min + span * (static_cast<double>(i) * (i + 1)) / denom;
  }
  return depths;
}

std::vector<Vec3> sample_ray_points(const Ray& ray,
                                    const std::vector<double>& depths) {
  std::vector<Vec3> points;
  points.reserve(depths.size());
  for (double t : depths) points.push_back(ray.origin_m + ray.direction * t);
  return points;
}

std::vector<Vec3> normalize_points(const std::vector<Vec3>& points,
                                   const Roi3D& roi) {
  const Vec3 ext = roi.extent_m();
  std::vector<Vec3> out;
  out.reserve(points.size());
  auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  for (const Vec3& p : points) {
    out.push_back({clamp01((p.x - roi.min_m.x) / ext.x),
                   clamp01((p.y - roi.min_m.y) / ext.y),
                   clamp01((p.z - roi.min_m.z) / ext.z)});
  }
  return out;
}

Vector flatten_points(const std::vector<Vec3>& points) {
  Vector flat;
  flat.reserve(points.size() * 3);
  for (const Vec3& p : points) {
    flat.push_back(p.x);
    flat.push_back(p.y);
    flat.push_back(p.z);
  }
  return flat;
}

std::optional<Projection> project_point(const CameraModel& cam,
                                        const Vec3& p_unified) {
  const Vec3 p = cam.camera_from_unified(p_unified);
  if (p.z <= kBehindCameraEpsilon) return std::nullopt;
  return Projection{cam.cu_px + cam.fx_px * p.x / p.z,
                    cam.cv_px + cam.fy_px * p.y / p.z, p.z};
}

ConeParams frustum_cone(const CameraModel& cam, double u, double v,
                        double stride) {
  require(stride >= 1.0, "frustum_cone: stride must be >= 1");
  const Ray ray = pixel_ray(cam, u, v);
  return {ray.direction,       ray.origin_m,         cam.fx_px, cam.fy_px,
          stride / cam.fx_px,  stride / cam.fy_px};
}

}  // namespace focaldet
