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

#ifndef FOCALDET_CAMERA_HPP_
#define FOCALDET_CAMERA_HPP_

#include <optional>
#include <vector>

#include "focaldet/numeric.hpp"

namespace focaldet {

/// Points with camera-frame depth below this are treated as behind the
/// camera; avoids division blow-up for points near the image plane.
inline constexpr double kBehindCameraEpsilon = 1e-6;

/// Axis-aligned 3D region used to normalize sampled ray points into [0,1]^3.
struct Roi3D {
  Vec3 min_m;
  Vec3 max_m;

  Roi3D(const Vec3& min_m, const Vec3& max_m);

  Vec3 extent_m() const { return max_m - min_m; }
  Vec3 center_m() const { return (min_m + max_m) * 0.5; }

  /// Convention, not a calibrated value: +/-61.2 m planar, [-10, 10] m
  /// vertical.
  static Roi3D default_roi();
};

/// Pinhole camera with an extrinsic pose mapping camera frame -> unified
/// (ego) frame. The camera looks along its +z axis.
struct CameraModel {
  double fx_px;
  double fy_px;
  double cu_px;
  double cv_px;
  int width_px;
  int height_px;
  Mat3 rotation;     // camera -> unified, orthonormal within 1e-9
  Vec3 translation_m;

  CameraModel(double fx_px, double fy_px, double cu_px, double cv_px,
              int width_px, int height_px, const Mat3& rotation,
              const Vec3& translation_m);

  Vec3 optical_center_m() const { return translation_m; }
  Vec3 unified_from_camera(const Vec3& p_cam) const {
    return rotation * p_cam + translation_m;
  }
  Vec3 camera_from_unified(const Vec3& p_unified) const {
    return rotation.transposed() * (p_unified - translation_m);
  }
  bool pixel_in_bounds(double u_px, double v_px) const {
    return u_px >= 0.0 && u_px < width_px && v_px >= 0.0 && v_px < height_px;
  }
};

/// Ray in the unified frame; direction is unit length.
struct Ray {
  Vec3 origin_m;
  Vec3 direction;
};

/// Parametric frustum cone viewed by one token: its ray, the camera optical
/// center, the focal lengths, and the angular footprint of one token.
struct ConeParams {
  Vec3 direction;        // unit ray direction
  Vec3 origin_m;         // camera optical center
  double fx_px;
  double fy_px;
  double footprint_u;    // stride / fx
  double footprint_v;    // stride / fy
};

/// Ray through the center of pixel (u, v), in the unified frame.
Ray pixel_ray(const CameraModel& cam, double u_px, double v_px);

/// Linear-increasing discretization of [d_min, d_max] into `bins` bins:
/// depth_i = d_min + (d_max-d_min) * i(i+1) / (bins(bins+1)), i = 0..bins.
/// Returns bins+1 strictly increasing depths whose gaps grow linearly.
std::vector<double> lid_depth_bins(double d_min_m, double d_max_m, int bins);

/// Points origin + t_i * direction, in depth order.
std::vector<Vec3> sample_ray_points(const Ray& ray,
                                    const std::vector<double>& depths_m);

/// Per-axis (x - min) / (max - min), clamped to [0, 1]. Far samples routinely
/// leave the region and still need a bounded embedding input.
std::vector<Vec3> normalize_points(const std::vector<Vec3>& points,
                                   const Roi3D& roi);

/// Flattens points to [x0,y0,z0, x1,y1,z1, ...] for MLP input.
Vector flatten_points(const std::vector<Vec3>& points);

struct Projection {
  double u_px;
  double v_px;
  double depth_m;
};

/// Projects a unified-frame point; nullopt when the point lies behind the
/// camera (z <= kBehindCameraEpsilon). Off-image projections are returned
/// as-is; bounds are the caller's concern.
std::optional<Projection> project_point(const CameraModel& cam,
                                        const Vec3& p_unified_m);

ConeParams frustum_cone(const CameraModel& cam, double u_px, double v_px,
                        double stride_px);

}  // namespace focaldet

#endif  // FOCALDET_CAMERA_HPP_
