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

// Shared helpers for the test suites: seeded generators and the brute-force
// assignment oracle. Everything here is independent of the implementation
// paths it is used to check.

#ifndef FOCALDET_TESTS_SUPPORT_TEST_UTIL_HPP_
#define FOCALDET_TESTS_SUPPORT_TEST_UTIL_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include "focaldet/camera.hpp"
#include "focaldet/numeric.hpp"
#include "focaldet/sampling.hpp"

namespace focaldet::testing {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-12, std::abs(want));
}

/// Gradient comparison against the central-difference oracle: 1e-5 relative
/// wherever the oracle is resolvable, an absolute bound of 1e-9 (ten times
/// the oracle's own rounding floor of ~1e-16 |f| / h) below that.
inline bool grad_close(double analytic, double fd) {
  if (std::abs(fd) > 1e-4) return rel_err(analytic, fd) < 1e-5;
  return std::abs(analytic - fd) < 1e-9;
}

inline Mat3 random_rotation(Rng& rng) {
  return Mat3::rotation_z(rng.uniform(-3.0, 3.0)) *
         Mat3::rotation_y(rng.uniform(-3.0, 3.0)) *
         Mat3::rotation_x(rng.uniform(-3.0, 3.0));
}

inline CameraModel random_camera(Rng& rng, int width = 640, int height = 480) {
  return CameraModel(rng.uniform(80.0, 400.0), rng.uniform(80.0, 400.0),
                     width / 2.0 + rng.uniform(-8.0, 8.0),
                     height / 2.0 + rng.uniform(-8.0, 8.0), width, height,
                     random_rotation(rng),
                     {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
                      rng.uniform(-5.0, 5.0)});
}

inline Box2D random_box(Rng& rng, double extent = 100.0) {
  const double x0 = rng.uniform(0.0, extent);
  const double y0 = rng.uniform(0.0, extent);
  return Box2D(x0, y0, x0 + rng.uniform(1.0, extent),
               y0 + rng.uniform(1.0, extent));
}

struct BruteForceAssignment {
  std::vector<int> row_of_col;
  double total = std::numeric_limits<double>::infinity();
};

namespace detail {

inline void brute_force_walk(const std::vector<std::vector<double>>& cost,
                             size_t col, double running,
                             std::vector<char>& used,
                             std::vector<int>& current,
                             BruteForceAssignment& best) {
  const size_t cols = cost.empty() ? 0 : cost[0].size();
  if (col == cols) {
    // Strict improvement only: the first optimum found in ascending-row DFS
    // order is the lexicographically smallest one.
    if (running < best.total) {
      best.total = running;
      best.row_of_col = current;
    }
    return;
  }
  for (size_t row = 0; row < cost.size(); ++row) {
    if (used[row]) continue;
    used[row] = 1;
    current[col] = static_cast<int>(row);
    brute_force_walk(cost, col + 1, running + cost[row][col], used, current,
                     best);
    used[row] = 0;
  }
}

}  // namespace detail

/// Exhaustive minimum-cost assignment of every column to a distinct row,
/// accumulating costs in ascending column order (the same canonical order the
/// implementation reports).
inline BruteForceAssignment brute_force_min_assignment(
    const std::vector<std::vector<double>>& cost) {
  BruteForceAssignment best;
  if (cost.empty()) return best;
  std::vector<char> used(cost.size(), 0);
  std::vector<int> current(cost[0].size(), -1);
  detail::brute_force_walk(cost, 0, 0.0, used, current, best);
  return best;
}

}  // namespace focaldet::testing

#endif  // FOCALDET_TESTS_SUPPORT_TEST_UTIL_HPP_
