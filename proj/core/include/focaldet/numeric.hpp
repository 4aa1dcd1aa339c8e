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

#ifndef FOCALDET_NUMERIC_HPP_
#define FOCALDET_NUMERIC_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "focaldet/errors.hpp"

namespace focaldet {

using Vector = std::vector<double>;

/// Activation between the two layers of every Mlp2 in this project.
/// Kept as a named constant so the choice is auditable from one place.
inline constexpr const char* kMlpActivation = "relu";

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra for 3D geometry.
// ---------------------------------------------------------------------------

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const;
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity();
  /// Rotation by `angle_rad` about the z axis.
  static Mat3 rotation_z(double angle_rad);
  static Mat3 rotation_x(double angle_rad);
  static Mat3 rotation_y(double angle_rad);

  double at(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
  double& at(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }

  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  /// Max absolute deviation of R^T R from the identity.
  double orthonormality_error() const;
};

// ---------------------------------------------------------------------------
// Dense matrices (row major), used for token features, keys/values, queries
// and attention weights.
// ---------------------------------------------------------------------------

class DenseMatrix {
 public:
  DenseMatrix() = default;
  /// Zero-filled rows x cols matrix.
  DenseMatrix(int rows, int cols);
  /// Takes ownership of `data` (row major). Size and finiteness are checked.
  DenseMatrix(int rows, int cols, std::vector<double> data);

  static DenseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double at(int r, int c) const { return data_[flat(r, c)]; }
  double& at(int r, int c) { return data_[flat(r, c)]; }

  std::span<const double> row(int r) const {
    return {data_.data() + flat(r, 0), static_cast<size_t>(cols_)};
  }
  std::span<double> row(int r) {
    return {data_.data() + flat(r, 0), static_cast<size_t>(cols_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

 private:
  size_t flat(int r, int c) const {
    return static_cast<size_t>(r) * static_cast<size_t>(cols_) +
           static_cast<size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T (the shape used for attention scores: queries x tokens)
DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);

/// Row-wise softmax, stabilized by subtracting each row's maximum before
/// exponentiation. Every output row is nonnegative and sums to 1.
DenseMatrix softmax_rows(const DenseMatrix& m);

// ---------------------------------------------------------------------------
// Deterministic random source.
//
// std::mt19937_64 is fully specified by the standard; the scaling below avoids
// std::uniform_real_distribution, whose output is implementation-defined.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n).
  int below(int n) {
    require(n > 0, "Rng::below: n must be positive");
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  std::uint64_t seed() const { return seed_; }

  /// Independent deterministic stream derived from this generator's seed.
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Linear layers and the 2-layer MLP used for positional and alignment
// encodings.
// ---------------------------------------------------------------------------

struct LinearLayer {
  DenseMatrix weight;  // out_dim x in_dim
  Vector bias;         // out_dim

  int in_dim() const { return weight.cols(); }
  int out_dim() const { return weight.rows(); }

  /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static LinearLayer seeded(int in_dim, int out_dim, Rng& rng);
  static LinearLayer zero(int in_dim, int out_dim);
};

/// y = W x + b. Dimension mismatch is a contract violation.
Vector linear_forward(std::span<const double> x, const LinearLayer& layer);

/// Two linear layers with a ReLU in between (see kMlpActivation).
struct Mlp2 {
  LinearLayer layer1;
  LinearLayer layer2;

  int in_dim() const { return layer1.in_dim(); }
  int hidden_dim() const { return layer1.out_dim(); }
  int out_dim() const { return layer2.out_dim(); }

  static Mlp2 seeded(int in_dim, int hidden_dim, int out_dim, Rng& rng);
  static Mlp2 zero(int in_dim, int hidden_dim, int out_dim);
  /// Net that ignores its input and outputs `value` on every coordinate.
  static Mlp2 constant(int in_dim, int hidden_dim, int out_dim, double value);
};

Vector mlp2_forward(std::span<const double> x, const Mlp2& net);

// ---------------------------------------------------------------------------
// Finite differences: the gradient oracle used by the test suites.
// ---------------------------------------------------------------------------

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
/// A non-finite evaluation raises a diagnostic naming the coordinate.
Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h);

}  // namespace focaldet

#endif  // FOCALDET_NUMERIC_HPP_
