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

#include "focaldet/numeric.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace focaldet {

Vec3 Vec3::normalized() const {
  const double n = norm();
  require(n > 0.0, "Vec3::normalized: zero-length vector");
  return {x / n, y / n, z / n};
}

Mat3 Mat3::identity() {
  Mat3 r;
  r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return r;
}

Mat3 Mat3::rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

double Mat3::orthonormality_error() const {
  const Mat3 gram = transposed() * (*this);
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      err = std::max(err, std::abs(gram.at(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

DenseMatrix::DenseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols),
      data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0) {
  require(rows >= 0 && cols >= 0, "DenseMatrix: negative dimensions");
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(rows >= 0 && cols >= 0, "DenseMatrix: negative dimensions");
  require(data_.size() ==
              static_cast<size_t>(rows) * static_cast<size_t>(cols),
          "DenseMatrix: data length must equal rows*cols");
  require(all_finite(), "DenseMatrix: entries must be finite");
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix r(n, n);
  for (int i = 0; i < n; ++i) r.at(i, i) = 1.0;
  return r;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r.at(i, j) += aik * b.at(k, j);
    }
  return r;
}

DenseMatrix matmul_transposed(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "matmul_transposed: inner dimensions differ");
  DenseMatrix r(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(j, k);
      r.at(i, j) = s;
    }
  return r;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "add: shape mismatch");
  DenseMatrix r = a;
  for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] += b.data()[i];
  return r;
}

DenseMatrix softmax_rows(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double rowmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) rowmax = std::max(rowmax, m.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      const double e = std::exp(m.at(i, j) - rowmax);
      out.at(i, j) = e;
      sum += e;
    }
    require(sum > 0.0 && std::isfinite(sum),
            "softmax_rows: row reduces to a non-normalizable sum");
    for (int j = 0; j < m.cols(); ++j) out.at(i, j) /= sum;
  }
  return out;
}

Rng Rng::fork(std::uint64_t salt) const {
  // splitmix64 step over seed ^ salt, so sibling streams are unrelated.
  std::uint64_t z = seed_ ^ (salt * 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Rng(z ^ (z >> 31));
}

LinearLayer LinearLayer::seeded(int in_dim, int out_dim, Rng& rng) {
  require(in_dim > 0 && out_dim > 0, "LinearLayer::seeded: bad dimensions");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::vector<double> w(static_cast<size_t>(in_dim) * out_dim);
  for (double& v : w) v = rng.uniform(-bound, bound);
  Vector b(static_cast<size_t>(out_dim));
  for (double& v : b) v = rng.uniform(-bound, bound);
  return {DenseMatrix(out_dim, in_dim, std::move(w)), std::move(b)};
}

LinearLayer LinearLayer::zero(int in_dim, int out_dim) {
  return {DenseMatrix(out_dim, in_dim), Vector(static_cast<size_t>(out_dim))};
}

Vector linear_forward(std::span<const double> x, const LinearLayer& layer) {
  require(static_cast<int>(x.size()) == layer.in_dim(),
          "linear_forward: input length " + std::to_string(x.size()) +
              " does not match in_dim " + std::to_string(layer.in_dim()));
  Vector y(layer.bias);
  for (int i = 0; i < layer.out_dim(); ++i) {
    double s = 0.0;
    for (int j = 0; j < layer.in_dim(); ++j) s += layer.weight.at(i, j) * x[j];
    y[static_cast<size_t>(i)] += s;
  }
  return y;
}

Mlp2 Mlp2::seeded(int in_dim, int hidden_dim, int out_dim, Rng& rng) {
  return {LinearLayer::seeded(in_dim, hidden_dim, rng),
          LinearLayer::seeded(hidden_dim, out_dim, rng)};
}

Mlp2 Mlp2::zero(int in_dim, int hidden_dim, int out_dim) {
  return {LinearLayer::zero(in_dim, hidden_dim),
          LinearLayer::zero(hidden_dim, out_dim)};
}

Mlp2 Mlp2::constant(int in_dim, int hidden_dim, int out_dim, double value) {
  Mlp2 net = zero(in_dim, hidden_dim, out_dim);
  for (double& b : net.layer2.bias) b = value;
  return net;
}

Vector mlp2_forward(std::span<const double> x, const Mlp2& net) {
  Vector h = linear_forward(x, net.layer1);
  for (double& v : h) v = std::max(v, 0.0);  // relu
  return linear_forward(h, net.layer2);
}

Vector finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  require(h > 0.0, "finite_diff_grad: step must be positive");
  Vector probe(x.begin(), x.end());
  Vector grad(x.size(), 0.0);
  for (size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = f(probe);
    probe[i] = xi - h;
    const double fm = f(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw ContractViolation(
          "finite_diff_grad: non-finite evaluation at coordinate " +
          std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace focaldet
