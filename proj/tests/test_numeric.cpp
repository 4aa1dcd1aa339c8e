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
#include <limits>
#include <string>

#include "focaldet/numeric.hpp"
#include "support/test_util.hpp"

using namespace focaldet;

TEST_CASE("softmax_rows: uniform input gives uniform weights") {
  const DenseMatrix m(1, 3, {0.0, 0.0, 0.0});
  const DenseMatrix s = softmax_rows(m);
  for (int j = 0; j < 3; ++j) CHECK(s.at(0, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax_rows: closed form for [c, c+ln2]") {
  for (double c : {-7.5, 0.0, 123.0}) {
    const DenseMatrix s =
        softmax_rows(DenseMatrix(1, 2, {c, c + std::log(2.0)}));
    CHECK(s.at(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.at(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax_rows: shift invariance and stability up to 1e4") {
  Rng rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    const int cols = 1 + rng.below(6);
    std::vector<double> data(static_cast<size_t>(cols));
    for (double& v : data) v = rng.uniform(-1e4, 1e4);
    const DenseMatrix m(1, cols, data);
    const double shift = rng.uniform(-1e4, 1e4);
    std::vector<double> shifted = data;
    for (double& v : shifted) v += shift;
    const DenseMatrix s0 = softmax_rows(m);
    const DenseMatrix s1 = softmax_rows(DenseMatrix(1, cols, shifted));
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      CHECK(s0.at(0, j) >= 0.0);
      CHECK(s0.at(0, j) == doctest::Approx(s1.at(0, j)).epsilon(1e-9));
      sum += s0.at(0, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("linear_forward: identity, constant, and hand value") {
  const LinearLayer identity{DenseMatrix::identity(2), {0.0, 0.0}};
  const Vector x = {2.5, -3.0};
  CHECK(linear_forward(x, identity) == x);

  const LinearLayer constant{DenseMatrix(2, 2), {4.0, -1.0}};
  CHECK(linear_forward(x, constant) == Vector{4.0, -1.0});

  const LinearLayer hand{DenseMatrix(1, 2, {1.0, 2.0}), {3.0}};
  CHECK(linear_forward(Vector{1.0, 1.0}, hand) == Vector{6.0});
}

TEST_CASE("linear_forward: dimension mismatch throws") {
  const LinearLayer layer{DenseMatrix(2, 3), {0.0, 0.0}};
  CHECK_THROWS_AS(linear_forward(Vector{1.0}, layer), ContractViolation);
}

TEST_CASE("mlp2_forward: zero net, pass-through, and hand value") {
  const Mlp2 zero = Mlp2::zero(2, 3, 2);
  CHECK(mlp2_forward(Vector{1.0, -2.0}, zero) == Vector{0.0, 0.0});

  // Identity-like layers leave nonnegative inputs alone (relu inactive).
  const Mlp2 pass{LinearLayer{DenseMatrix::identity(2), {0.0, 0.0}},
                  LinearLayer{DenseMatrix::identity(2), {0.0, 0.0}}};
  CHECK(mlp2_forward(Vector{0.5, 2.0}, pass) == Vector{0.5, 2.0});

  // 1-1-1 net: relu(2*1 - 1) * 3 + 0 = 3.
  const Mlp2 hand{LinearLayer{DenseMatrix(1, 1, {2.0}), {-1.0}},
                  LinearLayer{DenseMatrix(1, 1, {3.0}), {0.0}}};
  CHECK(mlp2_forward(Vector{1.0}, hand) == Vector{3.0});
}

TEST_CASE("mlp2_forward: deterministic and seed-reproducible") {
  Rng a(42), b(42);
  const Mlp2 net_a = Mlp2::seeded(4, 8, 3, a);
  const Mlp2 net_b = Mlp2::seeded(4, 8, 3, b);
  CHECK(net_a.layer1.weight.data() == net_b.layer1.weight.data());
  const Vector x = {0.1, -0.7, 2.0, 0.0};
  CHECK(mlp2_forward(x, net_a) == mlp2_forward(x, net_b));
}

TEST_CASE("seeded weights stay within the fan-in bound") {
  Rng rng(5);
  const LinearLayer layer = LinearLayer::seeded(16, 8, rng);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double w : layer.weight.data()) CHECK(std::abs(w) <= bound);
}

TEST_CASE("finite_diff_grad: polynomial, constant, and sum") {
  auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  const Vector at3 = {3.0};
  CHECK(std::abs(finite_diff_grad(square, at3, 1e-5)[0] - 6.0) < 1e-6);

  auto constant = [](std::span<const double>) { return 4.25; };
  for (double g : finite_diff_grad(constant, Vector{1.0, 2.0, 3.0}, 1e-5)) {
    CHECK(g == 0.0);
  }

  auto sum = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  for (double g : finite_diff_grad(sum, Vector{-1.0, 0.5}, 1e-5)) {
    CHECK(std::abs(g - 1.0) < 1e-9);
  }
}

TEST_CASE("finite_diff_grad: quadratic forms match 2Ax within 1e-6 relative") {
  Rng rng(77);
  for (int iter = 0; iter < 20; ++iter) {
    const int n = 2 + rng.below(4);
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        a.at(i, j) = a.at(j, i) = rng.uniform(-2.0, 2.0);
      }
    }
    Vector x(static_cast<size_t>(n));
    for (double& v : x) v = rng.uniform(-3.0, 3.0);

    auto quadratic = [&](std::span<const double> p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += p[i] * a.at(i, j) * p[j];
      return s;
    };
    const Vector numeric = finite_diff_grad(quadratic, x, 1e-5);
    for (int i = 0; i < n; ++i) {
      double analytic = 0.0;
      for (int j = 0; j < n; ++j) analytic += 2.0 * a.at(i, j) * x[j];
      if (std::abs(analytic) > 1e-6) {
        CHECK(focaldet::testing::rel_err(numeric[static_cast<size_t>(i)],
                                         analytic) < 1e-6);
      }
    }
  }
}

TEST_CASE("finite_diff_grad: non-finite evaluation names the coordinate") {
  auto bad = [](std::span<const double> x) {
    return x[1] > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  try {
    finite_diff_grad(bad, Vector{0.0, 1.0, 0.0}, 0.5);
    FAIL("expected a diagnostic");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
}

TEST_CASE("DenseMatrix rejects non-finite data and bad sizes") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), ContractViolation);
  CHECK_THROWS_AS(
      DenseMatrix(1, 2, {1.0, std::numeric_limits<double>::infinity()}),
      ContractViolation);
}
