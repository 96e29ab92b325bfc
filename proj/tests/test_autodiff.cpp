// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gradcheck.hpp"
#include "lutnn/errors.hpp"
#include "lutnn/ops.hpp"
#include "lutnn/tape.hpp"

using namespace lutnn;

TEST_CASE("finite differences agree with every primitive's pull-back") {
  // The acceptance suite runs 100 cases per op; a dozen here keeps the module
  // test fast while still catching shape or formula regressions.
  auto suite = gradcheck::run_primitive_suite(0x5eedull, 12);
  INFO("worst: ", suite.worst);
  CHECK(suite.cases == 6 * 12);
  CHECK(suite.checked > 1000);
  CHECK(suite.failures == 0);
  CHECK(suite.max_rel <= 1e-3);
}

TEST_CASE("finite differences agree through a deep composite graph") {
  Rng rng(0xc0357ull);
  for (int c = 0; c < 5; ++c) {
    auto rep = gradcheck::case_composite(rng);
    INFO("case ", c, " worst: ", rep.worst);
    CHECK(rep.failures == 0);
  }
}

TEST_CASE("gradcheck suite is deterministic for a fixed seed") {
  auto a = gradcheck::run_primitive_suite(7, 3);
  auto b = gradcheck::run_primitive_suite(7, 3);
  CHECK(a.checked == b.checked);
  CHECK(a.max_rel == b.max_rel);
  CHECK(a.worst == b.worst);
}

TEST_CASE("cross-entropy of uniform logits is ln(C)") {
  Tape t;
  Matrix logits = Matrix::Zero(4, 10);
  int node = cross_entropy(t, t.leaf(logits), {0, 3, 7, 9});
  CHECK(std::fabs(double(t.val(node)(0, 0)) - std::log(10.0)) < 1e-6);
}

TEST_CASE("fan-out reuse doubles the gradient exactly") {
  Tape t;
  Matrix x(1, 3);
  x << -1.0f, 0.5f, 2.0f;
  int xi = t.leaf(x);
  int y = relu(t, xi);
  int z = add(t, y, y);
  t.backward_seeded(z, Matrix::Ones(1, 3));
  Matrix want(1, 3);
  want << 0.0f, 2.0f, 2.0f;  // relu mask is x > 0, then the add fans in twice
  CHECK(t.grad(xi) == want);
}

TEST_CASE("relu subgradient at zero is zero") {
  Tape t;
  Matrix x(1, 3);
  x << -1.0f, 0.0f, 2.0f;
  int xi = t.leaf(x);
  int y = relu(t, xi);
  t.backward_seeded(y, Matrix::Ones(1, 3));
  CHECK(t.grad(xi)(0, 0) == 0.0f);
  CHECK(t.grad(xi)(0, 1) == 0.0f);
  CHECK(t.grad(xi)(0, 2) == 1.0f);
}

TEST_CASE("mounting one parameter twice sums its contributions") {
  Parameter p(1, 3);
  p.value << 1.0f, 2.0f, 3.0f;
  Tape t;
  int a = t.param(p);
  int b = t.param(p);
  int y = add(t, a, b);
  Matrix seed(1, 3);
  seed << 1.0f, 10.0f, 100.0f;
  p.zero_grad();
  t.backward_seeded(y, seed);
  CHECK(p.grad == Matrix(2.0f * seed));

  // Gradients accumulate across backward calls until the caller zeroes them.
  t.backward_seeded(y, seed);
  CHECK(p.grad == Matrix(4.0f * seed));
}

TEST_CASE("nodes the loss does not reach keep zero gradient") {
  Tape t;
  Matrix x = Matrix::Ones(2, 2);
  int used = t.leaf(x);
  int unused = t.leaf(Matrix(5.0f * x));
  int y = relu(t, used);
  t.backward_seeded(y, Matrix::Ones(2, 2));
  CHECK(t.grad(unused) == Matrix::Zero(2, 2));
}

TEST_CASE("backward rejects non-scalar losses and bad ids") {
  Tape t;
  int m = t.leaf(Matrix::Ones(2, 3));
  CHECK_THROWS_AS(t.backward(m), TrainError);
  CHECK_THROWS_AS(t.backward(-1), TrainError);
  CHECK_THROWS_AS(t.backward(99), TrainError);
  CHECK_THROWS_AS(t.backward_seeded(m, Matrix::Ones(1, 1)), TrainError);
}

TEST_CASE("batch_norm train mode needs at least two rows") {
  BatchNormState bn(3);
  Tape t;
  int x = t.leaf(Matrix::Ones(1, 3));
  CHECK_THROWS_AS(batch_norm(t, x, bn, true, false), TrainError);
}

TEST_CASE("batch_norm running moments move only when asked") {
  BatchNormState bn(2);
  Matrix x(4, 2);
  x << 1.0f, -2.0f, 3.0f, 0.0f, -1.0f, 2.0f, 5.0f, 4.0f;

  Tape t1;
  batch_norm(t1, t1.leaf(x), bn, true, /*update_running=*/false);
  CHECK(bn.running_mean == Matrix::Zero(1, 2));
  CHECK(bn.running_var == Matrix::Ones(1, 2));

  Tape t2;
  batch_norm(t2, t2.leaf(x), bn, true, /*update_running=*/true);
  // mean = [2, 1]; unbiased var = [20/3, 20/3] folded at momentum 0.1.
  CHECK(bn.running_mean(0, 0) == doctest::Approx(0.2).epsilon(1e-5));
  CHECK(bn.running_mean(0, 1) == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(bn.running_var(0, 0) == doctest::Approx(0.9 + 2.0 / 3.0).epsilon(1e-5));

  // Eval mode normalizes with the stored moments and never touches them.
  Matrix rm = bn.running_mean, rv = bn.running_var;
  Tape t3;
  int y = batch_norm(t3, t3.leaf(x), bn, false, false);
  CHECK(bn.running_mean == rm);
  CHECK(bn.running_var == rv);
  float want = (x(0, 0) - rm(0, 0)) / std::sqrt(rv(0, 0) + bn.eps);
  CHECK(t3.val(y)(0, 0) == doctest::Approx(want).epsilon(1e-5));
}
