// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace lutnn {

// Row-major throughout: rows are samples, columns are features/units.
using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CodeMat = Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Trainable tensor. Gradient is accumulated by Tape::backward and cleared by
// the optimizer step; decay=false exempts it from weight decay (norm gains,
// shifts, quantizer scales).
struct Parameter {
  Matrix value;
  Matrix grad;
  bool decay = true;

  Parameter() = default;
  Parameter(Eigen::Index rows, Eigen::Index cols, bool decay_ = true)
      : value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)), decay(decay_) {}

  void zero_grad() { grad.setZero(); }
};

// Deterministic RNG. Distributions in <random> are implementation-defined, so
// anything that feeds parameter init or shuffles goes through these helpers.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1): 53-bit mantissa path, identical on every platform.
  double unit() { return double(gen_() >> 11) * 0x1.0p-53; }
  float uniform(float lo, float hi) { return lo + float(unit()) * (hi - lo); }
  // Uniform integer in [0, n) via rejection-free scaling; n must be > 0.
  uint64_t below(uint64_t n) { return uint64_t(unit() * double(n)); }
  uint64_t raw() { return gen_(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lutnn
