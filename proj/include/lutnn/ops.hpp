// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "lutnn/tape.hpp"

namespace lutnn {

// Batch-norm owns its trainables (no decay) and running moments. Running
// moments update with unbiased variance; normalization uses biased variance.
struct BatchNormState {
  Parameter gain, shift;       // [1, C]
  Matrix running_mean, running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;

  BatchNormState() = default;
  explicit BatchNormState(Eigen::Index c)
      : gain(1, c, false),
        shift(1, c, false),
        running_mean(Matrix::Zero(1, c)),
        running_var(Matrix::Ones(1, c)) {
    gain.value.setOnes();
  }
  Eigen::Index width() const { return gain.value.cols(); }
};

// y = x * W^T + b.  x:[B,in]  w:[out,in]  b:[1,out] broadcast over rows.
// w/b are tape ids so constants (leaf) and trainables (param) both work.
int affine(Tape& t, int x, int w, int b);

int relu(Tape& t, int x);

int add(Tape& t, int a, int b);

// train=true normalizes with batch statistics (batch >= 2 or TrainError) and,
// when update_running is set, folds them into the running moments. train=false
// normalizes with the running moments; no state is touched.
int batch_norm(Tape& t, int x, BatchNormState& bn, bool train, bool update_running);

// Softmax cross-entropy, mean over the batch. labels[i] in [0, C).
// Returns a scalar node.
int cross_entropy(Tape& t, int logits, const std::vector<int>& labels);

// y = x(:, cols[0..k)). Duplicate columns allowed; gradients scatter-add.
int gather_cols(Tape& t, int x, std::vector<int> cols);

}  // namespace lutnn
