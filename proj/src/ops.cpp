// SPDX-License-Identifier: Apache-2.0
#include "lutnn/ops.hpp"

#include <cmath>
#include <utility>

#include "lutnn/errors.hpp"

namespace lutnn {

namespace {
using Arr = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

int affine(Tape& t, int x, int w, int b) {
  Matrix y = t.val(x) * t.val(w).transpose();
  y.rowwise() += t.val(b).row(0);
  return t.push(std::move(y), [x, w, b](Tape& t, int self) {
    const Matrix& dy = t.grad(self);
    t.grad(x).noalias() += dy * t.val(w);
    t.grad(w).noalias() += dy.transpose() * t.val(x);
    t.grad(b).row(0) += dy.colwise().sum();
  });
}

int relu(Tape& t, int x) {
  Matrix y = t.val(x).cwiseMax(0.0f);
  return t.push(std::move(y), [x](Tape& t, int self) {
    Arr mask = (t.val(x).array() > 0.0f).cast<float>();
    t.grad(x) += (t.grad(self).array() * mask).matrix();
  });
}

int add(Tape& t, int a, int b) {
  if (t.val(a).rows() != t.val(b).rows() || t.val(a).cols() != t.val(b).cols())
    throw TrainError("add: shape mismatch");
  Matrix y = t.val(a) + t.val(b);
  return t.push(std::move(y), [a, b](Tape& t, int self) {
    t.grad(a) += t.grad(self);
    t.grad(b) += t.grad(self);
  });
}

int batch_norm(Tape& t, int x, BatchNormState& bn, bool train, bool update_running) {
  const Matrix& xv = t.val(x);
  const auto B = xv.rows();
  if (xv.cols() != bn.width()) throw TrainError("batch_norm: width mismatch");

  if (!train) {
    Matrix istd = (bn.running_var.array() + bn.eps).rsqrt().matrix();
    Matrix xhat =
        ((xv.rowwise() - bn.running_mean.row(0)).array().rowwise() * istd.array().row(0))
            .matrix();
    int g = t.param(bn.gain);
    int s = t.param(bn.shift);
    Matrix y = (xhat.array().rowwise() * t.val(g).array().row(0)).matrix();
    y.rowwise() += t.val(s).row(0);
    return t.push(std::move(y), [x, g, s, xhat, istd](Tape& t, int self) {
      const Matrix& dy = t.grad(self);
      Arr scale = t.val(g).array().row(0) * istd.array().row(0);
      t.grad(x) += (dy.array().rowwise() * scale.row(0)).matrix();
      t.grad(g).row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
      t.grad(s).row(0) += dy.colwise().sum();
    });
  }

  if (B < 2) throw TrainError("batch_norm: training requires batch >= 2");
  Matrix mu = xv.colwise().mean();
  Matrix xhat = xv.rowwise() - mu.row(0);
  Matrix var = xhat.array().square().colwise().mean().matrix();
  Matrix istd = (var.array() + bn.eps).rsqrt().matrix();
  xhat = (xhat.array().rowwise() * istd.array().row(0)).matrix();

  if (update_running) {
    float m = bn.momentum;
    float unbias = float(B) / float(B - 1);
    bn.running_mean = (1.0f - m) * bn.running_mean + m * mu;
    bn.running_var = (1.0f - m) * bn.running_var + m * (var * unbias);
  }

  int g = t.param(bn.gain);
  int s = t.param(bn.shift);
  Matrix y = (xhat.array().rowwise() * t.val(g).array().row(0)).matrix();
  y.rowwise() += t.val(s).row(0);
  // Backward uses the compact normalized form:
  //   dx = istd/B * (B*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
  return t.push(std::move(y), [x, g, s, istd, xhat, B](Tape& t, int self) {
    const Matrix& dy = t.grad(self);
    const float invB = 1.0f / float(B);
    Arr dxhat = dy.array().rowwise() * t.val(g).array().row(0);
    Arr col_dxhat = dxhat.colwise().sum();
    Arr col_dxhat_xhat = (dxhat * xhat.array()).colwise().sum();
    Arr dx = float(B) * dxhat;
    dx.rowwise() -= col_dxhat.row(0);
    dx -= xhat.array().rowwise() * col_dxhat_xhat.row(0);
    dx.rowwise() *= (invB * istd.array()).row(0);
    t.grad(x) += dx.matrix();
    t.grad(g).row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    t.grad(s).row(0) += dy.colwise().sum();
  });
}

int cross_entropy(Tape& t, int logits, const std::vector<int>& labels) {
  const Matrix& z = t.val(logits);
  const auto B = z.rows();
  const auto C = z.cols();
  if (Eigen::Index(labels.size()) != B) throw TrainError("cross_entropy: label count != batch");
  for (int l : labels)
    if (l < 0 || l >= C) throw TrainError("cross_entropy: label out of range");

  Matrix shifted = z.colwise() - z.rowwise().maxCoeff();
  Matrix expz = shifted.array().exp().matrix();
  Matrix sums = expz.rowwise().sum();
  Matrix probs = (expz.array().colwise() / sums.array().col(0)).matrix();

  double total = 0.0;
  for (Eigen::Index i = 0; i < B; ++i)
    total += double(std::log(sums(i, 0))) - double(shifted(i, labels[size_t(i)]));
  Matrix y(1, 1);
  y(0, 0) = float(total / double(B));

  return t.push(std::move(y), [logits, probs, labels, B](Tape& t, int self) {
    float dy = t.grad(self)(0, 0) / float(B);
    Matrix d = probs * dy;
    for (Eigen::Index i = 0; i < B; ++i) d(i, labels[size_t(i)]) -= dy;
    t.grad(logits) += d;
  });
}

int gather_cols(Tape& t, int x, std::vector<int> cols) {
  const Matrix& xv = t.val(x);
  for (int c : cols)
    if (c < 0 || c >= xv.cols()) throw TrainError("gather_cols: column out of range");
  Matrix y(xv.rows(), Eigen::Index(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) y.col(Eigen::Index(i)) = xv.col(cols[i]);
  return t.push(std::move(y), [x, cols = std::move(cols)](Tape& t, int self) {
    const Matrix& dy = t.grad(self);
    for (size_t i = 0; i < cols.size(); ++i)
      t.grad(x).col(cols[i]) += dy.col(Eigen::Index(i));
  });
}

}  // namespace lutnn
