// SPDX-License-Identifier: Apache-2.0
#include "lutnn/tape.hpp"

#include "lutnn/errors.hpp"

namespace lutnn {

void Tape::backward(int loss) {
  if (loss < 0 || loss >= size()) throw TrainError("backward: loss id out of range");
  if (nodes_[size_t(loss)].value.size() != 1)
    throw TrainError("backward: loss must be a scalar (1x1) node");
  Matrix one(1, 1);
  one(0, 0) = 1.0f;
  backward_seeded(loss, one);
}

void Tape::backward_seeded(int node, const Matrix& seed) {
  if (node < 0 || node >= size()) throw TrainError("backward: node id out of range");
  Node& root = nodes_[size_t(node)];
  if (seed.rows() != root.value.rows() || seed.cols() != root.value.cols())
    throw TrainError("backward: seed shape does not match node");

  for (int i = 0; i <= node; ++i) {
    Node& n = nodes_[size_t(i)];
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  root.grad = seed;

  for (int i = node; i >= 0; --i) {
    Node& n = nodes_[size_t(i)];
    if (n.pull) n.pull(*this, i);
  }
  for (int i = 0; i <= node; ++i) {
    Node& n = nodes_[size_t(i)];
    if (n.param) n.param->grad += n.grad;
  }
}

}  // namespace lutnn
