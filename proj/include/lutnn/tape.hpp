// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <utility>

#include "lutnn/tensor.hpp"

namespace lutnn {

// Reverse-mode tape. Ops push one node per result; each node's pull-back adds
// into the gradients of the nodes it consumed, so fan-out sums naturally.
// Tapes are cheap and short-lived: one per training step (or per sub-network
// recompute inside a layer's backward).
class Tape {
 public:
  using Backprop = std::function<void(Tape&, int self)>;

  struct Node {
    Matrix value;
    Matrix grad;
    Backprop pull;            // empty for leaves
    Parameter* param = nullptr;
  };

  int leaf(Matrix value) {
    nodes_.push_back({std::move(value), {}, {}, nullptr});
    return int(nodes_.size()) - 1;
  }

  // Parameter leaf: value is copied onto the tape, gradient flows back into
  // p.grad. The same Parameter may be mounted several times; contributions sum.
  int param(Parameter& p) {
    nodes_.push_back({p.value, {}, {}, &p});
    return int(nodes_.size()) - 1;
  }

  int push(Matrix value, Backprop pull) {
    nodes_.push_back({std::move(value), {}, std::move(pull), nullptr});
    return int(nodes_.size()) - 1;
  }

  const Matrix& val(int id) const { return nodes_[size_t(id)].value; }
  Matrix& grad(int id) { return nodes_[size_t(id)].grad; }
  int size() const { return int(nodes_.size()); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. The loss must be
  // a 1x1 node; throws TrainError otherwise. Parameter gradients accumulate
  // into Parameter::grad (callers zero them between steps). Nodes the loss does
  // not reach keep zero gradient.
  void backward(int loss);

  // Same sweep from an arbitrary node with an explicit incoming gradient.
  // Layer checkpointing uses this to re-run a sub-network and pull a column of
  // the downstream gradient through it.
  void backward_seeded(int node, const Matrix& seed);

 private:
  std::deque<Node> nodes_;  // deque: node refs stay valid across push
};

}  // namespace lutnn
