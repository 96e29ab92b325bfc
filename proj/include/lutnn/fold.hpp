// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lutnn/model.hpp"

namespace lutnn {

// Eval-mode sub-network with batch norm folded into the hidden affines:
// W' = diag(gain/sqrt(var+eps))*W, b' = (b-mean)*gain/sqrt(var+eps) + shift.
// One scalar evaluation path, fixed operation order. The table enumerator and
// the exact model evaluator both call eval() here, so "table lookup equals
// model output" holds down to the last bit; tests check the folding itself
// against an unfolded double-precision recomputation.
struct FoldedUnit {
  int fan_in = 0;
  int depth = 0;
  int skip_step = 0;
  bool tree_skip = true;

  std::vector<Matrix> w;  // [width, prev]
  std::vector<Matrix> b;  // [1, width]
  Matrix out_w;           // [1, width]
  float out_b = 0.0f;
  std::vector<Matrix> skip_w;
  std::vector<Matrix> skip_b;

  float eval(const Eigen::VectorXf& x) const;
};

FoldedUnit fold_unit(const SubNetwork& sn);

// Whole network in folded form: the normative eval semantics. eval_codes
// mirrors the netlist exactly (per-sample, per-unit table-order arithmetic).
struct FoldedLayer {
  bool activation = false;
  QuantSpec out_spec;
  std::vector<std::vector<int>> mapping;
  std::vector<FoldedUnit> units;
};

struct FoldedNetwork {
  std::vector<QuantSpec> input_specs;
  std::vector<FoldedLayer> layers;

  // codes: [rows, input_features] -> [rows, w_last] output codes.
  CodeMat eval_codes(const CodeMat& input_codes) const;
};

FoldedNetwork fold_network(const Network& net);

}  // namespace lutnn
