// SPDX-License-Identifier: Apache-2.0
// Double-precision recomputation of a unit from its *unfolded* parameters.
// Deliberately independent of the fold/enumeration path so truth-table
// contents can be cross-checked against a second implementation.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lutnn/model.hpp"
#include "lutnn/quant.hpp"

namespace testutil {

// Mirrors eval-mode forward order: affine, batch norm from running moments,
// inner skip added pre-relu at block ends, final affine plus tree skip.
inline double eval_unfolded(const lutnn::SubNetwork& sn, const std::vector<double>& x) {
  std::vector<double> h = x, block_in = x;
  int k = 0;
  for (int j = 0; j < sn.depth; ++j) {
    const auto ju = size_t(j);
    const auto& W = sn.hidden_w[ju].value;
    const auto& bb = sn.hidden_b[ju].value;
    const auto& bn = sn.bn[ju];
    std::vector<double> z(size_t(W.rows()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double acc = double(bb(0, r));
      for (Eigen::Index c = 0; c < W.cols(); ++c) acc += double(W(r, c)) * h[size_t(c)];
      double istd = 1.0 / std::sqrt(double(bn.running_var(0, r)) + double(bn.eps));
      acc = (acc - double(bn.running_mean(0, r))) * istd * double(bn.gain.value(0, r)) +
            double(bn.shift.value(0, r));
      z[size_t(r)] = acc;
    }
    bool inner_end = (j + 1) % sn.skip_step == 0 && j + 1 < sn.depth;
    if (inner_end) {
      const auto& S = sn.skip_w[size_t(k)].value;
      const auto& sb = sn.skip_b[size_t(k)].value;
      for (Eigen::Index r = 0; r < S.rows(); ++r) {
        double acc = double(sb(0, r));
        for (Eigen::Index c = 0; c < S.cols(); ++c) acc += double(S(r, c)) * block_in[size_t(c)];
        z[size_t(r)] += acc;
      }
    }
    for (double& v : z) v = v > 0.0 ? v : 0.0;
    h = z;
    if (inner_end) {
      block_in = h;
      ++k;
    }
  }
  double out = double(sn.out_b.value(0, 0));
  for (Eigen::Index c = 0; c < sn.out_w.value.cols(); ++c)
    out += double(sn.out_w.value(0, c)) * h[size_t(c)];
  if (sn.tree_skip) {
    const auto& S = sn.skip_w.back().value;
    const auto& sb = sn.skip_b.back().value;
    double acc = double(sb(0, 0));
    for (Eigen::Index c = 0; c < S.cols(); ++c) acc += double(S(0, c)) * block_in[size_t(c)];
    out += acc;
  }
  return out;
}

// Quantize in double, mirroring the integer grid arithmetic. Returns -1 when
// the value sits within eps of a code boundary: float and double may
// legitimately round apart there, so callers must skip those probes.
inline int quantize_or_skip(double y, const lutnn::QuantSpec& out, bool activation) {
  if (activation && y < 0.0) y = 0.0;
  double clamped = std::min(std::max(y, 0.0), double(out.scale));
  double pos = clamped * out.max_code() / double(out.scale);
  if (std::fabs(pos - (std::floor(pos) + 0.5)) < 1e-5 * out.max_code()) return -1;
  return int(std::lround(pos));
}

}  // namespace testutil
