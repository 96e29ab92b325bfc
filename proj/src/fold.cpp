// SPDX-License-Identifier: Apache-2.0
#include "lutnn/fold.hpp"

#include "lutnn/errors.hpp"
#include "lutnn/threading.hpp"

namespace lutnn {

FoldedUnit fold_unit(const SubNetwork& sn) {
  FoldedUnit f;
  f.fan_in = sn.fan_in;
  f.depth = sn.depth;
  f.skip_step = sn.skip_step;
  f.tree_skip = sn.tree_skip;

  for (int j = 0; j < sn.depth; ++j) {
    const auto ju = size_t(j);
    const BatchNormState& bn = sn.bn[ju];
    Matrix istd = (bn.running_var.array() + bn.eps).rsqrt().matrix();
    Matrix g = (bn.gain.value.array() * istd.array()).matrix();  // [1, width]
    Matrix wf = sn.hidden_w[ju].value;
    for (Eigen::Index r = 0; r < wf.rows(); ++r) wf.row(r) *= g(0, r);
    Matrix bf = ((sn.hidden_b[ju].value - bn.running_mean).array() * g.array()).matrix() +
                bn.shift.value;
    f.w.push_back(std::move(wf));
    f.b.push_back(std::move(bf));
  }
  f.out_w = sn.out_w.value;
  f.out_b = sn.out_b.value(0, 0);
  for (const auto& p : sn.skip_w) f.skip_w.push_back(p.value);
  for (const auto& p : sn.skip_b) f.skip_b.push_back(p.value);
  return f;
}

float FoldedUnit::eval(const Eigen::VectorXf& x) const {
  Eigen::VectorXf h = x;
  Eigen::VectorXf block_in = x;
  int k = 0;
  for (int j = 0; j < depth; ++j) {
    const auto ju = size_t(j);
    Eigen::VectorXf z = w[ju] * h + b[ju].row(0).transpose();
    bool inner_block_end = (j + 1) % skip_step == 0 && j + 1 < depth;
    if (inner_block_end) {
      z += skip_w[size_t(k)] * block_in + skip_b[size_t(k)].row(0).transpose();
    }
    h = z.cwiseMax(0.0f);
    if (inner_block_end) {
      block_in = h;
      ++k;
    }
  }
  float out = out_w.row(0).dot(h) + out_b;
  if (tree_skip) {
    const auto last = skip_w.size() - 1;
    out += skip_w[last].row(0).dot(block_in) + skip_b[last](0, 0);
  }
  return out;
}

FoldedNetwork fold_network(const Network& net) {
  FoldedNetwork f;
  for (const auto& c : net.input_codecs) f.input_specs.push_back(c.spec);
  for (const auto& layer : net.layers) {
    FoldedLayer fl;
    fl.activation = layer.activation;
    fl.out_spec = layer.spec();
    fl.mapping = layer.mapping;
    for (const auto& u : layer.units) fl.units.push_back(fold_unit(u));
    f.layers.push_back(std::move(fl));
  }
  return f;
}

CodeMat FoldedNetwork::eval_codes(const CodeMat& input_codes) const {
  if (size_t(input_codes.cols()) != input_specs.size())
    throw VerifyError("eval_codes: input width does not match codec count");
  const auto rows = input_codes.rows();
  CodeMat out(rows, Eigen::Index(layers.back().units.size()));

  parallel_for(size_t(rows), [&](size_t lo, size_t hi) {
    std::vector<int> cur, next;
    for (size_t r = lo; r < hi; ++r) {
      cur.resize(input_specs.size());
      std::vector<float> reals(input_specs.size());
      for (size_t i = 0; i < input_specs.size(); ++i) {
        cur[i] = input_codes(Eigen::Index(r), Eigen::Index(i));
        reals[i] = dequantize(cur[i], input_specs[i]);
      }
      std::vector<float> layer_in = reals;
      for (const auto& layer : layers) {
        next.resize(layer.units.size());
        std::vector<float> layer_out(layer.units.size());
        for (size_t u = 0; u < layer.units.size(); ++u) {
          const auto& m = layer.mapping[u];
          Eigen::VectorXf xu(Eigen::Index(m.size()));
          for (size_t i = 0; i < m.size(); ++i) xu(Eigen::Index(i)) = layer_in[size_t(m[i])];
          float y = layer.units[u].eval(xu);
          if (layer.activation && y < 0.0f) y = 0.0f;
          int code = quantize_code(y, layer.out_spec);
          next[u] = code;
          layer_out[u] = dequantize(code, layer.out_spec);
        }
        layer_in = layer_out;
        cur = next;
      }
      for (size_t u = 0; u < cur.size(); ++u)
        out(Eigen::Index(r), Eigen::Index(u)) = cur[u];
    }
  });
  return out;
}

}  // namespace lutnn
