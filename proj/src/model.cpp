// SPDX-License-Identifier: Apache-2.0
#include "lutnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "lutnn/errors.hpp"
#include "lutnn/threading.hpp"

namespace lutnn {

namespace {

std::string layer_tag(int l) { return "layer " + std::to_string(l) + ": "; }

void init_uniform(Matrix& m, float bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

Matrix gather_unit_inputs(const Matrix& x, const std::vector<int>& mapping) {
  Matrix out(x.rows(), Eigen::Index(mapping.size()));
  for (size_t i = 0; i < mapping.size(); ++i) out.col(Eigen::Index(i)) = x.col(mapping[i]);
  return out;
}

}  // namespace

void validate_config(const ModelConfig& cfg) {
  const size_t n = cfg.layer_widths.size();
  if (n == 0) throw ConfigError("config: layer_widths is empty");
  if (cfg.assemble_flags.size() != n || cfg.fan_ins.size() != n || cfg.layer_bits.size() != n)
    throw ConfigError("config: layer_widths, assemble_flags, fan_ins, layer_bits lengths differ");
  if (cfg.input_features < 1) throw ConfigError("config: input_features must be >= 1");
  if (cfg.input_bits < 1 || cfg.input_bits > 16)
    throw ConfigError("config: input_bits outside [1, 16]");
  if (cfg.subnet_depth < 1) throw ConfigError("config: subnet_depth must be >= 1");
  if (cfg.subnet_width < 1) throw ConfigError("config: subnet_width must be >= 1");
  if (cfg.skip_step < 1 || cfg.skip_step > cfg.subnet_depth)
    throw ConfigError("config: skip_step outside [1, subnet_depth]");

  for (size_t l = 0; l < n; ++l) {
    if (cfg.layer_widths[l] < 1) throw ConfigError(layer_tag(int(l)) + "width must be >= 1");
    if (cfg.fan_ins[l] < 1) throw ConfigError(layer_tag(int(l)) + "fan_in must be >= 1");
    if (cfg.layer_bits[l] < 1 || cfg.layer_bits[l] > 16)
      throw ConfigError(layer_tag(int(l)) + "layer_bits outside [1, 16]");
  }
  if (cfg.assemble_flags[0])
    throw ConfigError("layer 0: cannot be an assemble layer (no previous layer to group)");
  for (size_t l = 0; l < n; ++l) {
    int prev = l == 0 ? cfg.input_features : cfg.layer_widths[l - 1];
    if (cfg.assemble_flags[l]) {
      if (prev != cfg.layer_widths[l] * cfg.fan_ins[l])
        throw ConfigError(layer_tag(int(l)) + "assemble grouping does not tile: " +
                          std::to_string(prev) + " != " + std::to_string(cfg.layer_widths[l]) +
                          " * " + std::to_string(cfg.fan_ins[l]));
    } else if (cfg.fan_ins[l] > prev) {
      throw ConfigError(layer_tag(int(l)) + "fan_in " + std::to_string(cfg.fan_ins[l]) +
                        " exceeds available sources " + std::to_string(prev));
    }
  }
}

std::vector<TreeGroup> tree_groups(const ModelConfig& cfg) {
  std::vector<TreeGroup> groups;
  const int n = cfg.layer_count();
  for (int l = 0; l < n;) {
    TreeGroup g{l, l};
    while (g.last + 1 < n && cfg.assemble_flags[size_t(g.last + 1)]) ++g.last;
    groups.push_back(g);
    l = g.last + 1;
  }
  return groups;
}

bool applies_activation(const ModelConfig& cfg, int layer) {
  return layer + 1 >= cfg.layer_count() || !cfg.assemble_flags[size_t(layer + 1)];
}

std::vector<int> tree_shape(int total_inputs, const std::vector<int>& fan_ins) {
  if (total_inputs < 1) throw ConfigError("tree_shape: total inputs must be >= 1");
  std::vector<int> counts;
  int n = total_inputs;
  for (size_t k = 0; k < fan_ins.size(); ++k) {
    int f = fan_ins[k];
    if (f < 1 || n % f != 0)
      throw ConfigError("tree_shape: level " + std::to_string(k) + " fan-in " +
                        std::to_string(f) + " does not divide " + std::to_string(n));
    n /= f;
    counts.push_back(n);
  }
  if (n != 1)
    throw ConfigError("tree_shape: fan-ins reduce " + std::to_string(total_inputs) + " inputs to " +
                      std::to_string(n) + " nodes, not 1");
  return counts;
}

SubNetwork make_subnetwork(int fan_in, int depth, int width, int skip_step, bool tree_skip,
                           Rng& rng) {
  SubNetwork sn;
  sn.fan_in = fan_in;
  sn.width = width;
  sn.depth = depth;
  sn.skip_step = skip_step;
  sn.tree_skip = tree_skip;

  int prev = fan_in;
  for (int j = 0; j < depth; ++j) {
    Parameter w(width, prev);
    Parameter b(1, width);
    float bound = std::sqrt(1.0f / float(prev));
    init_uniform(w.value, bound, rng);
    init_uniform(b.value, bound, rng);
    sn.hidden_w.push_back(std::move(w));
    sn.hidden_b.push_back(std::move(b));
    sn.bn.emplace_back(width);
    prev = width;
  }
  sn.out_w = Parameter(1, width);
  sn.out_b = Parameter(1, 1);
  {
    float bound = std::sqrt(1.0f / float(width));
    init_uniform(sn.out_w.value, bound, rng);
    init_uniform(sn.out_b.value, bound, rng);
  }

  int blocks = sn.block_count();
  int skips = tree_skip ? blocks : blocks - 1;
  int block_in = fan_in;
  for (int k = 0; k < skips; ++k) {
    bool final_block = k == blocks - 1;
    int block_out = final_block ? 1 : width;
    Parameter w(block_out, block_in);
    Parameter b(1, block_out);
    if (block_out == block_in) {
      w.value.setIdentity();
    } else {
      init_uniform(w.value, std::sqrt(1.0f / float(block_in)), rng);
    }
    sn.skip_w.push_back(std::move(w));
    sn.skip_b.push_back(std::move(b));
    block_in = width;
  }
  return sn;
}

int SubNetwork::build_tape(Tape& t, int x, bool train, bool update_running) {
  int h = x;
  int block_in = x;
  int k = 0;
  for (int j = 0; j < depth; ++j) {
    int z = affine(t, h, t.param(hidden_w[size_t(j)]), t.param(hidden_b[size_t(j)]));
    z = batch_norm(t, z, bn[size_t(j)], train, train && update_running);
    bool inner_block_end = (j + 1) % skip_step == 0 && j + 1 < depth;
    if (inner_block_end) {
      int proj = affine(t, block_in, t.param(skip_w[size_t(k)]), t.param(skip_b[size_t(k)]));
      z = add(t, z, proj);
    }
    h = relu(t, z);
    if (inner_block_end) {
      block_in = h;
      ++k;
    }
  }
  int out = affine(t, h, t.param(out_w), t.param(out_b));
  if (tree_skip) {
    size_t last = size_t(block_count() - 1);
    int proj = affine(t, block_in, t.param(skip_w[last]), t.param(skip_b[last]));
    out = add(t, out, proj);
  }
  return out;
}

Matrix SubNetwork::eval(const Matrix& x) const {
  Matrix h = x;
  Matrix block_in = x;
  int k = 0;
  for (int j = 0; j < depth; ++j) {
    const auto ju = size_t(j);
    Matrix z = h * hidden_w[ju].value.transpose();
    z.rowwise() += hidden_b[ju].value.row(0);
    const BatchNormState& b = bn[ju];
    Matrix istd = (b.running_var.array() + b.eps).rsqrt().matrix();
    z = ((z.rowwise() - b.running_mean.row(0)).array().rowwise() *
         (istd.array().row(0) * b.gain.value.array().row(0)))
            .matrix();
    z.rowwise() += b.shift.value.row(0);
    bool inner_block_end = (j + 1) % skip_step == 0 && j + 1 < depth;
    if (inner_block_end) {
      Matrix proj = block_in * skip_w[size_t(k)].value.transpose();
      proj.rowwise() += skip_b[size_t(k)].value.row(0);
      z += proj;
    }
    h = z.cwiseMax(0.0f);
    if (inner_block_end) {
      block_in = h;
      ++k;
    }
  }
  Matrix out = h * out_w.value.transpose();
  out.array() += out_b.value(0, 0);
  if (tree_skip) {
    const auto last = size_t(block_count() - 1);
    Matrix proj = block_in * skip_w[last].value.transpose();
    proj.rowwise() += skip_b[last].value.row(0);
    out += proj;
  }
  return out;
}

void SubNetwork::collect_params(std::vector<Parameter*>& out) {
  for (auto& p : hidden_w) out.push_back(&p);
  for (auto& p : hidden_b) out.push_back(&p);
  for (auto& s : bn) {
    out.push_back(&s.gain);
    out.push_back(&s.shift);
  }
  out.push_back(&out_w);
  out.push_back(&out_b);
  for (auto& p : skip_w) out.push_back(&p);
  for (auto& p : skip_b) out.push_back(&p);
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers) {
    for (auto& u : layer.units) u.collect_params(out);
    out.push_back(&layer.out_scale);
  }
  return out;
}

Network build_network(const ModelConfig& cfg, uint64_t seed, bool tree_skips) {
  validate_config(cfg);
  Network net;
  net.config = cfg;
  Rng rng(seed);

  for (int l = 0; l < cfg.layer_count(); ++l) {
    const auto lu = size_t(l);
    LutLayer layer;
    layer.fan_in = cfg.fan_ins[lu];
    layer.out_bits = cfg.layer_bits[lu];
    layer.assembled = cfg.assemble_flags[lu] != 0;
    layer.activation = applies_activation(cfg, l);
    layer.out_scale = Parameter(1, 1, false);
    layer.out_scale.value(0, 0) = 1.0f;

    int prev = l == 0 ? cfg.input_features : cfg.layer_widths[lu - 1];
    int width = cfg.layer_widths[lu];
    int fan = cfg.fan_ins[lu];
    layer.mapping.resize(size_t(width));
    for (int u = 0; u < width; ++u) {
      auto& m = layer.mapping[size_t(u)];
      if (layer.assembled) {
        for (int i = 0; i < fan; ++i) m.push_back(u * fan + i);
      } else {
        // Placeholder distinct random sources; mapping selection replaces them.
        std::vector<int> pool(static_cast<size_t>(prev));
        for (int i = 0; i < prev; ++i) pool[size_t(i)] = i;
        rng.shuffle(pool);
        m.assign(pool.begin(), pool.begin() + fan);
        std::sort(m.begin(), m.end());
      }
    }
    for (int u = 0; u < width; ++u)
      layer.units.push_back(
          make_subnetwork(fan, cfg.subnet_depth, cfg.subnet_width, cfg.skip_step, tree_skips, rng));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void set_mapping(Network& net, int layer, std::vector<std::vector<int>> mapping) {
  if (layer < 0 || layer >= int(net.layers.size()))
    throw ConfigError("set_mapping: layer out of range");
  LutLayer& ll = net.layers[size_t(layer)];
  if (ll.assembled) throw ConfigError("set_mapping: assemble layer connectivity is fixed");
  int prev = layer == 0 ? net.config.input_features : net.config.layer_widths[size_t(layer - 1)];
  if (mapping.size() != ll.units.size()) throw ConfigError("set_mapping: unit count mismatch");
  for (auto& m : mapping) {
    if (int(m.size()) != ll.fan_in) throw ConfigError("set_mapping: fan_in mismatch");
    std::sort(m.begin(), m.end());
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i] < 0 || m[i] >= prev) throw ConfigError("set_mapping: index out of range");
      if (i > 0 && m[i] == m[i - 1]) throw ConfigError("set_mapping: duplicate index");
    }
  }
  ll.mapping = std::move(mapping);
}

int lut_layer_forward(Tape& t, int x, LutLayer& layer, bool update_running) {
  const Matrix& X = t.val(x);
  const auto B = X.rows();
  const int units = layer.unit_count();
  Matrix Y(B, units);
  LutLayer* lp = &layer;
  parallel_for(size_t(units), [&](size_t lo, size_t hi) {
    for (size_t u = lo; u < hi; ++u) {
      Tape sub;
      int xi = sub.leaf(gather_unit_inputs(X, lp->mapping[u]));
      int out = lp->units[u].build_tape(sub, xi, true, update_running);
      Y.col(Eigen::Index(u)) = sub.val(out).col(0);
    }
  });
  return t.push(std::move(Y), [x, lp](Tape& t, int self) {
    const Matrix& dY = t.grad(self);
    const Matrix& X = t.val(x);
    const size_t units = size_t(lp->unit_count());
    std::vector<Matrix> dXu(units);
    parallel_for(units, [&](size_t lo, size_t hi) {
      for (size_t u = lo; u < hi; ++u) {
        Tape sub;
        int xi = sub.leaf(gather_unit_inputs(X, lp->mapping[u]));
        int out = lp->units[u].build_tape(sub, xi, true, false);
        sub.backward_seeded(out, dY.col(Eigen::Index(u)));
        dXu[u] = std::move(sub.grad(xi));
      }
    });
    // Scatter in fixed unit order so overlapping mappings accumulate
    // identically regardless of thread count.
    Matrix& dX = t.grad(x);
    for (size_t u = 0; u < units; ++u)
      for (size_t i = 0; i < lp->mapping[u].size(); ++i)
        dX.col(lp->mapping[u][i]) += dXu[u].col(Eigen::Index(i));
  });
}

Matrix lut_layer_eval(const LutLayer& layer, const Matrix& x) {
  const int units = layer.unit_count();
  Matrix Y(x.rows(), units);
  parallel_for(size_t(units), [&](size_t lo, size_t hi) {
    for (size_t u = lo; u < hi; ++u)
      Y.col(Eigen::Index(u)) =
          layer.units[u].eval(gather_unit_inputs(x, layer.mapping[u])).col(0);
  });
  return Y;
}

int forward_train(Network& net, Tape& t, const CodeMat& input_codes) {
  if (input_codes.cols() != net.config.input_features)
    throw TrainError("forward: input width does not match input_features");
  int h = t.leaf(decode_features(input_codes, net.input_codecs));
  for (auto& layer : net.layers) {
    h = lut_layer_forward(t, h, layer, true);
    if (layer.activation) h = relu(t, h);
    h = fake_quantize(t, h, layer.out_scale, layer.out_bits);
  }
  return h;
}

Matrix forward_eval(const Network& net, const CodeMat& input_codes, CodeMat* out_codes) {
  if (input_codes.cols() != net.config.input_features)
    throw TrainError("forward: input width does not match input_features");
  Matrix h = decode_features(input_codes, net.input_codecs);
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const LutLayer& layer = net.layers[l];
    Matrix y = lut_layer_eval(layer, h);
    if (layer.activation) y = y.cwiseMax(0.0f);
    QuantSpec q = layer.spec();
    if (l + 1 == net.layers.size() && out_codes) *out_codes = quantize_codes(y, q);
    h = fake_quantize_eval(y, q);
  }
  return h;
}

int predict_label(const float* outputs, int n, const QuantSpec& out_spec) {
  if (n == 1) return outputs[0] >= 0.5f * out_spec.scale ? 1 : 0;
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (outputs[i] > outputs[best]) best = i;
  return best;
}

}  // namespace lutnn
