// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lutnn/ops.hpp"
#include "lutnn/quant.hpp"

namespace lutnn {

// One network = a stack of table layers. Layer l has layer_widths[l] units,
// each a small dense MLP over fan_ins[l] inputs whose output is quantized to
// layer_bits[l] bits. assemble_flags[l] = true wires unit u to the previous
// layer's units [u*F, (u+1)*F) (tree assembly); false means the unit's inputs
// are chosen per unit (learned during mapping selection, random as fallback).
struct ModelConfig {
  std::string name;
  int input_features = 0;
  int input_bits = 1;
  std::vector<int> layer_widths;
  std::vector<uint8_t> assemble_flags;
  std::vector<int> fan_ins;
  std::vector<int> layer_bits;
  int subnet_depth = 2;   // hidden layers per unit
  int subnet_width = 16;  // neurons per hidden layer
  int skip_step = 2;      // hidden layers per skip block

  int layer_count() const { return int(layer_widths.size()); }
  int output_units() const { return layer_widths.back(); }
  int output_bits() const { return layer_bits.back(); }
};

// Throws ConfigError naming the offending layer. Checks: non-empty stack,
// positive widths/fans/bits, array lengths agree, layer 0 never assembled,
// assembled layers consume the previous layer exactly (w_{l-1} == w_l * F_l),
// learned layers have enough distinct sources, skip/depth/width positive.
void validate_config(const ModelConfig& cfg);

// Maximal runs of layers ending at an activation boundary: a group is a span
// [first, last] where layers first..last-1 are assembled continuations and
// last is the first layer in the run that does not feed an assembled layer.
// Units apply their activation only at group ends, so each group behaves like
// one deep MLP spanning the tree.
struct TreeGroup {
  int first = 0;
  int last = 0;
};
std::vector<TreeGroup> tree_groups(const ModelConfig& cfg);
bool applies_activation(const ModelConfig& cfg, int layer);

// Node counts per level when total_inputs leaves are reduced by the given
// per-level fan-ins. Throws ConfigError unless the reduction lands exactly
// on one node. tree_shape(16, {4,4}) = {4,1}; tree_shape(16, {2,2,2,2}) =
// {8,4,2,1}.
std::vector<int> tree_shape(int total_inputs, const std::vector<int>& fan_ins);

// Dense MLP hidden inside one table unit. Hidden layer j: affine -> batch
// norm -> (skip add at block boundaries) -> relu. Blocks tile the hidden
// stack in chunks of skip_step; a non-final block adds its projection to the
// pre-activation of its last layer, the final block's projection bypasses the
// output affine and lands on the output scalar. Projections are identity-
// initialized when square.
struct SubNetwork {
  int fan_in = 0;
  int width = 0;
  int depth = 0;
  int skip_step = 0;
  bool tree_skip = true;  // final-block projection present

  std::vector<Parameter> hidden_w;  // [width, prev]
  std::vector<Parameter> hidden_b;  // [1, width]
  std::vector<BatchNormState> bn;
  Parameter out_w;  // [1, width]
  Parameter out_b;  // [1, 1]
  std::vector<Parameter> skip_w;  // block k: [block_out, block_in]
  std::vector<Parameter> skip_b;

  int block_count() const { return (depth + skip_step - 1) / skip_step; }

  // Output node ([B,1]) on the tape. train toggles batch-norm semantics;
  // update_running is only honored when training (backward recomputation
  // passes false so moments update once per step).
  int build_tape(Tape& t, int x, bool train, bool update_running);

  // Eval-mode batched output (running moments, no tape).
  Matrix eval(const Matrix& x) const;

  void collect_params(std::vector<Parameter*>& out);
};

SubNetwork make_subnetwork(int fan_in, int depth, int width, int skip_step, bool tree_skip,
                           Rng& rng);

struct LutLayer {
  int fan_in = 0;
  int out_bits = 1;
  bool assembled = false;
  bool activation = false;              // group end: relu before quantization
  std::vector<std::vector<int>> mapping;  // per unit, sorted ascending
  std::vector<SubNetwork> units;
  Parameter out_scale;  // shared learnable quantizer scale, 1x1

  int unit_count() const { return int(units.size()); }
  QuantSpec spec() const { return QuantSpec{out_bits, out_scale.value(0, 0)}; }
};

struct Network {
  ModelConfig config;
  std::vector<FeatureCodec> input_codecs;  // fitted on the training split
  std::vector<LutLayer> layers;

  std::vector<Parameter*> parameters();
};

// Assembled layers get their fixed consecutive mappings; learned layers start
// with seeded random distinct sources (replaced after mapping selection via
// set_mapping). Parameter init: uniform +-1/sqrt(fan_in) affines, identity
// skips where square. tree_skips=false drops every unit's final-block
// projection.
Network build_network(const ModelConfig& cfg, uint64_t seed, bool tree_skips = true);

void set_mapping(Network& net, int layer, std::vector<std::vector<int>> mapping);

// One layer as a single tape node with unit-granular checkpointing: the
// forward runs every unit on a throwaway sub-tape (keeping only the [B, w_l]
// boundary), the backward rebuilds them. update_running gates the batch-norm
// moment update so rebuilds never double-apply it.
int lut_layer_forward(Tape& t, int x, LutLayer& layer, bool update_running);
Matrix lut_layer_eval(const LutLayer& layer, const Matrix& x);

// Training forward: input codes are decoded through the codecs, every layer
// output passes through relu (group ends) and the layer's fake-quantizer.
// Returns the final real-valued activations node.
int forward_train(Network& net, Tape& t, const CodeMat& input_codes);

// Eval forward used for metrics: batched, running-moment batch norm, same
// relu/quantize chain via eval-mode quantizers. Returns real activations;
// out_codes (optional) receives the final layer's codes.
Matrix forward_eval(const Network& net, const CodeMat& input_codes, CodeMat* out_codes = nullptr);

// argmax over outputs; single-output networks apply the half-scale rule
// (code >= 2^(bits-1), i.e. real >= 0.5*scale).
int predict_label(const float* outputs, int n, const QuantSpec& out_spec);

}  // namespace lutnn
