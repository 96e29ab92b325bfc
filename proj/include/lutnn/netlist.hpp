// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lutnn/lut_compiler.hpp"

namespace lutnn {

// wire = output of (layer, unit); layer -1 addresses the input features.
struct Wire {
  int layer = -1;
  int index = 0;
};

struct LutNode {
  int id = 0;
  int table = 0;  // index into LutNetlist::tables
  std::vector<Wire> inputs;
};

struct PipelinePolicy {
  enum class Kind { EveryLayer, EveryK };
  Kind kind = Kind::EveryLayer;
  int k = 1;

  static PipelinePolicy every_layer() { return {Kind::EveryLayer, 1}; }
  static PipelinePolicy every_k(int k) { return {Kind::EveryK, k}; }
  std::string describe() const;
};

PipelinePolicy parse_policy(const std::string& s);  // "every-layer" | "every-3"

// Pure-integer DAG over truth tables. Registers sit at layer boundaries
// (boundary b = after layer b-1); the output boundary is always registered.
struct LutNetlist {
  int input_features = 0;
  int input_bits = 0;
  int output_bits = 0;
  std::vector<TruthTable> tables;
  std::vector<std::vector<LutNode>> layers;
  std::vector<int> register_after;  // 1-based layer boundaries, ascending
  std::string policy;

  int layer_count() const { return int(layers.size()); }
  int output_units() const { return int(layers.back().size()); }
  int stage_count() const { return int(register_after.size()); }
};

struct NetlistStats {
  int64_t l_lut_count = 0;
  int64_t table_bits = 0;     // sum of 2^(bits*F) * out_bits
  int64_t register_bits = 0;  // bus widths at registered boundaries
  int comb_depth = 0;         // max layers between consecutive registers
  int stage_count = 0;
};

// Tables must be the compile_network output for the same network (layer-major
// complete cover); wiring copies the unit mappings. Throws VerifyError on a
// missing table or a wire out of range.
LutNetlist build_netlist(std::vector<TruthTable> tables, const Network& net,
                         PipelinePolicy policy);

// Combinational semantics: registers transparent. codes[i] feeds feature i.
std::vector<int> simulate(const LutNetlist& nl, const std::vector<int>& input_codes);

// Cycle-accurate: input t's result appears at cycle t + stage_count, one
// result per cycle after that (initiation interval 1).
struct StreamOutput {
  int64_t cycle = 0;
  std::vector<int> codes;
};
std::vector<StreamOutput> simulate_stream(const LutNetlist& nl,
                                          const std::vector<std::vector<int>>& inputs);

NetlistStats stats(const LutNetlist& nl);

// argmax over codes, lowest index on ties; single output: code >= 2^(bits-1).
int classify(const std::vector<int>& output_codes, int out_bits);

// The text form stores wiring and table digests; tables travel separately
// (import_tables). Loading cross-checks every referenced digest.
void save_netlist(const LutNetlist& nl, const std::string& path);
LutNetlist load_netlist(const std::string& path, std::vector<TruthTable> tables);

std::string stats_text(const NetlistStats& s);
std::string stats_csv(const NetlistStats& s);

}  // namespace lutnn
