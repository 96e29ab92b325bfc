// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lutnn/netlist.hpp"

namespace lutnn {

struct RtlFile {
  std::string name;
  std::string content;
};

// One source file per netlist layer (unit ROM modules + the layer wrapper),
// one top-level file, and a manifest listing every module with its table
// digest. Module count = L-LUT count + layer wrappers + 1 top. Verilog-2001,
// single clock, no reset; buses pack feature/unit 0 at bit 0, matching
// TableIndex packing.
struct RtlBundle {
  std::string prefix;
  std::vector<RtlFile> layer_files;
  RtlFile top;
  std::string manifest;
};

RtlBundle emit_verilog(const LutNetlist& nl, const std::string& prefix);

void write_bundle(const RtlBundle& bundle, const std::string& dir);

// Golden stimulus/response lines "<input hex> <output hex>" computed by the
// internal simulator; hex packing matches the RTL ports bit for bit.
std::string emit_golden_vectors(const LutNetlist& nl,
                                const std::vector<std::vector<int>>& inputs);

// Bus packing helper shared with tests: code i occupies bits
// [bits_per*i, bits_per*(i+1)); returned hex is MSB-first, ceil(width/4)
// digits, lowercase.
std::string pack_hex(const std::vector<int>& codes, int bits_per);

}  // namespace lutnn
