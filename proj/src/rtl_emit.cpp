// SPDX-License-Identifier: Apache-2.0
#include "lutnn/rtl_emit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"

namespace fs = std::filesystem;

namespace lutnn {

namespace {

std::string hex_literal(int width_bits, uint64_t value) {
  int digits = (width_bits + 3) / 4;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%d'h%0*llx", width_bits, digits,
                static_cast<unsigned long long>(value));
  return buf;
}

std::string unit_module_name(const std::string& prefix, int layer, int unit) {
  return prefix + "_l" + std::to_string(layer) + "_u" + std::to_string(unit);
}

std::string emit_unit_module(const std::string& prefix, const TruthTable& tt) {
  std::ostringstream o;
  int in_width = int(tt.index_bits());
  o << "module " << unit_module_name(prefix, tt.layer, tt.unit) << " (\n"
    << "    input  wire [" << in_width - 1 << ":0] in_bus,\n"
    << "    output reg  [" << tt.out_bits - 1 << ":0] out\n"
    << ");\n"
    << "  always @(*) begin\n"
    << "    case (in_bus)\n";
  for (size_t idx = 0; idx < tt.entries.size(); ++idx)
    o << "      " << hex_literal(in_width, idx) << ": out = "
      << hex_literal(tt.out_bits, tt.entries[idx]) << ";\n";
  o << "      default: out = " << hex_literal(tt.out_bits, 0) << ";\n"
    << "    endcase\n"
    << "  end\n"
    << "endmodule\n";
  return o.str();
}

}  // namespace

RtlBundle emit_verilog(const LutNetlist& nl, const std::string& prefix) {
  RtlBundle bundle;
  bundle.prefix = prefix;

  std::ostringstream manifest;
  manifest << "RTL bundle prefix=" << prefix << " policy=" << nl.policy << "\n";

  std::vector<int> bus_width(size_t(nl.layer_count() + 1));
  bus_width[0] = nl.input_features * nl.input_bits;
  for (int l = 0; l < nl.layer_count(); ++l) {
    int64_t w = 0;
    for (const auto& node : nl.layers[size_t(l)])
      w += nl.tables[size_t(node.table)].out_bits;
    bus_width[size_t(l + 1)] = int(w);
  }

  for (int l = 0; l < nl.layer_count(); ++l) {
    const auto& layer = nl.layers[size_t(l)];
    std::ostringstream o;
    int in_width = bus_width[size_t(l)];
    int out_width = bus_width[size_t(l + 1)];

    for (const auto& node : layer) {
      const TruthTable& tt = nl.tables[size_t(node.table)];
      o << emit_unit_module(prefix, tt) << "\n";
      manifest << unit_module_name(prefix, tt.layer, tt.unit) << " table="
               << digest_hex(tt.digest()) << "\n";
    }

    o << "module " << prefix << "_layer" << l << " (\n"
      << "    input  wire [" << in_width - 1 << ":0] in_bus,\n"
      << "    output wire [" << out_width - 1 << ":0] out_bus\n"
      << ");\n";
    int out_lo = 0;
    for (const auto& node : layer) {
      const TruthTable& tt = nl.tables[size_t(node.table)];
      // Verilog concatenation lists MSB first; input 0 must land at bit 0.
      o << "  " << unit_module_name(prefix, tt.layer, tt.unit) << " u" << tt.unit
        << " (.in_bus({";
      for (size_t i = node.inputs.size(); i-- > 0;) {
        o << "in_bus[" << node.inputs[i].index * tt.in_bits << " +: " << tt.in_bits << "]";
        if (i) o << ", ";
      }
      o << "}), .out(out_bus[" << out_lo << " +: " << tt.out_bits << "]));\n";
      out_lo += tt.out_bits;
    }
    o << "endmodule\n";
    bundle.layer_files.push_back(
        RtlFile{prefix + "_layer" + std::to_string(l) + ".v", o.str()});
    manifest << prefix << "_layer" << l << " units=" << layer.size() << "\n";
  }

  std::ostringstream o;
  o << "module " << prefix << "_top (\n"
    << "    input  wire clk,\n"
    << "    input  wire [" << bus_width[0] - 1 << ":0] in_bus,\n"
    << "    output wire [" << bus_width.back() - 1 << ":0] out_bus\n"
    << ");\n";
  size_t reg_i = 0;
  std::string cur = "in_bus";
  for (int l = 0; l < nl.layer_count(); ++l) {
    std::string comb = "l" + std::to_string(l) + "_comb";
    o << "  wire [" << bus_width[size_t(l + 1)] - 1 << ":0] " << comb << ";\n"
      << "  " << prefix << "_layer" << l << " layer" << l << " (.in_bus(" << cur
      << "), .out_bus(" << comb << "));\n";
    cur = comb;
    if (reg_i < nl.register_after.size() && nl.register_after[reg_i] == l + 1) {
      std::string stage = "stage" + std::to_string(l + 1);
      o << "  reg [" << bus_width[size_t(l + 1)] - 1 << ":0] " << stage << ";\n"
        << "  always @(posedge clk) " << stage << " <= " << cur << ";\n";
      cur = stage;
      ++reg_i;
    }
  }
  o << "  assign out_bus = " << cur << ";\n"
    << "endmodule\n";
  bundle.top = RtlFile{prefix + "_top.v", o.str()};
  manifest << prefix << "_top stages=" << nl.stage_count() << "\n";
  bundle.manifest = manifest.str();
  return bundle;
}

void write_bundle(const RtlBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  auto write_one = [&](const RtlFile& f) {
    std::ofstream out(fs::path(dir) / f.name);
    out << f.content;
    if (!out) throw DataError("write_bundle: cannot write " + f.name);
  };
  for (const auto& f : bundle.layer_files) write_one(f);
  write_one(bundle.top);
  std::ofstream mf(fs::path(dir) / "manifest.txt");
  mf << bundle.manifest;
  if (!mf) throw DataError("write_bundle: cannot write manifest.txt");
}

std::string pack_hex(const std::vector<int>& codes, int bits_per) {
  int total = int(codes.size()) * bits_per;
  int digits = (total + 3) / 4;
  std::string hex(size_t(digits), '0');
  static const char* hexdig = "0123456789abcdef";
  // Set nibble-by-nibble: bit b of the bus = bit (b%4) of hex digit
  // digits-1-b/4 (MSB-first string).
  std::vector<uint8_t> nibbles(size_t(digits), 0);
  for (size_t i = 0; i < codes.size(); ++i) {
    for (int bit = 0; bit < bits_per; ++bit) {
      if ((codes[i] >> bit) & 1) {
        int b = int(i) * bits_per + bit;
        nibbles[size_t(b / 4)] |= uint8_t(1 << (b % 4));
      }
    }
  }
  for (int d = 0; d < digits; ++d) hex[size_t(digits - 1 - d)] = hexdig[nibbles[size_t(d)]];
  return hex;
}

std::string emit_golden_vectors(const LutNetlist& nl,
                                const std::vector<std::vector<int>>& inputs) {
  std::ostringstream o;
  o << "# LNVEC v1 in_bits=" << nl.input_features * nl.input_bits << " out_bits=";
  int64_t out_bits = 0;
  for (const auto& node : nl.layers.back()) out_bits += nl.tables[size_t(node.table)].out_bits;
  o << out_bits << "\n";
  for (const auto& in : inputs) {
    std::vector<int> out = simulate(nl, in);
    o << pack_hex(in, nl.input_bits) << " " << pack_hex(out, nl.output_bits) << "\n";
  }
  return o.str();
}

}  // namespace lutnn
