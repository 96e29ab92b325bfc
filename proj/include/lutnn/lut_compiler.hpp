// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lutnn/fold.hpp"

namespace lutnn {

// One unit's enumerated behavior. Index packing is little-endian: mapped
// input i (ascending mapping order) occupies bits [in_bits*i, in_bits*(i+1)).
struct TruthTable {
  int layer = 0;
  int unit = 0;
  int fan_in = 0;
  int in_bits = 0;
  int out_bits = 0;
  std::vector<uint32_t> entries;  // size 2^(in_bits*fan_in)

  uint64_t index_bits() const { return uint64_t(in_bits) * uint64_t(fan_in); }
  uint64_t digest() const;
};

// Exhaustive enumeration of one folded unit: decode each index's codes via the
// feeding specs (one per mapped input; uniform bit-width), run the folded eval
// (plus activation at group ends), quantize to the output code. Refuses
// in_bits*fan_in > 24 unless allow_large. Unit must already be in eval form
// (running statistics frozen by folding).
TruthTable enumerate_unit(const FoldedUnit& unit, const std::vector<QuantSpec>& feeding,
                          const QuantSpec& output, bool activation, int layer, int unit_id,
                          bool allow_large = false);

// Layer-major, unit-minor; one table per unit.
std::vector<TruthTable> compile_network(const Network& net, bool allow_large = false);

// Text format, one file per table plus manifest.txt of "<file> <digest hex>"
// lines. Roundtrip is bit-exact.
void export_tables(const std::vector<TruthTable>& tables, const std::string& dir);
std::vector<TruthTable> import_tables(const std::string& dir);

std::string table_filename(int layer, int unit);

}  // namespace lutnn
