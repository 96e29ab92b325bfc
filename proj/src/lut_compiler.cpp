// SPDX-License-Identifier: Apache-2.0
#include "lutnn/lut_compiler.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"
#include "lutnn/threading.hpp"

namespace fs = std::filesystem;

namespace lutnn {

uint64_t TruthTable::digest() const {
  Fnv1a h;
  h.update_pod(layer);
  h.update_pod(unit);
  h.update_pod(fan_in);
  h.update_pod(in_bits);
  h.update_pod(out_bits);
  for (uint32_t e : entries) h.update_pod(e);
  return h.value();
}

TruthTable enumerate_unit(const FoldedUnit& unit, const std::vector<QuantSpec>& feeding,
                          const QuantSpec& output, bool activation, int layer, int unit_id,
                          bool allow_large) {
  if (int(feeding.size()) != unit.fan_in)
    throw VerifyError("enumerate_unit: feeding spec count != fan_in");
  int in_bits = feeding.front().bits;
  for (const auto& q : feeding)
    if (q.bits != in_bits) throw VerifyError("enumerate_unit: feeding bit-widths differ");

  uint64_t width = uint64_t(in_bits) * uint64_t(unit.fan_in);
  if (width > 24 && !allow_large)
    throw ConfigError("enumerate_unit: 2^" + std::to_string(width) +
                      " entries exceeds the safety cap; pass the override to proceed");

  TruthTable tt;
  tt.layer = layer;
  tt.unit = unit_id;
  tt.fan_in = unit.fan_in;
  tt.in_bits = in_bits;
  tt.out_bits = output.bits;
  const uint64_t count = 1ull << width;
  tt.entries.resize(count);

  const uint32_t mask = (1u << in_bits) - 1;
  parallel_for(count, [&](size_t lo, size_t hi) {
    Eigen::VectorXf x(unit.fan_in);
    for (uint64_t idx = lo; idx < hi; ++idx) {
      for (int i = 0; i < unit.fan_in; ++i) {
        uint32_t code = uint32_t(idx >> (uint64_t(in_bits) * uint64_t(i))) & mask;
        x(i) = dequantize(int(code), feeding[size_t(i)]);
      }
      float y = unit.eval(x);
      if (activation && y < 0.0f) y = 0.0f;
      tt.entries[idx] = uint32_t(quantize_code(y, output));
    }
  });
  return tt;
}

std::vector<TruthTable> compile_network(const Network& net, bool allow_large) {
  std::vector<TruthTable> tables;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const LutLayer& layer = net.layers[l];
    std::vector<QuantSpec> prev_specs;
    if (l == 0) {
      for (const auto& c : net.input_codecs) prev_specs.push_back(c.spec);
    } else {
      QuantSpec q = net.layers[l - 1].spec();
      prev_specs.assign(size_t(net.layers[l - 1].unit_count()), q);
    }
    QuantSpec out = layer.spec();
    for (int u = 0; u < layer.unit_count(); ++u) {
      std::vector<QuantSpec> feeding;
      for (int src : layer.mapping[size_t(u)]) feeding.push_back(prev_specs[size_t(src)]);
      tables.push_back(enumerate_unit(fold_unit(layer.units[size_t(u)]), feeding, out,
                                      layer.activation, int(l), u, allow_large));
    }
  }
  return tables;
}

std::string table_filename(int layer, int unit) {
  return "l" + std::to_string(layer) + "_u" + std::to_string(unit) + ".llut";
}

void export_tables(const std::vector<TruthTable>& tables, const std::string& dir) {
  fs::create_directories(dir);
  std::ostringstream manifest;
  for (const auto& tt : tables) {
    std::string name = table_filename(tt.layer, tt.unit);
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw DataError("export_tables: cannot write " + name);
    out << "LLUT v1 layer=" << tt.layer << " unit=" << tt.unit << " fan_in=" << tt.fan_in
        << " in_bits=" << tt.in_bits << " out_bits=" << tt.out_bits << "\n";
    char buf[16];
    for (uint32_t e : tt.entries) {
      std::snprintf(buf, sizeof(buf), "%x", e);
      out << buf << "\n";
    }
    if (!out) throw DataError("export_tables: write failed for " + name);
    manifest << name << " " << digest_hex(tt.digest()) << "\n";
  }
  std::ofstream mf(fs::path(dir) / "manifest.txt");
  mf << manifest.str();
  if (!mf) throw DataError("export_tables: cannot write manifest.txt");
}

namespace {

TruthTable import_one(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("import_tables: cannot open " + file.string());
  std::string keyword, version;
  in >> keyword >> version;
  if (keyword != "LLUT" || version != "v1")
    throw DataError("import_tables: " + file.filename().string() + ": not an LLUT v1 file");

  TruthTable tt;
  for (int field = 0; field < 5; ++field) {
    std::string kv;
    in >> kv;
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw DataError("import_tables: " + file.filename().string() + ": malformed header");
    std::string key = kv.substr(0, eq);
    int value = std::stoi(kv.substr(eq + 1));
    if (key == "layer")
      tt.layer = value;
    else if (key == "unit")
      tt.unit = value;
    else if (key == "fan_in")
      tt.fan_in = value;
    else if (key == "in_bits")
      tt.in_bits = value;
    else if (key == "out_bits")
      tt.out_bits = value;
    else
      throw DataError("import_tables: " + file.filename().string() + ": unknown header key " + key);
  }
  if (tt.fan_in < 1 || tt.in_bits < 1 || tt.out_bits < 1 || tt.index_bits() > 40)
    throw DataError("import_tables: " + file.filename().string() + ": implausible header");

  const uint64_t count = 1ull << tt.index_bits();
  tt.entries.reserve(count);
  std::string line;
  std::getline(in, line);  // rest of header line
  uint64_t lineno = 1;
  const uint32_t limit = (tt.out_bits >= 32) ? 0xffffffffu : ((1u << tt.out_bits) - 1);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    uint32_t v = 0;
    if (std::sscanf(line.c_str(), "%x", &v) != 1)
      throw DataError("import_tables: " + file.filename().string() + ": bad hex at line " +
                      std::to_string(lineno));
    if (v > limit)
      throw DataError("import_tables: " + file.filename().string() + ": entry exceeds out_bits at line " +
                      std::to_string(lineno));
    tt.entries.push_back(v);
  }
  if (tt.entries.size() != count)
    throw DataError("import_tables: layer " + std::to_string(tt.layer) + " unit " +
                    std::to_string(tt.unit) + ": expected " + std::to_string(count) +
                    " entries, found " + std::to_string(tt.entries.size()));
  return tt;
}

}  // namespace

std::vector<TruthTable> import_tables(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.txt");
  if (!mf) throw DataError("import_tables: missing manifest.txt in " + dir);
  std::vector<TruthTable> tables;
  std::string name, digest;
  while (mf >> name >> digest) {
    TruthTable tt = import_one(fs::path(dir) / name);
    if (digest_hex(tt.digest()) != digest)
      throw DataError("import_tables: digest mismatch for " + name);
    tables.push_back(std::move(tt));
  }
  if (tables.empty()) throw DataError("import_tables: manifest lists no tables");
  return tables;
}

}  // namespace lutnn
