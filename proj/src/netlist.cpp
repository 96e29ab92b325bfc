// SPDX-License-Identifier: Apache-2.0
#include "lutnn/netlist.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"

namespace lutnn {

std::string PipelinePolicy::describe() const {
  return kind == Kind::EveryLayer ? "every-layer" : ("every-" + std::to_string(k));
}

PipelinePolicy parse_policy(const std::string& s) {
  if (s == "every-layer") return PipelinePolicy::every_layer();
  if (s.rfind("every-", 0) == 0) {
    int k = std::stoi(s.substr(6));
    if (k >= 1) return PipelinePolicy::every_k(k);
  }
  throw ConfigError("unknown pipeline policy '" + s + "' (every-layer or every-<k>)");
}

LutNetlist build_netlist(std::vector<TruthTable> tables, const Network& net,
                         PipelinePolicy policy) {
  const ModelConfig& cfg = net.config;
  std::map<std::pair<int, int>, int> by_unit;
  for (size_t i = 0; i < tables.size(); ++i)
    by_unit[{tables[i].layer, tables[i].unit}] = int(i);

  LutNetlist nl;
  nl.input_features = cfg.input_features;
  nl.input_bits = cfg.input_bits;
  nl.output_bits = cfg.output_bits();
  nl.tables = std::move(tables);
  nl.policy = policy.describe();

  int next_id = 0;
  for (int l = 0; l < cfg.layer_count(); ++l) {
    const LutLayer& layer = net.layers[size_t(l)];
    std::vector<LutNode> nodes;
    for (int u = 0; u < layer.unit_count(); ++u) {
      auto it = by_unit.find({l, u});
      if (it == by_unit.end())
        throw VerifyError("build_netlist: missing table for layer " + std::to_string(l) +
                          " unit " + std::to_string(u));
      const TruthTable& tt = nl.tables[size_t(it->second)];
      if (tt.fan_in != layer.fan_in)
        throw VerifyError("build_netlist: table fan_in mismatch at layer " + std::to_string(l));
      LutNode node;
      node.id = next_id++;
      node.table = it->second;
      int prev_width = l == 0 ? cfg.input_features : cfg.layer_widths[size_t(l - 1)];
      for (int src : layer.mapping[size_t(u)]) {
        if (src < 0 || src >= prev_width)
          throw VerifyError("build_netlist: dangling wire at layer " + std::to_string(l));
        node.inputs.push_back(Wire{l - 1, src});
      }
      nodes.push_back(std::move(node));
    }
    nl.layers.push_back(std::move(nodes));
  }

  int n = cfg.layer_count();
  if (policy.kind == PipelinePolicy::Kind::EveryLayer) {
    for (int b = 1; b <= n; ++b) nl.register_after.push_back(b);
  } else {
    for (int b = policy.k; b <= n; b += policy.k) nl.register_after.push_back(b);
    if (nl.register_after.empty() || nl.register_after.back() != n)
      nl.register_after.push_back(n);
  }
  return nl;
}

std::vector<int> simulate(const LutNetlist& nl, const std::vector<int>& input_codes) {
  if (int(input_codes.size()) != nl.input_features)
    throw VerifyError("simulate: expected " + std::to_string(nl.input_features) + " input codes");
  const int in_limit = (1 << nl.input_bits) - 1;
  for (int c : input_codes)
    if (c < 0 || c > in_limit) throw VerifyError("simulate: input code out of range");

  std::vector<int> prev = input_codes;
  for (const auto& layer : nl.layers) {
    std::vector<int> cur(layer.size());
    for (size_t u = 0; u < layer.size(); ++u) {
      const LutNode& node = layer[u];
      const TruthTable& tt = nl.tables[size_t(node.table)];
      uint64_t idx = 0;
      for (size_t i = 0; i < node.inputs.size(); ++i)
        idx |= uint64_t(uint32_t(prev[size_t(node.inputs[i].index)]))
               << (uint64_t(tt.in_bits) * uint64_t(i));
      cur[u] = int(tt.entries[idx]);
    }
    prev = std::move(cur);
  }
  return prev;
}

std::vector<StreamOutput> simulate_stream(const LutNetlist& nl,
                                          const std::vector<std::vector<int>>& inputs) {
  // Registers delay by one cycle each; combinational result is policy-
  // independent, so the stream is simulate() delayed by stage_count.
  std::vector<StreamOutput> out;
  const int latency = nl.stage_count();
  for (size_t t = 0; t < inputs.size(); ++t)
    out.push_back(StreamOutput{int64_t(t) + latency, simulate(nl, inputs[t])});
  return out;
}

NetlistStats stats(const LutNetlist& nl) {
  NetlistStats s;
  for (const auto& layer : nl.layers) {
    s.l_lut_count += int64_t(layer.size());
    for (const auto& node : layer) {
      const TruthTable& tt = nl.tables[size_t(node.table)];
      s.table_bits += int64_t(tt.entries.size()) * tt.out_bits;
    }
  }
  for (int b : nl.register_after) {
    const auto& layer = nl.layers[size_t(b - 1)];
    int64_t width = 0;
    for (const auto& node : layer) width += nl.tables[size_t(node.table)].out_bits;
    s.register_bits += width;
  }
  int prev_b = 0;
  for (int b : nl.register_after) {
    s.comb_depth = std::max(s.comb_depth, b - prev_b);
    prev_b = b;
  }
  s.stage_count = nl.stage_count();
  return s;
}

int classify(const std::vector<int>& output_codes, int out_bits) {
  if (output_codes.empty()) throw VerifyError("classify: no outputs");
  if (output_codes.size() == 1) return output_codes[0] >= (1 << (out_bits - 1)) ? 1 : 0;
  size_t best = 0;
  for (size_t i = 1; i < output_codes.size(); ++i)
    if (output_codes[i] > output_codes[best]) best = i;
  return int(best);
}

void save_netlist(const LutNetlist& nl, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_netlist: cannot write " + path);
  out << "LNET v1 features=" << nl.input_features << " in_bits=" << nl.input_bits
      << " out_bits=" << nl.output_bits << " layers=" << nl.layer_count()
      << " policy=" << nl.policy << "\n";
  for (int l = 0; l < nl.layer_count(); ++l) {
    const auto& layer = nl.layers[size_t(l)];
    out << "layer " << l << " units=" << layer.size() << "\n";
    for (const auto& node : layer) {
      const TruthTable& tt = nl.tables[size_t(node.table)];
      out << "node " << node.id << " table=" << table_filename(tt.layer, tt.unit) << " digest="
          << digest_hex(tt.digest()) << " inputs=";
      for (size_t i = 0; i < node.inputs.size(); ++i) {
        if (i) out << ",";
        const Wire& w = node.inputs[i];
        if (w.layer < 0)
          out << "i" << w.index;
        else
          out << "l" << w.layer << ":" << w.index;
      }
      out << "\n";
    }
  }
  out << "registers";
  for (int b : nl.register_after) out << " " << b;
  out << "\n";
  if (!out) throw DataError("save_netlist: write failed for " + path);
}

LutNetlist load_netlist(const std::string& path, std::vector<TruthTable> tables) {
  std::ifstream in(path);
  if (!in) throw DataError("load_netlist: cannot open " + path);

  std::map<std::string, int> by_name;
  for (size_t i = 0; i < tables.size(); ++i)
    by_name[table_filename(tables[i].layer, tables[i].unit)] = int(i);

  LutNetlist nl;
  nl.tables = std::move(tables);

  std::string line;
  if (!std::getline(in, line)) throw DataError("load_netlist: empty file");
  {
    std::istringstream h(line);
    std::string keyword, version, kv;
    h >> keyword >> version;
    if (keyword != "LNET" || version != "v1") throw DataError("load_netlist: not an LNET v1 file");
    int layer_count = 0;
    while (h >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw DataError("load_netlist: malformed header");
      std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "features")
        nl.input_features = std::stoi(value);
      else if (key == "in_bits")
        nl.input_bits = std::stoi(value);
      else if (key == "out_bits")
        nl.output_bits = std::stoi(value);
      else if (key == "layers")
        layer_count = std::stoi(value);
      else if (key == "policy")
        nl.policy = value;
      else
        throw DataError("load_netlist: unknown header key " + key);
    }
    if (layer_count < 1) throw DataError("load_netlist: bad layer count");
    nl.layers.resize(size_t(layer_count));
  }

  int cur_layer = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "layer") {
      int l = -1;
      ls >> l;
      if (l < 0 || l >= nl.layer_count()) throw DataError("load_netlist: layer index out of range");
      cur_layer = l;
    } else if (word == "node") {
      if (cur_layer < 0) throw DataError("load_netlist: node before layer");
      LutNode node;
      std::string table_kv, digest_kv, inputs_kv;
      ls >> node.id >> table_kv >> digest_kv >> inputs_kv;
      if (table_kv.rfind("table=", 0) != 0 || digest_kv.rfind("digest=", 0) != 0 ||
          inputs_kv.rfind("inputs=", 0) != 0)
        throw DataError("load_netlist: malformed node line");
      std::string name = table_kv.substr(6);
      auto it = by_name.find(name);
      if (it == by_name.end()) throw DataError("load_netlist: missing table " + name);
      node.table = it->second;
      if (digest_hex(nl.tables[size_t(node.table)].digest()) != digest_kv.substr(7))
        throw DataError("load_netlist: digest mismatch for " + name);
      std::istringstream ws(inputs_kv.substr(7));
      std::string wire;
      while (std::getline(ws, wire, ',')) {
        if (wire.empty()) throw DataError("load_netlist: empty wire reference");
        Wire w;
        if (wire[0] == 'i') {
          w.layer = -1;
          w.index = std::stoi(wire.substr(1));
        } else if (wire[0] == 'l') {
          auto colon = wire.find(':');
          if (colon == std::string::npos) throw DataError("load_netlist: malformed wire " + wire);
          w.layer = std::stoi(wire.substr(1, colon - 1));
          w.index = std::stoi(wire.substr(colon + 1));
        } else {
          throw DataError("load_netlist: malformed wire " + wire);
        }
        if (w.layer != cur_layer - 1) throw DataError("load_netlist: wire must reference previous layer");
        node.inputs.push_back(w);
      }
      nl.layers[size_t(cur_layer)].push_back(std::move(node));
    } else if (word == "registers") {
      int b;
      while (ls >> b) nl.register_after.push_back(b);
    } else {
      throw DataError("load_netlist: unexpected line '" + line + "'");
    }
  }
  if (nl.register_after.empty() || nl.register_after.back() != nl.layer_count())
    throw DataError("load_netlist: output boundary is not registered");
  return nl;
}

std::string stats_text(const NetlistStats& s) {
  std::ostringstream o;
  o << "l_luts         " << s.l_lut_count << "\n"
    << "table_bits     " << s.table_bits << "\n"
    << "register_bits  " << s.register_bits << "\n"
    << "comb_depth     " << s.comb_depth << "\n"
    << "stages         " << s.stage_count << "\n";
  return o.str();
}

std::string stats_csv(const NetlistStats& s) {
  std::ostringstream o;
  o << "l_luts,table_bits,register_bits,comb_depth,stages\n"
    << s.l_lut_count << "," << s.table_bits << "," << s.register_bits << "," << s.comb_depth
    << "," << s.stage_count << "\n";
  return o.str();
}

}  // namespace lutnn
