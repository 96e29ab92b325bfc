// SPDX-License-Identifier: Apache-2.0
#include "lutnn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lutnn/config_io.hpp"
#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"

namespace lutnn {

namespace {
constexpr char kMagic[4] = {'L', 'N', 'C', 'K'};
constexpr uint32_t kVersion = 1;

struct Writer {
  std::string buf;
  void raw(const void* p, size_t n) { buf.append(static_cast<const char*>(p), n); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void f32(float v) { raw(&v, 4); }
  void matrix(const Matrix& m) {
    u32(uint32_t(m.rows()));
    u32(uint32_t(m.cols()));
    raw(m.data(), size_t(m.size()) * 4);  // row-major contiguous
  }
};

struct Reader {
  const char* p;
  const char* end;
  const std::string& path;
  void need(size_t n) const {
    if (size_t(end - p) < n) throw DataError("checkpoint truncated: " + path);
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  float f32() {
    need(4);
    float v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  void matrix_into(Matrix& m, const char* what) {
    uint32_t r = u32(), c = u32();
    if (Eigen::Index(r) != m.rows() || Eigen::Index(c) != m.cols())
      throw DataError(std::string("checkpoint does not match its embedded config (") + what +
                      " shape)");
    need(size_t(r) * c * 4);
    std::memcpy(m.data(), p, size_t(r) * c * 4);
    p += size_t(r) * c * 4;
  }
};

template <typename Fn>
void for_each_moment(Network& net, Fn&& fn) {
  for (auto& layer : net.layers)
    for (auto& unit : layer.units)
      for (auto& bn : unit.bn) {
        fn(bn.running_mean);
        fn(bn.running_var);
      }
}
}  // namespace

void save_checkpoint(const std::string& path, Network& net, const TrainHyperparams& hp) {
  Writer w;
  std::string cfg_json = config_to_json(net.config, hp);
  w.u32(uint32_t(cfg_json.size()));
  w.raw(cfg_json.data(), cfg_json.size());

  bool tree_skips = true;
  for (const auto& layer : net.layers)
    for (const auto& unit : layer.units) tree_skips = tree_skips && unit.tree_skip;
  w.u32(tree_skips ? 1 : 0);

  w.u32(uint32_t(net.input_codecs.size()));
  for (const auto& c : net.input_codecs) {
    w.f32(c.offset);
    w.u32(uint32_t(c.spec.bits));
    w.f32(c.spec.scale);
  }

  w.u32(uint32_t(net.layers.size()));
  for (const auto& layer : net.layers) {
    w.u32(uint32_t(layer.mapping.size()));
    for (const auto& m : layer.mapping) {
      w.u32(uint32_t(m.size()));
      for (int s : m) w.u32(uint32_t(s));
    }
  }

  auto params = net.parameters();
  w.u32(uint32_t(params.size()));
  for (Parameter* p : params) w.matrix(p->value);

  uint32_t moment_count = 0;
  for_each_moment(net, [&](Matrix&) { ++moment_count; });
  w.u32(moment_count);
  for_each_moment(net, [&](Matrix& m) { w.matrix(m); });

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(kMagic, 4);
  uint32_t ver = kVersion;
  f.write(reinterpret_cast<const char*>(&ver), 4);
  uint64_t size = w.buf.size();
  uint64_t digest = fnv1a(w.buf.data(), w.buf.size());
  f.write(reinterpret_cast<const char*>(&size), 8);
  f.write(reinterpret_cast<const char*>(&digest), 8);
  f.write(w.buf.data(), std::streamsize(w.buf.size()));
  if (!f) throw DataError("short write saving checkpoint: " + path);
}

Network load_checkpoint(const std::string& path, TrainHyperparams* hp) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (blob.size() < 24) throw DataError("checkpoint truncated: " + path);
  if (std::memcmp(blob.data(), kMagic, 4) != 0)
    throw DataError("not a checkpoint file (bad magic): " + path);
  uint32_t ver;
  std::memcpy(&ver, blob.data() + 4, 4);
  if (ver != kVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(ver) + ": " + path);
  uint64_t size, digest;
  std::memcpy(&size, blob.data() + 8, 8);
  std::memcpy(&digest, blob.data() + 16, 8);
  if (blob.size() != 24 + size) throw DataError("checkpoint truncated: " + path);
  if (fnv1a(blob.data() + 24, size_t(size)) != digest)
    throw DataError("checkpoint digest mismatch (file corrupted or tampered): " + path);

  Reader r{blob.data() + 24, blob.data() + blob.size(), path};
  uint32_t cfg_len = r.u32();
  r.need(cfg_len);
  std::string cfg_json(r.p, cfg_len);
  r.p += cfg_len;
  TrainHyperparams local_hp;
  ModelConfig cfg = config_from_json(cfg_json, &local_hp);
  if (hp) *hp = local_hp;

  bool tree_skips = r.u32() != 0;
  Network net = build_network(cfg, local_hp.seed, tree_skips);

  uint32_t codec_count = r.u32();
  if (int(codec_count) != cfg.input_features)
    throw DataError("checkpoint does not match its embedded config (codec count)");
  net.input_codecs.resize(codec_count);
  for (auto& c : net.input_codecs) {
    c.offset = r.f32();
    c.spec.bits = int(r.u32());
    c.spec.scale = r.f32();
    if (c.spec.bits < 1 || c.spec.bits > 24)
      throw DataError("checkpoint carries an implausible codec bit width");
  }

  uint32_t layer_count = r.u32();
  if (int(layer_count) != cfg.layer_count())
    throw DataError("checkpoint does not match its embedded config (layer count)");
  for (uint32_t l = 0; l < layer_count; ++l) {
    uint32_t units = r.u32();
    if (int(units) != cfg.layer_widths[l])
      throw DataError("checkpoint does not match its embedded config (unit count)");
    std::vector<std::vector<int>> mapping(units);
    for (auto& m : mapping) {
      uint32_t fan = r.u32();
      m.resize(fan);
      for (auto& s : m) s = int(r.u32());
    }
    if (!cfg.assemble_flags[l]) set_mapping(net, int(l), std::move(mapping));
    // assembled layers: mapping is implied, stored copy only cross-checked
    else if (mapping != net.layers[l].mapping)
      throw DataError("checkpoint does not match its embedded config (assembled mapping)");
  }

  auto params = net.parameters();
  uint32_t param_count = r.u32();
  if (size_t(param_count) != params.size())
    throw DataError("checkpoint does not match its embedded config (parameter count)");
  for (Parameter* p : params) r.matrix_into(p->value, "parameter");

  uint32_t moment_count = r.u32();
  uint32_t expect = 0;
  for_each_moment(net, [&](Matrix&) { ++expect; });
  if (moment_count != expect)
    throw DataError("checkpoint does not match its embedded config (moment count)");
  for_each_moment(net, [&](Matrix& m) { r.matrix_into(m, "running moment"); });

  if (r.p != r.end) throw DataError("checkpoint has trailing bytes: " + path);
  return net;
}

}  // namespace lutnn
