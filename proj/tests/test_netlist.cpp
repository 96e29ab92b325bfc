// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lutnn/errors.hpp"
#include "lutnn/netlist.hpp"
#include "lutnn/trainer.hpp"

using namespace lutnn;
namespace fs = std::filesystem;

namespace {

ModelConfig stack_cfg() {
  ModelConfig cfg;
  cfg.name = "stack";
  cfg.input_features = 8;
  cfg.input_bits = 2;
  cfg.layer_widths = {4, 4, 2, 1};
  cfg.assemble_flags = {0, 0, 1, 1};
  cfg.fan_ins = {2, 2, 2, 2};
  cfg.layer_bits = {2, 3, 3, 2};
  cfg.subnet_depth = 2;
  cfg.subnet_width = 5;
  return cfg;
}

Network ready_network(uint64_t seed) {
  auto cfg = stack_cfg();
  Network net = build_network(cfg, seed);
  net.input_codecs.assign(8, FeatureCodec{0.0f, QuantSpec{2, 3.0f}});
  Rng rng(seed ^ 0xfeedull);
  CodeMat batch(64, 8);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = int32_t(rng.below(4));
  calibrate_scales(net, batch);
  return net;
}

std::vector<int> random_codes(Rng& rng, int n, int max_code) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int& c : v) c = int(rng.below(uint64_t(max_code + 1)));
  return v;
}

}  // namespace

TEST_CASE("policy parsing and description roundtrip") {
  CHECK(parse_policy("every-layer").kind == PipelinePolicy::Kind::EveryLayer);
  CHECK(parse_policy("every-3").k == 3);
  CHECK(parse_policy("every-3").kind == PipelinePolicy::Kind::EveryK);
  CHECK(parse_policy(PipelinePolicy::every_layer().describe()).kind ==
        PipelinePolicy::Kind::EveryLayer);
  CHECK(parse_policy(PipelinePolicy::every_k(4).describe()).k == 4);
  CHECK_THROWS_AS(parse_policy("every-0"), ConfigError);
  CHECK_THROWS_AS(parse_policy("sometimes"), ConfigError);
}

TEST_CASE("netlist mirrors the folded model bit for bit") {
  Network net = ready_network(5);
  FoldedNetwork folded = fold_network(net);
  auto nl = build_netlist(compile_network(net), net, PipelinePolicy::every_layer());

  Rng rng(99);
  CodeMat batch(512, 8);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = int32_t(rng.below(4));
  CodeMat want = folded.eval_codes(batch);

  for (int r = 0; r < 512; ++r) {
    std::vector<int> in(8);
    for (int c = 0; c < 8; ++c) in[size_t(c)] = batch(r, c);
    auto got = simulate(nl, in);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == want(r, 0));
  }
}

TEST_CASE("pipeline policy changes registers, never values") {
  Network net = ready_network(6);
  auto tables = compile_network(net);
  auto a = build_netlist(tables, net, PipelinePolicy::every_layer());
  auto b = build_netlist(tables, net, PipelinePolicy::every_k(3));

  CHECK(a.stage_count() == 4);
  CHECK(a.register_after == std::vector<int>{1, 2, 3, 4});
  CHECK(b.stage_count() == 2);
  CHECK(b.register_after == std::vector<int>{3, 4});

  Rng rng(77);
  for (int trial = 0; trial < 256; ++trial) {
    auto in = random_codes(rng, 8, 3);
    CHECK(simulate(a, in) == simulate(b, in));
  }
}

TEST_CASE("streaming latency equals the stage count at initiation interval 1") {
  Network net = ready_network(7);
  auto tables = compile_network(net);
  for (auto policy : {PipelinePolicy::every_layer(), PipelinePolicy::every_k(2)}) {
    auto nl = build_netlist(tables, net, policy);
    Rng rng(13);
    std::vector<std::vector<int>> inputs;
    for (int i = 0; i < 20; ++i) inputs.push_back(random_codes(rng, 8, 3));
    auto outs = simulate_stream(nl, inputs);
    REQUIRE(outs.size() == 20);
    for (size_t i = 0; i < outs.size(); ++i) {
      CHECK(outs[i].cycle == int64_t(i) + nl.stage_count());
      CHECK(outs[i].codes == simulate(nl, inputs[i]));
    }
  }
}

TEST_CASE("frozen classification rules") {
  CHECK(classify({3, 7, 7}, 3) == 1);         // argmax tie -> lower index
  CHECK(classify({0, 0, 0}, 3) == 0);
  CHECK(classify({2}, 2) == 1);               // 2 >= 2^(2-1)
  CHECK(classify({1}, 2) == 0);
  CHECK(classify({1}, 1) == 1);               // 1-bit: the set bit is class 1
  CHECK(classify({0}, 1) == 0);
}

TEST_CASE("stats count tables, bits, and combinational depth") {
  Network net = ready_network(8);
  auto tables = compile_network(net);
  auto nl = build_netlist(tables, net, PipelinePolicy::every_k(3));
  auto s = stats(nl);
  CHECK(s.l_lut_count == 11);  // 4 + 4 + 2 + 1 units
  CHECK(s.stage_count == 2);
  CHECK(s.comb_depth == 3);
  // table_bits: layer0 4 tables of 2^4*2, layer1 4 of 2^4*3, layer2 2 of
  // 2^6*3, layer3 1 of 2^6*2.
  CHECK(s.table_bits == 4 * 16 * 2 + 4 * 16 * 3 + 2 * 64 * 3 + 64 * 2);
  // Registered boundaries: after layer 2 (2 units x 3 bits) and the output
  // boundary (1 unit x 2 bits).
  CHECK(s.register_bits == 2 * 3 + 1 * 2);
  CHECK(stats_text(s).find("l_luts") != std::string::npos);
  CHECK(stats_csv(s).find("11") != std::string::npos);
}

TEST_CASE("save/load roundtrip preserves wiring and checks digests") {
  Network net = ready_network(9);
  auto tables = compile_network(net);
  auto nl = build_netlist(tables, net, PipelinePolicy::every_layer());
  std::string path = "build_nl_roundtrip.lnet";
  save_netlist(nl, path);
  auto back = load_netlist(path, tables);
  CHECK(back.input_features == nl.input_features);
  CHECK(back.input_bits == nl.input_bits);
  CHECK(back.output_bits == nl.output_bits);
  CHECK(back.register_after == nl.register_after);
  CHECK(back.policy == nl.policy);
  REQUIRE(back.layer_count() == nl.layer_count());
  Rng rng(31);
  for (int trial = 0; trial < 64; ++trial) {
    auto in = random_codes(rng, 8, 3);
    CHECK(simulate(back, in) == simulate(nl, in));
  }

  // Handing load_netlist the wrong tables trips the digest cross-check.
  auto other = compile_network(ready_network(10));
  CHECK_THROWS_AS(load_netlist(path, other), DataError);
  fs::remove(path);
}

TEST_CASE("builder rejects covers that do not match the network") {
  Network net = ready_network(12);
  auto tables = compile_network(net);
  auto missing = tables;
  missing.pop_back();
  CHECK_THROWS_AS(build_netlist(missing, net, PipelinePolicy::every_layer()), VerifyError);
  CHECK_THROWS_AS(build_netlist({}, net, PipelinePolicy::every_layer()), VerifyError);
}
