// SPDX-License-Identifier: Apache-2.0
//
// lutnn: train table networks, compile them to truth tables, simulate the
// netlist, and emit RTL. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 training failure, 5 verification mismatch.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lutnn/checkpoint.hpp"
#include "lutnn/config_io.hpp"
#include "lutnn/data_io.hpp"
#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"
#include "lutnn/fold.hpp"
#include "lutnn/lut_compiler.hpp"
#include "lutnn/model.hpp"
#include "lutnn/netlist.hpp"
#include "lutnn/rtl_emit.hpp"
#include "lutnn/threading.hpp"
#include "lutnn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lutnn;

namespace {

std::string resolve(const std::string& path, const std::string& data_dir) {
  if (data_dir.empty() || path.empty() || fs::path(path).is_absolute()) return path;
  if (fs::exists(path)) return path;  // paths that resolve from the cwd win
  return (fs::path(data_dir) / path).string();
}

// Dataset specs:
//   mnist:<dir>                IDX files (train + t10k pairs) under <dir>
//   csv:<file>:<schema>        schema-driven CSV, seeded 80/20 split
//   parity:<features>:<k>:<rows>
//   planted:<features>:<rows>
//   identity:<rows>:<bits>
Dataset open_dataset(const std::string& spec, const std::string& data_dir, uint64_t seed) {
  auto fields = [&spec]() {
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) out.push_back(part);
    return out;
  }();
  if (fields.empty()) throw ConfigError("empty dataset spec");
  const std::string& kind = fields[0];
  auto want = [&](size_t n) {
    if (fields.size() != n)
      throw ConfigError("dataset spec '" + spec + "': expected " + std::to_string(n - 1) +
                        " ':'-separated arguments after '" + kind + "'");
  };
  auto num = [&](size_t i) {
    try {
      size_t pos = 0;
      int v = std::stoi(fields[i], &pos);
      if (pos != fields[i].size()) throw std::invalid_argument(fields[i]);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("dataset spec '" + spec + "': '" + fields[i] + "' is not an integer");
    }
  };

  if (kind == "mnist") {
    want(2);
    std::string dir = resolve(fields[1], data_dir);
    Dataset train = load_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    Dataset test = load_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    Dataset ds = merge_train_test(train, test);
    ds.name = "mnist";
    return ds;
  }
  if (kind == "csv") {
    want(3);
    Dataset ds = load_csv_file(resolve(fields[1], data_dir), resolve(fields[2], data_dir));
    split_80_20(ds, seed);
    return ds;
  }
  if (kind == "parity") {
    want(4);
    return synthetic_parity(num(1), num(2), num(3), seed);
  }
  if (kind == "planted") {
    want(3);
    return synthetic_planted(num(1), num(2), seed);
  }
  if (kind == "identity") {
    want(3);
    return synthetic_identity(num(1), num(2), seed);
  }
  throw ConfigError("unknown dataset kind '" + kind + "' (mnist, csv, parity, planted, identity)");
}

uint64_t file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for digest: " + path);
  Fnv1a h;
  char buf[65536];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) h.update(buf, size_t(f.gcount()));
  return h.value();
}

json load_manifest(const fs::path& run) {
  std::ifstream f(run / "manifest.json");
  if (!f) return json::object();
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError("corrupt manifest in " + run.string() + ": " + e.what());
  }
}

void save_manifest(const fs::path& run, const json& j) {
  std::ofstream f(run / "manifest.json");
  if (!f) throw DataError("cannot write manifest in " + run.string());
  f << j.dump(2) << "\n";
}

const json& manifest_section(const json& m, const char* key, const char* needed_by) {
  if (!m.contains(key))
    throw DataError(std::string("run manifest has no '") + key + "' record; run `lutnn " + key +
                    "` before `lutnn " + needed_by + "`");
  return m[key];
}

// Stage digests chain: each stage hashes its artifacts together with the
// previous stage's chain value, so any upstream edit invalidates downstream
// records.
uint64_t chain(uint64_t prev, std::initializer_list<uint64_t> parts) {
  Fnv1a h;
  h.update_pod(prev);
  for (uint64_t p : parts) h.update_pod(p);
  return h.value();
}

std::string hex64(uint64_t v) { return digest_hex(v); }

uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

uint64_t net_seed_of(const json& m) {
  if (m.contains("train") && m["train"].contains("seed"))
    return m["train"]["seed"].get<uint64_t>();
  return 1;
}

CodeMat random_codes(const std::vector<FeatureCodec>& codecs, int rows, uint64_t seed) {
  Rng rng(seed ^ 0x76656373ull);
  CodeMat m(rows, Eigen::Index(codecs.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = int32_t(rng.below(uint64_t(codecs[size_t(j)].spec.max_code()) + 1));
  return m;
}

struct CommonOpts {
  int threads = 0;
  bool deterministic = false;
  void apply() const {
    if (deterministic)
      set_thread_count(1);
    else if (threads > 0)
      set_thread_count(threads);
  }
};

// ---------------------------------------------------------------- train ----

struct TrainOpts {
  std::string config_path, dataset_spec, out_dir, data_dir;
  uint64_t seed = 1;
  bool seed_set = false;
  int epochs = -1;
  int subsample = 0, subsample_test = 0;
  bool no_learned_mapping = false, no_tree_skips = false, augment = false;
  CommonOpts common;
};

int cmd_train(const TrainOpts& o) {
  o.common.apply();
  TrainHyperparams hp;
  ModelConfig cfg = load_config(o.config_path, &hp);
  if (o.seed_set) hp.seed = o.seed;
  if (o.epochs >= 0) hp.epochs = o.epochs;
  validate_hyper(hp);

  Dataset ds = open_dataset(o.dataset_spec, o.data_dir, hp.seed);
  std::printf("dataset %s: %lld rows (%zu train / %zu test), %lld features, %d classes\n",
              ds.name.c_str(), (long long)ds.rows(), ds.train_rows.size(), ds.test_rows.size(),
              (long long)ds.feature_count(), ds.num_classes);
  if (ds.feature_count() != cfg.input_features)
    throw ConfigError("config expects " + std::to_string(cfg.input_features) +
                      " input features but dataset '" + ds.name + "' has " +
                      std::to_string(ds.feature_count()));

  PreparedData data = prepare_data(ds, cfg.input_bits, o.subsample, o.subsample_test, hp.seed);
  std::printf("prepared %lld train / %lld test rows at %d input bit(s)\n",
              (long long)data.train_codes.rows(), (long long)data.test_codes.rows(),
              cfg.input_bits);

  bool any_learned = false;
  for (uint8_t f : cfg.assemble_flags) any_learned = any_learned || !f;
  std::vector<Matrix> scores;
  if (any_learned && !o.no_learned_mapping && hp.pretrain_epochs > 0) {
    std::printf("dense pre-training (%d epochs) for mapping selection...\n", hp.pretrain_epochs);
    scores = dense_pretrain(cfg, data, hp);
  }

  Network net = build_network(cfg, hp.seed, !o.no_tree_skips);
  for (int l = 0; l < cfg.layer_count(); ++l)
    if (!scores.empty() && scores[size_t(l)].size() > 0)
      set_mapping(net, l, select_mapping(scores[size_t(l)], cfg.fan_ins[size_t(l)]));
  net.input_codecs = data.codecs;

  TrainResult result = train_sparse(net, data, hp, o.augment, [](const EpochMetrics& em) {
    std::printf("epoch %4d  loss %.5f  test acc %.4f\n", em.epoch, double(em.train_loss),
                double(em.test_accuracy));
    std::fflush(stdout);
  });

  fs::create_directories(o.out_dir);
  fs::path run(o.out_dir);
  save_checkpoint((run / "checkpoint.lnck").string(), net, hp);
  write_metrics_csv((run / "metrics.csv").string(), result.history);

  uint64_t ckpt_digest = file_digest((run / "checkpoint.lnck").string());
  json m = load_manifest(run);
  m["model"] = cfg.name;
  m["config_digest"] = hex64(config_digest(cfg));
  m["dataset"] = {{"spec", o.dataset_spec}, {"digest", hex64(ds.digest())}};
  m["train"] = {{"seed", hp.seed},
                {"epochs", hp.epochs},
                {"subsample", o.subsample},
                {"learned_mapping", !o.no_learned_mapping},
                {"tree_skips", !o.no_tree_skips},
                {"augment", o.augment},
                {"best_epoch", result.best_epoch},
                {"best_accuracy", result.best_accuracy},
                {"final_accuracy", result.final_accuracy},
                {"checkpoint_digest", hex64(ckpt_digest)},
                {"chain", hex64(chain(config_digest(cfg), {ds.digest(), ckpt_digest}))}};
  m.erase("compile");  // downstream records are stale now
  m.erase("verify");
  m.erase("emit");
  save_manifest(run, m);

  std::printf("final accuracy %.4f (best epoch %d); checkpoint %s\n",
              double(result.final_accuracy), result.best_epoch,
              (run / "checkpoint.lnck").string().c_str());
  return 0;
}

// -------------------------------------------------------------- compile ----

struct CompileOpts {
  std::string run_dir, policy = "every-layer";
  bool allow_large = false;
  CommonOpts common;
};

int cmd_compile(const CompileOpts& o) {
  o.common.apply();
  fs::path run(o.run_dir);
  json m = load_manifest(run);
  const json& tr = manifest_section(m, "train", "compile");
  uint64_t ckpt_digest = file_digest((run / "checkpoint.lnck").string());
  if (hex64(ckpt_digest) != tr.value("checkpoint_digest", std::string()))
    throw VerifyError("checkpoint in " + o.run_dir + " does not match its manifest record");

  Network net = load_checkpoint((run / "checkpoint.lnck").string());
  PipelinePolicy policy = parse_policy(o.policy);

  std::vector<TruthTable> tables = compile_network(net, o.allow_large);
  fs::create_directories(run / "tables");
  export_tables(tables, (run / "tables").string());

  LutNetlist nl = build_netlist(tables, net, policy);
  save_netlist(nl, (run / "netlist.lnet").string());

  Fnv1a th;
  for (const auto& t : tables) th.update_pod(t.digest());
  uint64_t tables_digest = th.value();
  uint64_t nl_digest = file_digest((run / "netlist.lnet").string());

  NetlistStats st = stats(nl);
  m["compile"] = {{"policy", policy.describe()},
                  {"tables", int(tables.size())},
                  {"tables_digest", hex64(tables_digest)},
                  {"netlist_digest", hex64(nl_digest)},
                  {"l_lut_count", st.l_lut_count},
                  {"table_bits", st.table_bits},
                  {"register_bits", st.register_bits},
                  {"comb_depth", st.comb_depth},
                  {"stage_count", st.stage_count},
                  {"chain", hex64(chain(parse_hex64(tr.value("chain", std::string("0"))),
                                        {tables_digest, nl_digest}))}};
  m.erase("verify");
  m.erase("emit");
  save_manifest(run, m);

  std::fputs(stats_text(st).c_str(), stdout);
  std::printf("wrote %zu tables and %s\n", tables.size(), (run / "netlist.lnet").string().c_str());
  return 0;
}

// --------------------------------------------------------------- verify ----

struct VerifyOpts {
  std::string run_dir, dataset_spec, data_dir;
  int samples = 1000;
  int max_rows = 0;  // cap on dataset rows checked (0 = all test rows)
  uint64_t seed = 1;
  CommonOpts common;
};

int cmd_verify(const VerifyOpts& o) {
  o.common.apply();
  fs::path run(o.run_dir);
  json m = load_manifest(run);
  const json& cp = manifest_section(m, "compile", "verify");
  if (hex64(file_digest((run / "netlist.lnet").string())) !=
      cp.value("netlist_digest", std::string()))
    throw VerifyError("netlist in " + o.run_dir + " does not match its manifest record");

  Network net = load_checkpoint((run / "checkpoint.lnck").string());
  FoldedNetwork folded = fold_network(net);
  std::vector<TruthTable> tables = import_tables((run / "tables").string());
  LutNetlist nl = load_netlist((run / "netlist.lnet").string(), std::move(tables));

  CodeMat codes;
  if (!o.dataset_spec.empty()) {
    Dataset ds = open_dataset(o.dataset_spec, o.data_dir, net_seed_of(m));
    Matrix test_rows(Eigen::Index(ds.test_rows.size()), ds.features.cols());
    for (size_t i = 0; i < ds.test_rows.size(); ++i)
      test_rows.row(Eigen::Index(i)) = ds.features.row(ds.test_rows[i]);
    CodeMat data_codes = encode_features(test_rows, net.input_codecs);
    if (o.max_rows > 0 && data_codes.rows() > o.max_rows)
      data_codes = data_codes.topRows(o.max_rows).eval();
    CodeMat rnd = random_codes(net.input_codecs, o.samples, o.seed);
    codes.resize(data_codes.rows() + rnd.rows(), data_codes.cols());
    codes << data_codes, rnd;
  } else {
    codes = random_codes(net.input_codecs, o.samples, o.seed);
  }

  CodeMat want = folded.eval_codes(codes);
  std::vector<int> in_row(size_t(codes.cols()));
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    for (Eigen::Index j = 0; j < codes.cols(); ++j) in_row[size_t(j)] = codes(i, j);
    std::vector<int> got = simulate(nl, in_row);
    for (Eigen::Index u = 0; u < want.cols(); ++u) {
      if (got[size_t(u)] != want(i, u)) {
        std::ostringstream os;
        os << "netlist mismatch at sample " << i << ", output unit " << u << ": netlist "
           << got[size_t(u)] << ", network " << want(i, u);
        throw VerifyError(os.str());
      }
    }
  }

  m["verify"] = {{"vectors", int(codes.rows())},
                 {"status", "bit-exact"},
                 {"chain", hex64(chain(parse_hex64(cp.value("chain", std::string("0"))),
                                       {uint64_t(codes.rows())}))}};
  save_manifest(run, m);
  std::printf("OK: %lld vectors bit-exact between netlist and network\n",
              (long long)codes.rows());
  return 0;
}

// ----------------------------------------------------------------- emit ----

struct EmitOpts {
  std::string run_dir, prefix;
  int vectors = 100;
  uint64_t seed = 1;
  CommonOpts common;
};

int cmd_emit(const EmitOpts& o) {
  o.common.apply();
  fs::path run(o.run_dir);
  json m = load_manifest(run);
  const json& cp = manifest_section(m, "compile", "emit");
  if (hex64(file_digest((run / "netlist.lnet").string())) !=
      cp.value("netlist_digest", std::string()))
    throw VerifyError("netlist in " + o.run_dir + " does not match its manifest record");

  std::vector<TruthTable> tables = import_tables((run / "tables").string());
  LutNetlist nl = load_netlist((run / "netlist.lnet").string(), std::move(tables));

  std::string prefix = o.prefix.empty() ? m.value("model", std::string("lutnn")) : o.prefix;
  for (char& c : prefix)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  if (prefix.empty() || std::isdigit(static_cast<unsigned char>(prefix[0])))
    prefix = "m" + prefix;

  RtlBundle bundle = emit_verilog(nl, prefix);
  fs::create_directories(run / "rtl");
  write_bundle(bundle, (run / "rtl").string());

  std::vector<std::vector<int>> inputs;
  Rng rng(o.seed ^ 0x676f6c64ull);
  for (int i = 0; i < o.vectors; ++i) {
    std::vector<int> row(size_t(nl.input_features));
    for (auto& v : row) v = int(rng.below(uint64_t(1) << nl.input_bits));
    inputs.push_back(std::move(row));
  }
  std::string golden = emit_golden_vectors(nl, inputs);
  std::ofstream gv(run / "rtl" / "golden.vec");
  if (!gv) throw DataError("cannot write golden vectors");
  gv << golden;
  gv.close();

  Fnv1a rh;
  for (const auto& f : bundle.layer_files) rh.update(f.content.data(), f.content.size());
  rh.update(bundle.top.content.data(), bundle.top.content.size());
  uint64_t rtl_digest = rh.value();
  m["emit"] = {{"prefix", prefix},
               {"vectors", o.vectors},
               {"rtl_digest", hex64(rtl_digest)},
               {"chain", hex64(chain(parse_hex64(cp.value("chain", std::string("0"))),
                                     {rtl_digest}))}};
  save_manifest(run, m);

  std::printf("wrote %zu layer files, %s_top.v and golden.vec under %s\n",
              bundle.layer_files.size(), prefix.c_str(), (run / "rtl").string().c_str());
  return 0;
}

// --------------------------------------------------------------- report ----

struct ReportOpts {
  std::vector<std::string> runs;
  std::string format = "text";
};

int cmd_report(const ReportOpts& o) {
  if (o.runs.empty()) throw ConfigError("report: give at least one run directory");
  struct Row {
    std::string run, model, policy;
    double accuracy = 0;
    int64_t l_luts = 0, table_bits = 0, register_bits = 0;
    int stages = 0;
    bool mapping = true, skips = true, augment = false;
  };
  std::vector<Row> rows;
  for (const auto& r : o.runs) {
    json m = load_manifest(fs::path(r));
    if (m.empty()) throw DataError("no manifest in " + r);
    Row row;
    row.run = r;
    row.model = m.value("model", std::string("?"));
    if (m.contains("train")) {
      row.accuracy = m["train"].value("final_accuracy", 0.0);
      row.mapping = m["train"].value("learned_mapping", true);
      row.skips = m["train"].value("tree_skips", true);
      row.augment = m["train"].value("augment", false);
    }
    if (m.contains("compile")) {
      row.policy = m["compile"].value("policy", std::string("?"));
      row.l_luts = m["compile"].value("l_lut_count", int64_t(0));
      row.table_bits = m["compile"].value("table_bits", int64_t(0));
      row.register_bits = m["compile"].value("register_bits", int64_t(0));
      row.stages = m["compile"].value("stage_count", 0);
    }
    rows.push_back(std::move(row));
  }

  if (o.format == "csv") {
    std::printf("run,model,accuracy,l_luts,table_bits,register_bits,stages,policy,mapping,skips,augment\n");
    for (const auto& r : rows)
      std::printf("%s,%s,%.4f,%lld,%lld,%lld,%d,%s,%d,%d,%d\n", r.run.c_str(), r.model.c_str(),
                  r.accuracy, (long long)r.l_luts, (long long)r.table_bits,
                  (long long)r.register_bits, r.stages, r.policy.c_str(), int(r.mapping),
                  int(r.skips), int(r.augment));
  } else if (o.format == "text") {
    std::printf("%-20s %-12s %9s %8s %12s %9s %6s %-12s %s\n", "run", "model", "accuracy",
                "l-luts", "table-bits", "reg-bits", "stages", "policy", "flags");
    for (const auto& r : rows) {
      std::string flags;
      flags += r.mapping ? "map" : "---";
      flags += r.skips ? ",skip" : ",----";
      if (r.augment) flags += ",aug";
      std::printf("%-20s %-12s %9.4f %8lld %12lld %9lld %6d %-12s %s\n", r.run.c_str(),
                  r.model.c_str(), r.accuracy, (long long)r.l_luts, (long long)r.table_bits,
                  (long long)r.register_bits, r.stages, r.policy.c_str(), flags.c_str());
    }
  } else {
    throw ConfigError("report: format must be 'text' or 'csv'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"table-network trainer/compiler"};
  app.require_subcommand(1);

  TrainOpts t;
  CompileOpts c;
  VerifyOpts v;
  EmitOpts e;
  ReportOpts r;

  auto add_common = [](CLI::App* sub, CommonOpts& co) {
    sub->add_option("--threads", co.threads, "worker threads (default: hardware)");
    sub->add_flag("--deterministic", co.deterministic, "single-threaded, reproducible output");
  };

  CLI::App* st = app.add_subcommand("train", "train a model and write a run directory");
  st->add_option("--config", t.config_path, "model config JSON")->required();
  st->add_option("--dataset", t.dataset_spec,
                 "dataset spec: parity:F:K:ROWS | planted:F:ROWS | identity:ROWS:BITS | "
                 "csv:FILE:SCHEMA | mnist:DIR")
      ->required();
  st->add_option("--out", t.out_dir, "run directory to create")->required();
  st->add_option("--seed", t.seed, "override the config seed")->each([&](const std::string&) {
    t.seed_set = true;
  });
  st->add_option("--epochs", t.epochs, "override trained epochs");
  st->add_option("--subsample", t.subsample, "cap training rows (0 = all)");
  st->add_option("--subsample-test", t.subsample_test, "cap test rows (0 = all)");
  st->add_option("--data-dir", t.data_dir, "base directory for relative dataset paths");
  st->add_flag("--no-learned-mapping", t.no_learned_mapping,
               "ablation: keep seeded random input mappings");
  st->add_flag("--no-tree-skips", t.no_tree_skips, "ablation: drop unit output skip paths");
  st->add_flag("--augment", t.augment, "train with rotation/translation augmentation (images)");
  add_common(st, t.common);

  CLI::App* sc = app.add_subcommand("compile", "fold a checkpoint into truth tables + netlist");
  sc->add_option("--run", c.run_dir, "run directory from `lutnn train`")->required();
  sc->add_option("--policy", c.policy, "register policy: every-layer or every-<k>");
  sc->add_flag("--allow-large-tables", c.allow_large, "permit tables beyond 2^24 entries");
  add_common(sc, c.common);

  CLI::App* sv = app.add_subcommand("verify", "prove netlist/network agreement vector by vector");
  sv->add_option("--run", v.run_dir, "run directory with a compiled netlist")->required();
  sv->add_option("--dataset", v.dataset_spec, "also check every test row of this dataset");
  sv->add_option("--data-dir", v.data_dir, "base directory for relative dataset paths");
  sv->add_option("--samples", v.samples, "random probe vectors (default 1000)");
  sv->add_option("--max-rows", v.max_rows, "cap dataset rows checked (0 = all)");
  sv->add_option("--seed", v.seed, "probe vector seed");
  add_common(sv, v.common);

  CLI::App* se = app.add_subcommand("emit", "emit Verilog and golden vectors for a netlist");
  se->add_option("--run", e.run_dir, "run directory with a compiled netlist")->required();
  se->add_option("--prefix", e.prefix, "module name prefix (default: model name)");
  se->add_option("--vectors", e.vectors, "golden vector count (default 100)");
  se->add_option("--seed", e.seed, "golden vector seed");
  add_common(se, e.common);

  CLI::App* sr = app.add_subcommand("report", "tabulate one or more run directories");
  sr->add_option("runs", r.runs, "run directories")->required();
  sr->add_option("--format", r.format, "text or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (st->parsed()) return cmd_train(t);
    if (sc->parsed()) return cmd_compile(c);
    if (sv->parsed()) return cmd_verify(v);
    if (se->parsed()) return cmd_emit(e);
    if (sr->parsed()) return cmd_report(r);
    return 2;
  } catch (const ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const DataError& ex) {
    std::fprintf(stderr, "data error: %s\n", ex.what());
    return 3;
  } catch (const TrainError& ex) {
    std::fprintf(stderr, "training error: %s\n", ex.what());
    return 4;
  } catch (const VerifyError& ex) {
    std::fprintf(stderr, "verification error: %s\n", ex.what());
    return 5;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
}
