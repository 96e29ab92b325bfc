// SPDX-License-Identifier: Apache-2.0
#include "lutnn/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"

namespace lutnn {

using nlohmann::json;

namespace {
int require_int(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  if (!j[key].is_number_integer())
    throw ConfigError(std::string("config: '") + key + "' must be an integer");
  return j[key].get<int>();
}

int optional_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ConfigError(std::string("config: '") + key + "' must be an integer");
  return j[key].get<int>();
}

float optional_float(const json& j, const char* key, float fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j[key].get<float>();
}

std::vector<int> require_int_array(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  if (!j[key].is_array())
    throw ConfigError(std::string("config: '") + key + "' must be an array");
  std::vector<int> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer() && !v.is_boolean())
      throw ConfigError(std::string("config: '") + key + "' entries must be integers");
    out.push_back(v.is_boolean() ? int(v.get<bool>()) : v.get<int>());
  }
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
}
}  // namespace

ModelConfig config_from_json(const std::string& text, TrainHyperparams* hp) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j,
                 {"name", "input_features", "input_bits", "layer_widths", "assemble_flags",
                  "fan_ins", "layer_bits", "subnet_depth", "subnet_width", "skip_step", "train"},
                 "the top level");

  ModelConfig cfg;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("config: 'name' must be a string");
    cfg.name = j["name"].get<std::string>();
  }
  cfg.input_features = require_int(j, "input_features");
  cfg.input_bits = optional_int(j, "input_bits", 1);
  cfg.layer_widths = require_int_array(j, "layer_widths");
  for (int f : require_int_array(j, "assemble_flags"))
    cfg.assemble_flags.push_back(uint8_t(f != 0));
  cfg.fan_ins = require_int_array(j, "fan_ins");
  cfg.layer_bits = require_int_array(j, "layer_bits");
  cfg.subnet_depth = optional_int(j, "subnet_depth", 2);
  cfg.subnet_width = optional_int(j, "subnet_width", 16);
  cfg.skip_step = optional_int(j, "skip_step", 2);

  if (hp && j.contains("train")) {
    const json& t = j["train"];
    if (!t.is_object()) throw ConfigError("config: 'train' must be an object");
    reject_unknown(t,
                   {"learning_rate", "weight_decay", "group_reg", "epochs", "batch_size",
                    "restart_period", "restart_mult", "seed", "pretrain_epochs", "pretrain_rows",
                    "metric_test_rows", "eta_min"},
                   "'train'");
    hp->learning_rate = optional_float(t, "learning_rate", hp->learning_rate);
    hp->weight_decay = optional_float(t, "weight_decay", hp->weight_decay);
    hp->group_reg = optional_float(t, "group_reg", hp->group_reg);
    hp->epochs = optional_int(t, "epochs", hp->epochs);
    hp->batch_size = optional_int(t, "batch_size", hp->batch_size);
    hp->restart_period = optional_int(t, "restart_period", hp->restart_period);
    hp->restart_mult = optional_int(t, "restart_mult", hp->restart_mult);
    hp->seed = uint64_t(optional_int(t, "seed", int(hp->seed)));
    hp->pretrain_epochs = optional_int(t, "pretrain_epochs", hp->pretrain_epochs);
    hp->pretrain_rows = optional_int(t, "pretrain_rows", hp->pretrain_rows);
    hp->metric_test_rows = optional_int(t, "metric_test_rows", hp->metric_test_rows);
    hp->eta_min = optional_float(t, "eta_min", hp->eta_min);
  }

  validate_config(cfg);
  return cfg;
}

std::string config_to_json(const ModelConfig& cfg, const TrainHyperparams& hp) {
  json j;
  j["name"] = cfg.name;
  j["input_features"] = cfg.input_features;
  j["input_bits"] = cfg.input_bits;
  j["layer_widths"] = cfg.layer_widths;
  json flags = json::array();
  for (uint8_t f : cfg.assemble_flags) flags.push_back(int(f));
  j["assemble_flags"] = flags;
  j["fan_ins"] = cfg.fan_ins;
  j["layer_bits"] = cfg.layer_bits;
  j["subnet_depth"] = cfg.subnet_depth;
  j["subnet_width"] = cfg.subnet_width;
  j["skip_step"] = cfg.skip_step;
  j["train"] = {{"learning_rate", hp.learning_rate},
                {"weight_decay", hp.weight_decay},
                {"group_reg", hp.group_reg},
                {"epochs", hp.epochs},
                {"batch_size", hp.batch_size},
                {"restart_period", hp.restart_period},
                {"restart_mult", hp.restart_mult},
                {"seed", hp.seed},
                {"pretrain_epochs", hp.pretrain_epochs},
                {"pretrain_rows", hp.pretrain_rows},
                {"metric_test_rows", hp.metric_test_rows},
                {"eta_min", hp.eta_min}};
  return j.dump(2) + "\n";
}

ModelConfig load_config(const std::string& path, TrainHyperparams* hp) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return config_from_json(ss.str(), hp);
}

uint64_t config_digest(const ModelConfig& cfg) {
  Fnv1a h;
  auto add_int = [&](int v) { h.update_pod(int32_t(v)); };
  h.update(cfg.name.data(), cfg.name.size());
  add_int(cfg.input_features);
  add_int(cfg.input_bits);
  add_int(cfg.layer_count());
  for (int v : cfg.layer_widths) add_int(v);
  for (uint8_t f : cfg.assemble_flags) add_int(f);
  for (int v : cfg.fan_ins) add_int(v);
  for (int v : cfg.layer_bits) add_int(v);
  add_int(cfg.subnet_depth);
  add_int(cfg.subnet_width);
  add_int(cfg.skip_step);
  return h.value();
}

}  // namespace lutnn
