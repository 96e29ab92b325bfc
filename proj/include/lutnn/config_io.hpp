// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "lutnn/model.hpp"
#include "lutnn/trainer.hpp"

namespace lutnn {

// Config files are JSON. Required: input_features, layer_widths,
// assemble_flags, fan_ins, layer_bits. Optional: name, input_bits,
// subnet_depth, subnet_width, skip_step, and a "train" block whose keys each
// override one TrainHyperparams field. Unknown keys are rejected so typos
// fail loudly. All parse problems throw ConfigError naming the key.
ModelConfig config_from_json(const std::string& text, TrainHyperparams* hp = nullptr);
std::string config_to_json(const ModelConfig& cfg, const TrainHyperparams& hp);

ModelConfig load_config(const std::string& path, TrainHyperparams* hp = nullptr);

// Digest of the canonical serialized form; run manifests chain on it.
uint64_t config_digest(const ModelConfig& cfg);

}  // namespace lutnn
