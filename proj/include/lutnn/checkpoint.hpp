// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "lutnn/model.hpp"
#include "lutnn/trainer.hpp"

namespace lutnn {

// Binary model snapshot: magic/version header, payload digest, embedded
// config JSON (with hyperparameters), input codecs, per-unit mappings,
// every parameter, and the batch-norm running moments. The digest covers the
// whole payload; a mismatch (corruption, tampering) refuses to load.
void save_checkpoint(const std::string& path, Network& net, const TrainHyperparams& hp);

Network load_checkpoint(const std::string& path, TrainHyperparams* hp = nullptr);

}  // namespace lutnn
