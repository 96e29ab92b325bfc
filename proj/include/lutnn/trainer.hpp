// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "lutnn/data_io.hpp"
#include "lutnn/model.hpp"

namespace lutnn {

struct TrainHyperparams {
  float learning_rate = 1e-2f;
  float weight_decay = 1e-4f;
  float group_reg = 1e-4f;
  int epochs = 100;
  int batch_size = 256;
  int restart_period = 50;  // T_0, in epochs
  int restart_mult = 2;
  uint64_t seed = 1;

  // Dense pre-training budget; rows 0 = full train split.
  int pretrain_epochs = 10;
  int pretrain_rows = 0;
  // Per-epoch metric evaluates at most this many test rows (0 = all); the
  // final reported accuracy always uses the full test split.
  int metric_test_rows = 20000;
  float eta_min = 0.0f;
};

void validate_hyper(const TrainHyperparams& hp);

// Cosine annealing with warm restarts, t in (fractional) epoch units. Periods
// run T_0, T_0*mult, ...; eta resets to learning_rate exactly at boundaries.
double lr_at(const TrainHyperparams& hp, double t);

// Adam moments with decoupled weight decay: decay scales the weight by
// (1 - lr*wd) before the moment update, so zero-gradient steps still decay.
struct AdamWState {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  int64_t step = 0;
  struct Moments {
    Matrix m, v;
  };
  std::unordered_map<const Parameter*, Moments> moments;
};

void optimizer_step(const std::vector<Parameter*>& params, AdamWState& st,
                    const TrainHyperparams& hp, double t);

// Dataset conditioned for one run: codecs fitted on the (possibly subsampled)
// train split only. Raw train rows are retained for image augmentation.
struct PreparedData {
  std::vector<FeatureCodec> codecs;
  CodeMat train_codes, test_codes;
  std::vector<int> train_labels, test_labels;
  Matrix train_raw;
  bool image = false;
  int img_h = 0, img_w = 0;
  int num_classes = 0;
};

PreparedData prepare_data(const Dataset& ds, int input_bits, int subsample_train,
                          int subsample_test, uint64_t seed);

// Quantizer scale init: 99.9th percentile of the magnitudes entering each
// layer's quantizer on one batch (post-activation at group ends).
void calibrate_scales(Network& net, const CodeMat& batch_codes);

// Dense proxy phase: learned-mapping layers swapped for dense affine+norm
// (assembled layers keep their sub-networks), no quantization anywhere, loss
// extended by group_reg * sum|W| over proxy weights (scalar per-input groups).
// Returns |W| per learned layer ([w_l, prev], empty matrix for assembled).
std::vector<Matrix> dense_pretrain(const ModelConfig& cfg, const PreparedData& data,
                                   const TrainHyperparams& hp);

// Top-F scores per unit; ties to the lower index; result sorted ascending.
std::vector<std::vector<int>> select_mapping(const Matrix& scores, int fan_in);

struct EpochMetrics {
  int epoch = 0;
  float train_loss = 0.0f;
  float test_accuracy = 0.0f;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  float best_accuracy = 0.0f;
  int best_epoch = -1;
  float final_accuracy = 0.0f;  // full test split, best weights restored
};

// QAT loop over a network whose mappings are final. Keeps the best-accuracy
// weights (earliest epoch on ties) and restores them before returning.
// Divergence (non-finite loss) throws TrainError with seed and epoch.
// on_epoch (optional) fires after each epoch's metrics are known.
using EpochCallback = std::function<void(const EpochMetrics&)>;
TrainResult train_sparse(Network& net, const PreparedData& data, const TrainHyperparams& hp,
                         bool augment_train = false, const EpochCallback& on_epoch = {});

float evaluate(const Network& net, const CodeMat& codes, const std::vector<int>& labels);

// Random rotation (<= 10 degrees) and translation (<= 2 px), nearest-neighbor,
// zero fill, applied to raw pixel rows before quantization.
Matrix augment(const Matrix& batch, int img_h, int img_w, Rng& rng);
Matrix augment_one(const Matrix& image_row, int img_h, int img_w, float angle_deg, float dy,
                   float dx);

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history);

}  // namespace lutnn
