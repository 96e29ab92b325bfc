// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lutnn/tensor.hpp"

namespace lutnn {

struct Dataset {
  std::string name;
  Matrix features;  // rows x features, real-valued
  std::vector<int> labels;
  std::vector<int> train_rows, test_rows;
  int num_classes = 0;
  bool image = false;  // enables augmentation
  int img_h = 0, img_w = 0;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index feature_count() const { return features.cols(); }
  uint64_t digest() const;
};

// IDX (big-endian) pair: 3-d byte tensor of images plus 1-d labels. All rows
// land in the train split; pair with merge_train_test for a full dataset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// a's rows become the train split, b's the test split. Feature counts and
// class counts must agree.
Dataset merge_train_test(const Dataset& train, const Dataset& test);

// Schema-driven CSV ingestion. The schema (JSON) names the label column and
// declares each feature column:
//   {"name": ..., "kind": "numeric"}                      one real feature
//   {"name": ..., "kind": "bit"}                          one 0/1 feature
//   {"name": ..., "kind": "categorical", "values": [...]} one-hot, |values| bits
//   {"name": ..., "kind": "bits", "bits": n,
//    "min": a, "max": b}                                  n-bit binary expansion
// "label_values" maps string labels to class ids; otherwise labels parse as
// integers. Column order in the schema is the feature order.
Dataset load_csv(const std::string& csv_path, const std::string& schema_json);
Dataset load_csv_file(const std::string& csv_path, const std::string& schema_path);

// Reassigns the splits: seeded shuffle, first 80% train, rest test.
void split_80_20(Dataset& ds, uint64_t seed);

// Synthetic tasks for property tests. Split is 80/20 by seeded shuffle.
// parity: uniform random bits, label = XOR of features [0, k).
Dataset synthetic_parity(int features, int k, int rows, uint64_t seed);
// planted relevance: uniform features, label = [x2 + x5 > 1]; only features
// 2 and 5 carry signal.
Dataset synthetic_planted(int features, int rows, uint64_t seed);
// identity: one uniform feature, label = its bits-bit code.
Dataset synthetic_identity(int rows, int bits, uint64_t seed);

}  // namespace lutnn
