// SPDX-License-Identifier: Apache-2.0
#include "lutnn/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lutnn/digest.hpp"
#include "lutnn/errors.hpp"
#include "lutnn/quant.hpp"

using nlohmann::json;

namespace lutnn {

uint64_t Dataset::digest() const {
  Fnv1a h;
  h.update(name);
  h.update_pod(features.rows());
  h.update_pod(features.cols());
  h.update(features.data(), size_t(features.size()) * sizeof(float));
  for (int l : labels) h.update_pod(l);
  for (int r : train_rows) h.update_pod(r);
  for (int r : test_rows) h.update_pod(r);
  return h.value();
}

namespace {

uint32_t read_be32(std::ifstream& in, const std::string& path, int64_t offset) {
  uint8_t b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw DataError(path + ": truncated at offset " + std::to_string(offset));
  return uint32_t(b[0]) << 24 | uint32_t(b[1]) << 16 | uint32_t(b[2]) << 8 | uint32_t(b[3]);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"')
        quoted = false;
      else
        cur.push_back(c);
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

float parse_float_cell(const std::string& cell, const std::string& col, size_t row) {
  try {
    size_t pos = 0;
    float v = std::stof(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError("csv row " + std::to_string(row) + ", column '" + col +
                    "': non-numeric value '" + cell + "' without categorical declaration");
  }
}

}  // namespace

void split_80_20(Dataset& ds, uint64_t seed) {
  std::vector<int> order(static_cast<size_t>(ds.rows()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  Rng rng(seed ^ 0x5eed5eed5eed5eedull);
  rng.shuffle(order);
  size_t cut = order.size() - order.size() / 5;
  ds.train_rows.assign(order.begin(), order.begin() + long(cut));
  ds.test_rows.assign(order.begin() + long(cut), order.end());
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError("cannot open " + images_path);
  uint32_t magic = read_be32(img, images_path, 0);
  if (magic != 0x00000803)
    throw DataError(images_path + ": bad magic (expected 0x00000803 image file)");
  uint32_t n = read_be32(img, images_path, 4);
  uint32_t h = read_be32(img, images_path, 8);
  uint32_t w = read_be32(img, images_path, 12);

  std::vector<uint8_t> pixels(size_t(n) * h * w);
  if (!img.read(reinterpret_cast<char*>(pixels.data()), std::streamsize(pixels.size())))
    throw DataError(images_path + ": truncated at offset " +
                    std::to_string(16 + img.gcount()));

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError("cannot open " + labels_path);
  uint32_t lmagic = read_be32(lab, labels_path, 0);
  if (lmagic != 0x00000801)
    throw DataError(labels_path + ": bad magic (expected 0x00000801 label file)");
  uint32_t ln = read_be32(lab, labels_path, 4);
  if (ln != n)
    throw DataError(labels_path + ": " + std::to_string(ln) + " labels for " +
                    std::to_string(n) + " images");
  std::vector<uint8_t> lbytes(ln);
  if (!lab.read(reinterpret_cast<char*>(lbytes.data()), std::streamsize(lbytes.size())))
    throw DataError(labels_path + ": truncated at offset " + std::to_string(8 + lab.gcount()));

  Dataset ds;
  ds.name = "idx";
  ds.image = true;
  ds.img_h = int(h);
  ds.img_w = int(w);
  ds.features.resize(Eigen::Index(n), Eigen::Index(h * w));
  for (size_t i = 0; i < pixels.size(); ++i) ds.features.data()[i] = float(pixels[i]);
  ds.labels.assign(lbytes.begin(), lbytes.end());
  ds.num_classes = 10;
  ds.train_rows.resize(n);
  for (uint32_t i = 0; i < n; ++i) ds.train_rows[i] = int(i);
  return ds;
}

Dataset merge_train_test(const Dataset& train, const Dataset& test) {
  if (train.feature_count() != test.feature_count())
    throw DataError("merge_train_test: feature counts differ");
  Dataset ds;
  ds.name = train.name;
  ds.image = train.image;
  ds.img_h = train.img_h;
  ds.img_w = train.img_w;
  ds.num_classes = std::max(train.num_classes, test.num_classes);
  ds.features.resize(train.rows() + test.rows(), train.feature_count());
  ds.features.topRows(train.rows()) = train.features;
  ds.features.bottomRows(test.rows()) = test.features;
  ds.labels = train.labels;
  ds.labels.insert(ds.labels.end(), test.labels.begin(), test.labels.end());
  for (int i = 0; i < int(train.rows()); ++i) ds.train_rows.push_back(i);
  for (int i = 0; i < int(test.rows()); ++i) ds.test_rows.push_back(int(train.rows()) + i);
  return ds;
}

Dataset load_csv(const std::string& csv_path, const std::string& schema_json) {
  json schema;
  try {
    schema = json::parse(schema_json);
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: invalid JSON: ") + e.what());
  }
  if (!schema.contains("label")) throw DataError("schema: missing 'label'");
  std::string label_col = schema["label"].get<std::string>();
  std::vector<std::string> label_values;
  if (schema.contains("label_values"))
    for (const auto& v : schema["label_values"]) label_values.push_back(v.get<std::string>());
  if (!schema.contains("columns") || !schema["columns"].is_array() || schema["columns"].empty())
    throw DataError("schema: missing 'columns' array");

  struct Column {
    std::string name;
    enum { Numeric, Bit, Categorical, Bits } kind;
    std::vector<std::string> values;
    int bits = 0;
    float lo = 0.0f, hi = 1.0f;
    int csv_index = -1;
    int out_offset = 0;
    int out_width = 1;
  };
  std::vector<Column> cols;
  int total_features = 0;
  for (const auto& jc : schema["columns"]) {
    Column c;
    c.name = jc.at("name").get<std::string>();
    std::string kind = jc.at("kind").get<std::string>();
    if (kind == "numeric") {
      c.kind = Column::Numeric;
    } else if (kind == "bit") {
      c.kind = Column::Bit;
    } else if (kind == "categorical") {
      c.kind = Column::Categorical;
      for (const auto& v : jc.at("values")) c.values.push_back(v.get<std::string>());
      if (c.values.empty()) throw DataError("schema: categorical '" + c.name + "' has no values");
      c.out_width = int(c.values.size());
    } else if (kind == "bits") {
      c.kind = Column::Bits;
      c.bits = jc.at("bits").get<int>();
      if (c.bits < 1 || c.bits > 24) throw DataError("schema: '" + c.name + "': bad bits");
      c.lo = jc.value("min", 0.0f);
      c.hi = jc.at("max").get<float>();
      if (!(c.hi > c.lo)) throw DataError("schema: '" + c.name + "': max must exceed min");
      c.out_width = c.bits;
    } else {
      throw DataError("schema: unknown kind '" + kind + "' for column '" + c.name + "'");
    }
    c.out_offset = total_features;
    total_features += c.out_width;
    cols.push_back(std::move(c));
  }

  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv_path + ": missing header row");
  std::vector<std::string> header = split_csv_line(line);
  auto find_col = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return int(i);
    throw DataError(csv_path + ": missing column '" + name + "'");
  };
  int label_index = find_col(label_col);
  for (auto& c : cols) c.csv_index = find_col(c.name);

  std::vector<float> values;
  std::vector<int> labels;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(csv_path + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    size_t base = values.size();
    values.resize(base + size_t(total_features), 0.0f);
    for (const auto& c : cols) {
      const std::string& cell = cells[size_t(c.csv_index)];
      switch (c.kind) {
        case Column::Numeric:
          values[base + size_t(c.out_offset)] = parse_float_cell(cell, c.name, row);
          break;
        case Column::Bit: {
          float v = parse_float_cell(cell, c.name, row);
          if (v != 0.0f && v != 1.0f)
            throw DataError("csv row " + std::to_string(row) + ", column '" + c.name +
                            "': expected 0/1, got '" + cell + "'");
          values[base + size_t(c.out_offset)] = v;
          break;
        }
        case Column::Categorical: {
          auto it = std::find(c.values.begin(), c.values.end(), cell);
          if (it == c.values.end())
            throw DataError("csv row " + std::to_string(row) + ", column '" + c.name +
                            "': unknown category '" + cell + "'");
          values[base + size_t(c.out_offset) + size_t(it - c.values.begin())] = 1.0f;
          break;
        }
        case Column::Bits: {
          float v = parse_float_cell(cell, c.name, row);
          float unit = (v - c.lo) / (c.hi - c.lo);
          unit = std::min(1.0f, std::max(0.0f, unit));
          int code = int(std::floor(unit * float((1 << c.bits) - 1) + 0.5f));
          for (int bit = 0; bit < c.bits; ++bit)
            values[base + size_t(c.out_offset + bit)] = float((code >> bit) & 1);
          break;
        }
      }
    }
    const std::string& lcell = cells[size_t(label_index)];
    if (!label_values.empty()) {
      auto it = std::find(label_values.begin(), label_values.end(), lcell);
      if (it == label_values.end())
        throw DataError("csv row " + std::to_string(row) + ": unknown label '" + lcell + "'");
      labels.push_back(int(it - label_values.begin()));
    } else {
      float v = parse_float_cell(lcell, label_col, row);
      int l = int(v);
      if (float(l) != v || l < 0)
        throw DataError("csv row " + std::to_string(row) + ": label '" + lcell +
                        "' is not a non-negative integer");
      labels.push_back(l);
    }
  }
  if (labels.empty()) throw DataError(csv_path + ": no data rows");

  Dataset ds;
  ds.name = csv_path;
  ds.features.resize(Eigen::Index(labels.size()), total_features);
  std::copy(values.begin(), values.end(), ds.features.data());
  ds.labels = std::move(labels);
  ds.num_classes = label_values.empty()
                       ? *std::max_element(ds.labels.begin(), ds.labels.end()) + 1
                       : int(label_values.size());
  for (int i = 0; i < int(ds.rows()); ++i) ds.train_rows.push_back(i);
  return ds;
}

Dataset load_csv_file(const std::string& csv_path, const std::string& schema_path) {
  std::ifstream in(schema_path);
  if (!in) throw DataError("cannot open schema " + schema_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_csv(csv_path, ss.str());
}

Dataset synthetic_parity(int features, int k, int rows, uint64_t seed) {
  if (k < 1 || k > features) throw DataError("synthetic_parity: k outside [1, features]");
  Rng rng(seed);
  Dataset ds;
  ds.name = "parity";
  ds.features.resize(rows, features);
  ds.labels.resize(size_t(rows));
  for (int r = 0; r < rows; ++r) {
    int x = 0;
    for (int f = 0; f < features; ++f) {
      int bit = int(rng.below(2));
      ds.features(r, f) = float(bit);
      if (f < k) x ^= bit;
    }
    ds.labels[size_t(r)] = x;
  }
  ds.num_classes = 2;
  split_80_20(ds, seed);
  return ds;
}

Dataset synthetic_planted(int features, int rows, uint64_t seed) {
  if (features < 6) throw DataError("synthetic_planted: needs >= 6 features");
  Rng rng(seed);
  Dataset ds;
  ds.name = "planted";
  ds.features.resize(rows, features);
  ds.labels.resize(size_t(rows));
  for (int r = 0; r < rows; ++r) {
    for (int f = 0; f < features; ++f) ds.features(r, f) = rng.uniform(0.0f, 1.0f);
    ds.labels[size_t(r)] = ds.features(r, 2) + ds.features(r, 5) > 1.0f ? 1 : 0;
  }
  ds.num_classes = 2;
  split_80_20(ds, seed);
  return ds;
}

Dataset synthetic_identity(int rows, int bits, uint64_t seed) {
  Rng rng(seed);
  QuantSpec q{bits, 1.0f};
  Dataset ds;
  ds.name = "identity";
  ds.features.resize(rows, 1);
  ds.labels.resize(size_t(rows));
  for (int r = 0; r < rows; ++r) {
    float x = rng.uniform(0.0f, 1.0f);
    ds.features(r, 0) = x;
    ds.labels[size_t(r)] = quantize_code(x, q);
  }
  ds.num_classes = q.level_count();
  split_80_20(ds, seed);
  return ds;
}

}  // namespace lutnn
