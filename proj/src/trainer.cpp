// SPDX-License-Identifier: Apache-2.0
#include "lutnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lutnn/errors.hpp"

namespace lutnn {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(static_cast<size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// Deterministic subsample: shuffle a copy, keep the first n, restore order.
std::vector<int> pick_rows(std::vector<int> ids, int n, uint64_t seed) {
  if (n <= 0 || n >= int(ids.size())) return ids;
  Rng rng(seed);
  rng.shuffle(ids);
  ids.resize(size_t(n));
  std::sort(ids.begin(), ids.end());
  return ids;
}

CodeMat take_code_rows(const CodeMat& m, const std::vector<int>& ids) {
  CodeMat out(Eigen::Index(ids.size()), m.cols());
  for (size_t i = 0; i < ids.size(); ++i) out.row(Eigen::Index(i)) = m.row(ids[i]);
  return out;
}

Matrix take_rows(const Matrix& m, const std::vector<int>& ids) {
  Matrix out(Eigen::Index(ids.size()), m.cols());
  for (size_t i = 0; i < ids.size(); ++i) out.row(Eigen::Index(i)) = m.row(ids[i]);
  return out;
}

float percentile999(const Matrix& m) {
  std::vector<float> mags(size_t(m.size()));
  const float* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) mags[size_t(i)] = std::fabs(p[i]);
  size_t k = size_t(std::floor(0.999 * double(mags.size() - 1)));
  std::nth_element(mags.begin(), mags.begin() + long(k), mags.end());
  return mags[k];
}

// Mirrored logits for single-output heads: [margin - y, y]. argmax matches
// y >= 0.5 * margin, i.e. output code >= half the code range, so training,
// evaluation, and the compiled tables share one decision rule. The margin is
// the current quantizer scale, treated as a constant within the step.
int binary_logits(Tape& t, int y, float margin) {
  Matrix wm(2, 1);
  wm << -1.0f, 1.0f;
  Matrix bm(1, 2);
  bm << margin, 0.0f;
  return affine(t, y, t.leaf(std::move(wm)), t.leaf(std::move(bm)));
}

// Everything that defines the trained function: parameter values plus batch
// norm running moments. Mappings and codecs are fixed during training.
struct NetState {
  std::vector<Matrix> values;
  std::vector<Matrix> moments;
};

NetState snapshot_state(Network& net) {
  NetState s;
  for (Parameter* p : net.parameters()) s.values.push_back(p->value);
  for (auto& layer : net.layers)
    for (auto& unit : layer.units)
      for (auto& bn : unit.bn) {
        s.moments.push_back(bn.running_mean);
        s.moments.push_back(bn.running_var);
      }
  return s;
}

void restore_state(Network& net, const NetState& s) {
  auto params = net.parameters();
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = s.values[i];
  size_t k = 0;
  for (auto& layer : net.layers)
    for (auto& unit : layer.units)
      for (auto& bn : unit.bn) {
        bn.running_mean = s.moments[k++];
        bn.running_var = s.moments[k++];
      }
}

// Batch boundaries over n rows; a trailing singleton is merged into the
// previous batch because batch norm needs at least two samples.
std::vector<std::pair<int, int>> batch_spans(int n, int batch) {
  std::vector<std::pair<int, int>> spans;
  for (int off = 0; off < n; off += batch) spans.emplace_back(off, std::min(off + batch, n));
  if (spans.size() > 1 && spans.back().second - spans.back().first < 2) {
    spans[spans.size() - 2].second = spans.back().second;
    spans.pop_back();
  }
  return spans;
}

void check_class_shape(const ModelConfig& cfg, int num_classes) {
  int outs = cfg.output_units();
  int need = outs == 1 ? 2 : outs;
  if (num_classes != need) {
    std::ostringstream os;
    os << "model '" << cfg.name << "' has " << outs << " output unit(s) (expects " << need
       << " classes) but the dataset has " << num_classes;
    throw ConfigError(os.str());
  }
}
}  // namespace

void validate_hyper(const TrainHyperparams& hp) {
  if (!(hp.learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (hp.weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
  if (hp.group_reg < 0) throw ConfigError("group_reg must be non-negative");
  if (hp.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (hp.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (hp.restart_period < 1) throw ConfigError("restart_period must be at least 1");
  if (hp.restart_mult < 1) throw ConfigError("restart_mult must be at least 1");
  if (hp.pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be non-negative");
  if (hp.eta_min < 0 || hp.eta_min > hp.learning_rate)
    throw ConfigError("eta_min must lie in [0, learning_rate]");
}

double lr_at(const TrainHyperparams& hp, double t) {
  double t_cur = std::max(0.0, t);
  double period = double(hp.restart_period);
  while (t_cur >= period) {
    t_cur -= period;
    period *= double(hp.restart_mult);
    if (hp.restart_mult == 1 && t_cur >= period) {
      // constant periods: jump instead of looping epoch by epoch
      t_cur = std::fmod(t_cur, period);
      break;
    }
  }
  double span = double(hp.learning_rate) - double(hp.eta_min);
  return double(hp.eta_min) + 0.5 * span * (1.0 + std::cos(kPi * t_cur / period));
}

void optimizer_step(const std::vector<Parameter*>& params, AdamWState& st,
                    const TrainHyperparams& hp, double t) {
  const double lr = lr_at(hp, t);
  st.step += 1;
  const double bc1 = 1.0 - std::pow(double(st.beta1), double(st.step));
  const double bc2 = 1.0 - std::pow(double(st.beta2), double(st.step));
  for (Parameter* p : params) {
    if (p->decay && hp.weight_decay > 0)
      p->value *= float(1.0 - lr * double(hp.weight_decay));
    auto& mo = st.moments[p];
    if (mo.m.size() == 0) {
      mo.m = Matrix::Zero(p->grad.rows(), p->grad.cols());
      mo.v = Matrix::Zero(p->grad.rows(), p->grad.cols());
    }
    mo.m = st.beta1 * mo.m + (1.0f - st.beta1) * p->grad;
    mo.v = (st.beta2 * mo.v.array() + (1.0f - st.beta2) * p->grad.array().square()).matrix();
    Matrix denom = ((mo.v.array() / float(bc2)).sqrt() + st.eps).matrix();
    p->value -= float(lr) * ((mo.m.array() / float(bc1)) / denom.array()).matrix();
  }
}

PreparedData prepare_data(const Dataset& ds, int input_bits, int subsample_train,
                          int subsample_test, uint64_t seed) {
  if (ds.train_rows.empty()) throw DataError("dataset '" + ds.name + "' has no training rows");
  std::vector<int> train_ids =
      pick_rows(ds.train_rows, subsample_train, seed ^ 0x747261696eull);
  std::vector<int> test_ids = pick_rows(ds.test_rows, subsample_test, seed ^ 0x74657374ull);

  PreparedData out;
  out.train_raw = take_rows(ds.features, train_ids);
  Matrix test_raw = take_rows(ds.features, test_ids);
  out.codecs = fit_feature_codecs(out.train_raw, input_bits);
  out.train_codes = encode_features(out.train_raw, out.codecs);
  out.test_codes = encode_features(test_raw, out.codecs);
  out.train_labels.reserve(train_ids.size());
  for (int id : train_ids) out.train_labels.push_back(ds.labels[size_t(id)]);
  out.test_labels.reserve(test_ids.size());
  for (int id : test_ids) out.test_labels.push_back(ds.labels[size_t(id)]);
  out.image = ds.image;
  out.img_h = ds.img_h;
  out.img_w = ds.img_w;
  out.num_classes = ds.num_classes;
  if (!ds.image) out.train_raw.resize(0, 0);  // raw rows only needed for augmentation
  return out;
}

void calibrate_scales(Network& net, const CodeMat& batch_codes) {
  if (batch_codes.rows() < 2) throw TrainError("scale calibration needs a batch of at least 2");
  // Train-mode forward (batch statistics, running moments untouched) so the
  // observed magnitudes match what the first training step will see.
  Matrix x = decode_features(batch_codes, net.input_codecs);
  for (auto& layer : net.layers) {
    Tape t;
    int y = lut_layer_forward(t, t.leaf(std::move(x)), layer, /*update_running=*/false);
    Matrix pre = t.val(y);
    if (layer.activation) pre = pre.cwiseMax(0.0f);
    layer.out_scale.value(0, 0) = std::max(percentile999(pre), 1e-4f);
    x = fake_quantize_eval(pre, layer.spec());
  }
}

std::vector<Matrix> dense_pretrain(const ModelConfig& cfg, const PreparedData& data,
                                   const TrainHyperparams& hp) {
  validate_config(cfg);
  validate_hyper(hp);
  check_class_shape(cfg, data.num_classes);

  // Scaffold network supplies the assembled layers' sub-units; learned-mapping
  // layers are replaced by dense affine + batch norm so every candidate source
  // keeps a live weight to score.
  Network scaffold = build_network(cfg, hp.seed, true);
  struct DenseProxy {
    Parameter w, b;
    BatchNormState bn;
  };
  std::vector<DenseProxy> dense;
  std::vector<int> dense_at(size_t(cfg.layer_count()), -1);
  Rng init_rng(hp.seed ^ 0x64656e7365ull);
  int prev = cfg.input_features;
  for (int l = 0; l < cfg.layer_count(); ++l) {
    int w_l = cfg.layer_widths[l];
    if (!cfg.assemble_flags[size_t(l)]) {
      DenseProxy p{Parameter(w_l, prev), Parameter(1, w_l), BatchNormState(w_l)};
      float bound = std::sqrt(1.0f / float(prev));
      for (Eigen::Index i = 0; i < p.w.value.size(); ++i)
        p.w.value.data()[i] = init_rng.uniform(-bound, bound);
      p.b.value.setZero();
      dense_at[size_t(l)] = int(dense.size());
      dense.push_back(std::move(p));
    }
    prev = w_l;
  }

  std::vector<Parameter*> params;
  for (auto& p : dense) {
    params.push_back(&p.w);
    params.push_back(&p.b);
    params.push_back(&p.bn.gain);
    params.push_back(&p.bn.shift);
  }
  for (int l = 0; l < cfg.layer_count(); ++l)
    if (cfg.assemble_flags[size_t(l)])
      for (auto& unit : scaffold.layers[size_t(l)].units) unit.collect_params(params);

  std::vector<int> ids = pick_rows(iota_ids(int(data.train_codes.rows())), hp.pretrain_rows,
                                   hp.seed ^ 0x70726574ull);
  Matrix all_x = decode_features(take_code_rows(data.train_codes, ids), data.codecs);
  std::vector<int> all_y;
  all_y.reserve(ids.size());
  for (int id : ids) all_y.push_back(data.train_labels[size_t(id)]);

  AdamWState st;
  Rng rng(hp.seed ^ 0x70726530ull);
  std::vector<int> order = iota_ids(int(ids.size()));
  for (int epoch = 0; epoch < hp.pretrain_epochs; ++epoch) {
    rng.shuffle(order);
    auto spans = batch_spans(int(order.size()), hp.batch_size);
    for (size_t bi = 0; bi < spans.size(); ++bi) {
      auto [lo, hi] = spans[bi];
      Matrix bx(hi - lo, all_x.cols());
      std::vector<int> by(static_cast<size_t>(hi - lo));
      for (int i = lo; i < hi; ++i) {
        bx.row(i - lo) = all_x.row(order[size_t(i)]);
        by[size_t(i - lo)] = all_y[size_t(order[size_t(i)])];
      }
      Tape t;
      int x = t.leaf(std::move(bx));
      for (int l = 0; l < cfg.layer_count(); ++l) {
        int di = dense_at[size_t(l)];
        if (di >= 0) {
          x = affine(t, x, t.param(dense[size_t(di)].w), t.param(dense[size_t(di)].b));
          x = batch_norm(t, x, dense[size_t(di)].bn, true, true);
        } else {
          x = lut_layer_forward(t, x, scaffold.layers[size_t(l)], true);
        }
        if (applies_activation(cfg, l)) x = relu(t, x);
      }
      int logits = cfg.output_units() == 1 ? binary_logits(t, x, 0.0f) : x;
      int loss = cross_entropy(t, logits, by);

      double reg = 0.0;
      for (auto& p : dense) reg += double(p.w.value.cwiseAbs().sum());
      double total = double(t.val(loss)(0, 0)) + double(hp.group_reg) * reg;
      if (!std::isfinite(total)) {
        std::ostringstream os;
        os << "dense pre-training diverged (loss " << total << ") at epoch " << epoch + 1
           << ", seed " << hp.seed << "; lower learning_rate or group_reg";
        throw TrainError(os.str());
      }

      for (Parameter* p : params) p->zero_grad();
      t.backward(loss);
      // L1 term handled analytically: d|w|/dw = sign(w), zero at zero.
      for (auto& p : dense)
        p.w.grad += hp.group_reg * p.w.value.unaryExpr([](float v) {
          return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f);
        });
      double tfrac = double(epoch) + double(bi) / double(spans.size());
      optimizer_step(params, st, hp, tfrac);
    }
  }

  std::vector<Matrix> scores(size_t(cfg.layer_count()));
  for (int l = 0; l < cfg.layer_count(); ++l)
    if (dense_at[size_t(l)] >= 0) scores[size_t(l)] = dense[size_t(dense_at[size_t(l)])].w.value.cwiseAbs();
  return scores;
}

std::vector<std::vector<int>> select_mapping(const Matrix& scores, int fan_in) {
  if (fan_in < 1) throw ConfigError("select_mapping: fan_in must be positive");
  if (fan_in > scores.cols()) {
    std::ostringstream os;
    os << "select_mapping: fan_in " << fan_in << " exceeds the " << scores.cols()
       << " available sources";
    throw ConfigError(os.str());
  }
  std::vector<std::vector<int>> mapping(size_t(scores.rows()));
  std::vector<int> idx(size_t(scores.cols()));
  for (Eigen::Index u = 0; u < scores.rows(); ++u) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      float sa = scores(u, a), sb = scores(u, b);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    std::vector<int> pick(idx.begin(), idx.begin() + fan_in);
    std::sort(pick.begin(), pick.end());
    mapping[size_t(u)] = std::move(pick);
  }
  return mapping;
}

float evaluate(const Network& net, const CodeMat& codes, const std::vector<int>& labels) {
  if (codes.rows() == 0) throw DataError("evaluate: empty split");
  if (codes.rows() != Eigen::Index(labels.size()))
    throw DataError("evaluate: row/label count mismatch");
  const QuantSpec spec = net.layers.back().spec();
  const int outs = net.config.output_units();
  int64_t hits = 0;
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index off = 0; off < codes.rows(); off += kChunk) {
    Eigen::Index n = std::min(kChunk, codes.rows() - off);
    Matrix out = forward_eval(net, codes.middleRows(off, n));
    for (Eigen::Index i = 0; i < n; ++i)
      if (predict_label(&out(i, 0), outs, spec) == labels[size_t(off + i)]) ++hits;
  }
  return float(double(hits) / double(codes.rows()));
}

TrainResult train_sparse(Network& net, const PreparedData& data, const TrainHyperparams& hp,
                         bool augment_train, const EpochCallback& on_epoch) {
  validate_hyper(hp);
  check_class_shape(net.config, data.num_classes);
  if (augment_train && !data.image)
    throw ConfigError("augmentation requires an image dataset (rows carry no geometry)");
  const int n_train = int(data.train_codes.rows());
  if (n_train < 2) throw DataError("train_sparse: need at least 2 training rows");

  calibrate_scales(net, data.train_codes.topRows(std::min(n_train, hp.batch_size)));

  const int n_test = int(data.test_codes.rows());
  const int metric_rows =
      hp.metric_test_rows > 0 ? std::min(n_test, hp.metric_test_rows) : n_test;
  auto metric_accuracy = [&]() -> float {
    if (metric_rows == 0) return 0.0f;
    std::vector<int> lab(data.test_labels.begin(), data.test_labels.begin() + metric_rows);
    return evaluate(net, data.test_codes.topRows(metric_rows), lab);
  };

  TrainResult result;
  std::vector<Parameter*> params = net.parameters();
  AdamWState st;
  Rng rng(hp.seed ^ 0x73706172736574ull);
  std::vector<int> order = iota_ids(n_train);
  NetState best;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    auto spans = batch_spans(n_train, hp.batch_size);
    double loss_sum = 0.0;
    for (size_t bi = 0; bi < spans.size(); ++bi) {
      auto [lo, hi] = spans[bi];
      const int b = hi - lo;
      CodeMat codes(b, data.train_codes.cols());
      std::vector<int> by(static_cast<size_t>(b));
      if (augment_train) {
        Matrix raw(b, data.train_raw.cols());
        for (int i = lo; i < hi; ++i) raw.row(i - lo) = data.train_raw.row(order[size_t(i)]);
        codes = encode_features(augment(raw, data.img_h, data.img_w, rng), data.codecs);
      } else {
        for (int i = lo; i < hi; ++i) codes.row(i - lo) = data.train_codes.row(order[size_t(i)]);
      }
      for (int i = lo; i < hi; ++i) by[size_t(i - lo)] = data.train_labels[size_t(order[size_t(i)])];

      Tape t;
      int out = forward_train(net, t, codes);
      int logits = net.config.output_units() == 1
                       ? binary_logits(t, out, net.layers.back().out_scale.value(0, 0))
                       : out;
      int loss = cross_entropy(t, logits, by);
      float lv = t.val(loss)(0, 0);
      if (!std::isfinite(lv)) {
        std::ostringstream os;
        os << "training diverged (loss " << lv << ") at epoch " << epoch + 1 << ", seed "
           << hp.seed << "; lower learning_rate";
        throw TrainError(os.str());
      }
      loss_sum += double(lv) * b;

      for (Parameter* p : params) p->zero_grad();
      t.backward(loss);
      optimizer_step(params, st, hp, double(epoch) + double(bi) / double(spans.size()));
      for (auto& layer : net.layers)
        if (layer.out_scale.value(0, 0) < 1e-4f) layer.out_scale.value(0, 0) = 1e-4f;
    }

    EpochMetrics em;
    em.epoch = epoch + 1;
    em.train_loss = float(loss_sum / double(n_train));
    em.test_accuracy = metric_accuracy();
    result.history.push_back(em);
    if (on_epoch) on_epoch(em);
    if (result.best_epoch < 0 || em.test_accuracy > result.best_accuracy) {
      result.best_accuracy = em.test_accuracy;
      result.best_epoch = em.epoch;
      best = snapshot_state(net);
    }
  }

  if (result.best_epoch >= 0) restore_state(net, best);
  result.final_accuracy = n_test > 0 ? evaluate(net, data.test_codes, data.test_labels) : 0.0f;
  if (hp.epochs == 0) result.best_accuracy = result.final_accuracy;
  return result;
}

Matrix augment_one(const Matrix& image_row, int img_h, int img_w, float angle_deg, float dy,
                   float dx) {
  Matrix out = Matrix::Zero(1, image_row.cols());
  const float cy = 0.5f * float(img_h - 1);
  const float cx = 0.5f * float(img_w - 1);
  const float rad = angle_deg * float(kPi) / 180.0f;
  const float c = std::cos(rad), s = std::sin(rad);
  for (int r = 0; r < img_h; ++r) {
    for (int col = 0; col < img_w; ++col) {
      // output = translate(rotate(input)); pull source through the inverse map
      float vr = float(r) - cy - dy;
      float vc = float(col) - cx - dx;
      long sr = std::lround(c * vr + s * vc + cy);
      long sc = std::lround(-s * vr + c * vc + cx);
      if (sr >= 0 && sr < img_h && sc >= 0 && sc < img_w)
        out(0, r * img_w + col) = image_row(0, sr * img_w + sc);
    }
  }
  return out;
}

Matrix augment(const Matrix& batch, int img_h, int img_w, Rng& rng) {
  if (img_h <= 0 || img_w <= 0 || Eigen::Index(img_h) * img_w != batch.cols())
    throw ConfigError("augment: rows are not img_h * img_w images");
  Matrix out(batch.rows(), batch.cols());
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    float angle = rng.uniform(-10.0f, 10.0f);
    float dy = rng.uniform(-2.0f, 2.0f);
    float dx = rng.uniform(-2.0f, 2.0f);
    out.row(i) = augment_one(batch.row(i), img_h, img_w, angle, dy, dx);
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write metrics file: " + path);
  f << "epoch,train_loss,test_accuracy\n";
  char buf[96];
  for (const auto& em : history) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", em.epoch, double(em.train_loss),
                  double(em.test_accuracy));
    f << buf;
  }
}

}  // namespace lutnn
