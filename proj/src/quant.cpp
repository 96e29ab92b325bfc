// SPDX-License-Identifier: Apache-2.0
#include "lutnn/quant.hpp"

#include <cmath>
#include <utility>

#include "lutnn/errors.hpp"

namespace lutnn {

int quantize_code(float x, const QuantSpec& q) {
  float c = x < 0.0f ? 0.0f : (x > q.scale ? q.scale : x);
  float k = std::floor(c * float(q.max_code()) / q.scale + 0.5f);
  int code = int(k);
  return code > q.max_code() ? q.max_code() : code;
}

float dequantize(int code, const QuantSpec& q) {
  return q.scale * float(code) / float(q.max_code());
}

float fake_quantize_value(float x, const QuantSpec& q) {
  return dequantize(quantize_code(x, q), q);
}

int to_code_exact(float v, const QuantSpec& q) {
  int code = quantize_code(v, q);
  if (std::fabs(v - dequantize(code, q)) > 1e-6f * q.scale)
    throw VerifyError("to_code_exact: value off the quantization grid");
  return code;
}

Matrix fake_quantize_eval(const Matrix& x, const QuantSpec& q) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y.data()[i] = fake_quantize_value(x.data()[i], q);
  return y;
}

CodeMat quantize_codes(const Matrix& x, const QuantSpec& q) {
  CodeMat y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    y.data()[i] = quantize_code(x.data()[i], q);
  return y;
}

Matrix dequantize_codes(const CodeMat& codes, const QuantSpec& q) {
  Matrix y(codes.rows(), codes.cols());
  for (Eigen::Index i = 0; i < codes.size(); ++i)
    y.data()[i] = dequantize(codes.data()[i], q);
  return y;
}

int fake_quantize(Tape& t, int x, Parameter& scale, int bits) {
  int s = t.param(scale);
  float sv = t.val(s)(0, 0);
  if (!(sv > 0.0f)) throw TrainError("fake_quantize: scale must be positive");
  QuantSpec q{bits, sv};
  Matrix y = fake_quantize_eval(t.val(x), q);
  return t.push(std::move(y), [x, s, sv](Tape& t, int self) {
    const Matrix& dy = t.grad(self);
    const Matrix& xv = t.val(x);
    float ds = 0.0f;
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.size(); ++i) {
      float xi = xv.data()[i];
      dx.data()[i] = (xi >= 0.0f && xi <= sv) ? dy.data()[i] : 0.0f;
      if (xi > sv) ds += dy.data()[i];
    }
    t.grad(x) += dx;
    t.grad(s)(0, 0) += ds;
  });
}

std::vector<FeatureCodec> fit_feature_codecs(const Matrix& train_features, int bits) {
  if (train_features.rows() == 0) throw DataError("fit_feature_codecs: empty training split");
  std::vector<FeatureCodec> codecs(size_t(train_features.cols()));
  for (Eigen::Index f = 0; f < train_features.cols(); ++f) {
    float lo = train_features.col(f).minCoeff();
    float hi = train_features.col(f).maxCoeff();
    float range = hi - lo;
    codecs[size_t(f)] = {lo, QuantSpec{bits, range > 0.0f ? range : 1.0f}};
  }
  return codecs;
}

CodeMat encode_features(const Matrix& features, const std::vector<FeatureCodec>& codecs) {
  if (size_t(features.cols()) != codecs.size())
    throw DataError("encode_features: feature count does not match codec count");
  CodeMat codes(features.rows(), features.cols());
  for (Eigen::Index f = 0; f < features.cols(); ++f) {
    const FeatureCodec& c = codecs[size_t(f)];
    for (Eigen::Index i = 0; i < features.rows(); ++i)
      codes(i, f) = quantize_code(features(i, f) - c.offset, c.spec);
  }
  return codes;
}

Matrix decode_features(const CodeMat& codes, const std::vector<FeatureCodec>& codecs) {
  if (size_t(codes.cols()) != codecs.size())
    throw DataError("decode_features: feature count does not match codec count");
  Matrix out(codes.rows(), codes.cols());
  for (Eigen::Index f = 0; f < codes.cols(); ++f) {
    const FeatureCodec& c = codecs[size_t(f)];
    for (Eigen::Index i = 0; i < codes.rows(); ++i)
      out(i, f) = dequantize(codes(i, f), c.spec);
  }
  return out;
}

}  // namespace lutnn
