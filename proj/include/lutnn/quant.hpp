// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "lutnn/tape.hpp"

namespace lutnn {

// Unsigned fixed-point grid on [0, scale]: levels scale*k/(2^bits - 1).
struct QuantSpec {
  int bits = 1;
  float scale = 1.0f;

  int level_count() const { return 1 << bits; }
  int max_code() const { return (1 << bits) - 1; }
};

// clamp to [0, s], round half-up to the nearest level; returns the level code.
int quantize_code(float x, const QuantSpec& q);
// Representable value of a code. quantize_code(dequantize(k)) == k.
float dequantize(int code, const QuantSpec& q);
// dequantize(quantize_code(x)): the fake-quantized value. Idempotent.
float fake_quantize_value(float x, const QuantSpec& q);

// Code of a value already on the grid. Off-grid by more than 1e-6*scale is a
// bug in the caller (a non-quantized value leaked into an integer domain).
int to_code_exact(float v, const QuantSpec& q);

Matrix fake_quantize_eval(const Matrix& x, const QuantSpec& q);
CodeMat quantize_codes(const Matrix& x, const QuantSpec& q);
Matrix dequantize_codes(const CodeMat& codes, const QuantSpec& q);

// Training-time quantizer with a learnable scale (1x1 Parameter, decay-free).
// Straight-through estimator: dx passes where 0 <= x <= scale; the scale
// receives the summed gradient of clipped-high entries.
int fake_quantize(Tape& t, int x, Parameter& scale, int bits);

// Per-feature input conditioning fitted on training data: shift by the
// observed minimum, scale = observed range. Constant features degrade to
// scale 1 / code 0 rather than dividing by zero.
struct FeatureCodec {
  float offset = 0.0f;
  QuantSpec spec;
};

std::vector<FeatureCodec> fit_feature_codecs(const Matrix& train_features, int bits);
CodeMat encode_features(const Matrix& features, const std::vector<FeatureCodec>& codecs);
// Grid values of the codes, deliberately offset-free: the offset is
// encode-side conditioning only. Models and truth tables consume what this
// returns, so it must match dequantize() per feature exactly.
Matrix decode_features(const CodeMat& codes, const std::vector<FeatureCodec>& codecs);

}  // namespace lutnn
